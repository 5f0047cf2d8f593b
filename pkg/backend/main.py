"""Command-line entry point for the decentralized baseband processing simulator.

Subcommands:
    detect-sweep    uplink BER sweep (centralized baselines, ADMM, CG)
    beamform-sweep  downlink BER sweep (centralized ZF, ADMM beamforming)
    complexity      timing/arithmetic complexity table
    tradeoff        complexity versus SNR needed for the target BER

Exit status: 0 on success, 2 for configuration or parameter problems,
3 when a report cannot be written.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from config import settings
from schemas import CsiMode, SystemConfig, load_system_config

from app.core.errors import ConfigurationError, ReportError, SimulationError
from app.core.modem import Modulation
from app.core.performance import get_performance_report
from app.services.complexity import all_rows
from app.services.harness import run_downlink_sweep, run_uplink_sweep
from app.services.reports import (
    BER_DOWNLINK_FILE,
    BER_UPLINK_FILE,
    COMPLEXITY_FILE,
    TRADEOFF_FILE,
    build_tradeoff,
    emit_ber_csv,
    emit_complexity_csv,
    emit_tradeoff_csv,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dbp-sim",
        description="Decentralized baseband processing simulator for massive MU-MIMO",
    )
    parser.add_argument("--log-level", default=None, help="Override DBP_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("detect-sweep", "Uplink BER sweep"),
        ("beamform-sweep", "Downlink BER sweep"),
        ("complexity", "Complexity table for the configured dimensions"),
        ("tradeoff", "Complexity versus SNR at the target BER"),
    ):
        command = sub.add_parser(name, help=help_text)
        command.add_argument("--config", type=Path, default=None, help="TOML experiment file")
        command.add_argument("--users", type=int, default=None)
        command.add_argument("--clusters", type=int, default=None)
        command.add_argument("--antennas-per-cluster", type=int, default=None)
        command.add_argument("--snr", type=float, action="append", default=None, help="SNR point in dB (repeatable)")
        command.add_argument("--trials", type=int, default=None)
        command.add_argument("--seed", type=int, default=None)
        command.add_argument("--algorithm", action="append", default=None, help="Algorithm name (repeatable)")
        command.add_argument("--iterations", type=int, action="append", default=None, help="Iteration count (repeatable)")
        command.add_argument("--modulation", choices=[m.value for m in Modulation], default=None)
        command.add_argument("--csi", choices=[c.value for c in CsiMode], default=None)
        command.add_argument("--out", type=Path, default=None, help="Output CSV path or directory")
        command.add_argument("--log-level", dest="command_log_level", default=None, help=argparse.SUPPRESS)
    return parser


def configure_logging(level: Optional[str] = None) -> None:
    logging.basicConfig(
        level=(level or settings.log_level).upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        force=True,
    )


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """Map CLI flags onto ``SystemConfig`` fields; unset flags stay ``None``."""
    overrides: Dict[str, Any] = {
        "users": args.users,
        "clusters": args.clusters,
        "antennas_per_cluster": args.antennas_per_cluster,
        "snr_grid_db": args.snr,
        "trials": args.trials,
        "seed": args.seed,
        "iterations": args.iterations,
        "modulation": args.modulation,
        "csi": args.csi,
    }
    if args.algorithm:
        key = "downlink_algorithms" if args.command == "beamform-sweep" else "algorithms"
        overrides[key] = args.algorithm
    return overrides


def _output_path(args: argparse.Namespace, default_name: str) -> Path:
    out = args.out or Path(settings.output_dir)
    if out.suffix.lower() == ".csv":
        return out
    return out / default_name


def run_command(args: argparse.Namespace, config: SystemConfig) -> Path:
    """Run one subcommand and return the report it wrote."""
    if args.command == "detect-sweep":
        return emit_ber_csv(run_uplink_sweep(config), _output_path(args, BER_UPLINK_FILE))

    if args.command == "beamform-sweep":
        return emit_ber_csv(run_downlink_sweep(config), _output_path(args, BER_DOWNLINK_FILE))

    if args.command == "complexity":
        T = max(config.iterations)
        reports = all_rows(config.users, config.antennas_per_cluster, config.clusters, T)
        return emit_complexity_csv(reports, _output_path(args, COMPLEXITY_FILE))

    ber_rows = run_uplink_sweep(config) + run_downlink_sweep(config)
    return emit_tradeoff_csv(build_tradeoff(config, ber_rows), _output_path(args, TRADEOFF_FILE))


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.command_log_level or args.log_level)

    settings_errors = settings.validate_runtime_settings()
    if settings_errors:
        for error in settings_errors:
            logger.warning(f"Settings: {error}")

    try:
        config_path = args.config or settings.default_config_path
        config = load_system_config(config_path, overrides_from_args(args))
        path = run_command(args, config)
    except ReportError as exc:
        logger.error(f"Report error: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigurationError as exc:
        logger.error(f"Configuration error: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    print(path)
    if settings.performance_enabled:
        logger.debug(f"Performance report: {get_performance_report()}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
