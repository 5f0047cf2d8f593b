"""CSV report emission for BER sweeps, complexity tables and the trade-off table."""

import csv
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Sequence, Union

from pydantic import BaseModel, ValidationError

from schemas import BER_COLUMNS, TRADEOFF_COLUMNS, BerRow, SystemConfig, TradeoffRow

from ..core.errors import ReportError
from .complexity import COMPLEXITY_COLUMNS, ComplexityReport, all_rows, complexity_rows_for_csv, tradeoff_table
from .harness import run_downlink_sweep, run_uplink_sweep, snr_at_target_ber

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
Row = Union[BaseModel, Mapping[str, object]]

BER_UPLINK_FILE = "ber_uplink.csv"
BER_DOWNLINK_FILE = "ber_downlink.csv"
COMPLEXITY_FILE = "complexity.csv"
TRADEOFF_FILE = "tradeoff.csv"


def _as_record(row: Row) -> Dict[str, object]:
    record = row.model_dump() if isinstance(row, BaseModel) else dict(row)
    # empty cell for "not reached"
    return {key: "" if value is None else value for key, value in record.items()}


def emit_csv(rows: Iterable[Row], path: PathLike, columns: Sequence[str] = tuple(BER_COLUMNS)) -> Path:
    """
    Write rows as CSV with a fixed header; an empty sweep still gets its header.

    Raises:
        ReportError: the file cannot be written
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=list(columns), extrasaction="ignore")
            writer.writeheader()
            count = 0
            for row in rows:
                writer.writerow(_as_record(row))
                count += 1
    except OSError as exc:
        raise ReportError(str(path), exc.strerror or str(exc)) from exc
    logger.info(f"Wrote {count} rows to {path}")
    return path


def read_csv(path: PathLike) -> List[BerRow]:
    """Load a BER report back into ``BerRow`` objects."""
    path = Path(path)
    try:
        with open(path, newline="") as handle:
            records = list(csv.DictReader(handle))
    except OSError as exc:
        raise ReportError(str(path), exc.strerror or str(exc)) from exc
    try:
        return [BerRow(**record) for record in records]
    except ValidationError as exc:
        raise ReportError(str(path), f"malformed BER row: {exc.errors()[0]['msg']}") from exc


def emit_ber_csv(rows: Sequence[BerRow], path: PathLike) -> Path:
    return emit_csv(rows, path, BER_COLUMNS)


def emit_complexity_csv(reports: List[ComplexityReport], path: PathLike) -> Path:
    return emit_csv(complexity_rows_for_csv(reports), path, COMPLEXITY_COLUMNS)


def emit_tradeoff_csv(rows: Sequence[TradeoffRow], path: PathLike) -> Path:
    return emit_csv(rows, path, TRADEOFF_COLUMNS)


def build_tradeoff(config: SystemConfig, ber_rows: Sequence[BerRow]) -> List[TradeoffRow]:
    """Trade-off rows for every configured algorithm, using the SNR where its curve meets ``target_ber``."""
    return tradeoff_table(
        config,
        lambda label, iterations: snr_at_target_ber(ber_rows, label, iterations, config.target_ber),
    )


def emit_reports(config: SystemConfig, out_dir: PathLike) -> Dict[str, Path]:
    """Run both sweeps and write every report into ``out_dir``."""
    out_dir = Path(out_dir)
    uplink = run_uplink_sweep(config)
    downlink = run_downlink_sweep(config)
    T = max(config.iterations)
    written = {
        "ber_uplink": emit_ber_csv(uplink, out_dir / BER_UPLINK_FILE),
        "ber_downlink": emit_ber_csv(downlink, out_dir / BER_DOWNLINK_FILE),
        "complexity": emit_complexity_csv(
            all_rows(config.users, config.antennas_per_cluster, config.clusters, T), out_dir / COMPLEXITY_FILE
        ),
        "tradeoff": emit_tradeoff_csv(build_tradeoff(config, uplink + downlink), out_dir / TRADEOFF_FILE),
    }
    return written
