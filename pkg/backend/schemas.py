"""Pydantic schemas for experiment configuration and report rows."""

import logging
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, Field, ValidationError

from app.core.errors import ConfigurationError
from app.core.modem import Modulation
from app.schemas.params import AdmmParams, BfParams, Regularizer

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)

UPLINK_ALGORITHMS = ("mmse", "zf", "mrc", "admm", "cg")
DOWNLINK_ALGORITHMS = ("zf", "admm")
ITERATIVE_ALGORITHMS = ("admm", "cg")


class CsiMode(str, Enum):
    PERFECT = "perfect"
    ESTIMATED = "estimated"


def uplink_label(name: str, regularizer: Union[Regularizer, str] = Regularizer.MMSE) -> str:
    """Report label of an uplink detector, e.g. ``admm-mmse`` or ``cg``."""
    if name == "admm":
        return f"admm-{Regularizer(regularizer).value}"
    return name


def downlink_label(name: str) -> str:
    """Report label of a downlink precoder, e.g. ``zf-dl``."""
    return f"{name}-dl"


# Experiment configuration
class SystemConfig(BaseModel):
    """One Monte-Carlo experiment: system dimensions, SNR grid and algorithm selection."""
    users: int = Field(default=16, ge=1, description="Number of single-antenna users U")
    clusters: int = Field(default=8, ge=1, description="Number of antenna clusters C")
    antennas_per_cluster: int = Field(default=8, ge=1, description="Antennas per cluster S")
    modulation: Modulation = Field(default=Modulation.QAM16, description="Constellation of every user")
    es: float = Field(default=1.0, gt=0, description="Per-user symbol energy Es")
    snr_grid_db: List[float] = Field(default_factory=lambda: [0.0, 4.0, 8.0, 12.0], description="SNR points in dB")
    trials: int = Field(default=10, ge=1, description="Channel realizations per SNR point")
    n_sc: int = Field(default=1, ge=1, description="Independent subcarriers per trial")
    n_sym: int = Field(default=1, ge=0, description="Symbol vectors per coherence block")
    algorithms: List[str] = Field(default_factory=lambda: ["mmse", "admm", "cg"], description="Uplink detectors")
    downlink_algorithms: List[str] = Field(default_factory=lambda: ["zf", "admm"], description="Downlink precoders")
    iterations: List[int] = Field(default_factory=lambda: [1, 2, 3], description="Iteration counts for ADMM/CG")
    admm: AdmmParams = Field(default_factory=AdmmParams)
    beamforming: BfParams = Field(default_factory=BfParams)
    cg_loading: Regularizer = Field(default=Regularizer.MMSE, description="CG diagonal loading: mmse (No/Es) or zf (0)")
    seed: int = Field(default=0, ge=0, description="Root seed of every random stream")
    csi: CsiMode = Field(default=CsiMode.PERFECT, description="Perfect or pilot-estimated channel knowledge")
    target_ber: float = Field(default=0.01, gt=0, lt=1, description="BER target of the trade-off report")

    @property
    def antennas(self) -> int:
        """Total base-station antennas B = C * S."""
        return self.clusters * self.antennas_per_cluster

    class Config:
        json_schema_extra = {
            "example": {
                "users": 16,
                "clusters": 8,
                "antennas_per_cluster": 8,
                "modulation": "16qam",
                "snr_grid_db": [0, 4, 8, 12],
                "trials": 100,
                "algorithms": ["mmse", "admm", "cg"],
                "iterations": [1, 2, 3],
            }
        }


def validate_system_config(config: SystemConfig) -> List[str]:
    """
    Cross-field checks that field constraints cannot express.

    Returns:
        List of configuration errors (empty if valid)
    """
    errors = []

    if config.users > config.antennas:
        errors.append(f"users U={config.users} exceed antennas B={config.antennas}")

    if not config.snr_grid_db:
        errors.append("snr_grid_db must not be empty")

    if not config.iterations:
        errors.append("iterations must not be empty")
    for t in config.iterations:
        if t < 1:
            errors.append(f"iteration counts must be >= 1, got {t}")

    for name in config.algorithms:
        if name not in UPLINK_ALGORITHMS:
            errors.append(f"unknown uplink algorithm '{name}' (known: {', '.join(UPLINK_ALGORITHMS)})")

    for name in config.downlink_algorithms:
        if name not in DOWNLINK_ALGORITHMS:
            errors.append(f"unknown downlink algorithm '{name}' (known: {', '.join(DOWNLINK_ALGORITHMS)})")

    if config.cg_loading not in (Regularizer.MMSE, Regularizer.ZF):
        errors.append("cg_loading must be 'mmse' or 'zf'")

    if config.admm.regularizer is Regularizer.BPSK and config.modulation is not Modulation.BPSK:
        errors.append("the bpsk regularizer requires bpsk modulation")

    return errors


def _format_validation_error(exc: ValidationError) -> List[str]:
    return [f"{'.'.join(str(part) for part in err['loc'])}: {err['msg']}" for err in exc.errors()]


def _merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_system_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> SystemConfig:
    """
    Read a TOML experiment file, apply overrides and validate.

    ``overrides`` may nest (``{"admm": {"rho": 2.0}}``); ``None`` values are skipped
    so unset CLI flags leave the file untouched.

    Raises:
        ConfigurationError: unreadable file, schema violation or cross-field error
    """
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, "rb") as handle:
                data = tomllib.load(handle)
        except FileNotFoundError as exc:
            raise ConfigurationError(f"configuration file not found: {path}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigurationError(f"invalid TOML in {path}", [str(exc)]) from exc

    data = _merge(data, overrides or {})
    try:
        config = SystemConfig(**data)
    except ValidationError as exc:
        raise ConfigurationError("invalid system configuration", _format_validation_error(exc)) from exc

    errors = validate_system_config(config)
    if errors:
        raise ConfigurationError("invalid system configuration", errors)

    logger.info(
        f"Loaded configuration: U={config.users}, C={config.clusters}, S={config.antennas_per_cluster}, "
        f"{config.modulation.value}, {len(config.snr_grid_db)} SNR points, {config.trials} trials"
    )
    return config


# Report rows
class BerRow(BaseModel):
    """One BER data point: an algorithm at one iteration count and SNR."""
    snr_db: float = Field(..., description="Operating SNR in dB")
    algorithm: str = Field(..., description="Algorithm label, e.g. admm-mmse")
    iterations: int = Field(..., ge=0, description="Iteration count (0 for centralized baselines)")
    bits_total: int = Field(..., ge=0)
    bit_errors: int = Field(..., ge=0)
    ber: float = Field(..., ge=0, le=1)
    consensus_rounds: int = Field(default=0, ge=0, description="Consensus rounds per channel use")
    consensus_bytes: int = Field(default=0, ge=0, description="Upstream consensus bytes per channel use")


BER_COLUMNS = list(BerRow.model_fields.keys())


class TradeoffRow(BaseModel):
    """Complexity versus required SNR for one algorithm and iteration count."""
    algorithm: str
    iterations: int = Field(..., ge=0)
    tm_complexity: int = Field(..., ge=0, description="Timing complexity in real multiplications")
    snr_db_at_target: Optional[float] = Field(None, description="Interpolated SNR reaching the target BER")
    reachable: bool = Field(..., description="Whether the target BER is reached inside the SNR grid")


TRADEOFF_COLUMNS = list(TradeoffRow.model_fields.keys())
