"""
Complexity Model - Real-multiplication counts of centralized and decentralized processing.

Counts are evaluated from closed-form expressions in exact rational arithmetic
and must come out integral. Two metrics are reported:

- TM (timing): multiplications on a single processing element, with all clusters
  working in parallel; reflects latency.
- AR (arithmetic): multiplications summed over all processing elements; reflects
  hardware cost.

Iterative algorithms are split into preprocessing, first iteration and each
subsequent iteration, so ``total(T) = preprocessing + first + (T - 1) * per_iter``.
Centralized baselines have a single preprocessing-only count.
"""

import logging
from enum import Enum
from fractions import Fraction
from typing import TYPE_CHECKING, Callable, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, Field

from ..core.errors import ConfigurationError
from ..schemas.params import InverseMode, preferred_mode

if TYPE_CHECKING:
    from schemas import SystemConfig, TradeoffRow

logger = logging.getLogger(__name__)


class Algorithm(str, Enum):
    ADMM_DL = "ADMM-DL"
    ADMM_UL = "ADMM-UL"
    CG_UL = "CG-UL"
    ZF_DL = "ZF-DL"
    MMSE_UL = "MMSE-UL"


class Metric(str, Enum):
    TM = "TM"
    AR = "AR"


NO_MODE = "n/a"

_THIRD = Fraction(1, 3)

Formula = Callable[[int, int, int], Fraction]


# (algorithm, mode, metric) -> (preprocessing, first iteration, subsequent iteration)
_FORMULAS: Dict[Tuple[Algorithm, str, Metric], Tuple[Formula, Formula, Formula]] = {
    (Algorithm.ADMM_DL, "SxS", Metric.TM): (
        lambda U, S, C: 2 * U * S**2 + 10 * _THIRD * S**3 - _THIRD * S,
        lambda U, S, C: Fraction(4 * S * U + 4 * S**2),
        lambda U, S, C: Fraction(8 * S * U + 4 * S**2 + 6 * U + 1),
    ),
    (Algorithm.ADMM_DL, "SxS", Metric.AR): (
        lambda U, S, C: C * (2 * U * S**2 + 10 * _THIRD * S**3 - _THIRD * S),
        lambda U, S, C: Fraction(C * (4 * S * U + 4 * S**2)),
        lambda U, S, C: Fraction(C * (8 * S * U + 4 * S**2 + 2 * U) + 4 * U + 1),
    ),
    (Algorithm.ADMM_DL, "UxU", Metric.TM): (
        lambda U, S, C: 2 * S * U**2 + 10 * _THIRD * U**3 - _THIRD * U,
        lambda U, S, C: Fraction(4 * S * U + 4 * U**2),
        lambda U, S, C: Fraction(8 * S * U + 4 * U**2 + 6 * U + 1),
    ),
    (Algorithm.ADMM_DL, "UxU", Metric.AR): (
        lambda U, S, C: C * (2 * S * U**2 + 10 * _THIRD * U**3 - _THIRD * U),
        lambda U, S, C: Fraction(C * (4 * S * U + 4 * U**2)),
        lambda U, S, C: Fraction(C * (8 * S * U + 4 * U**2 + 2 * U) + 4 * U + 1),
    ),
    (Algorithm.ADMM_UL, "SxS", Metric.TM): (
        lambda U, S, C: 2 * U * S**2 + 10 * _THIRD * S**3 + 4 * U * S + 4 * S**2 - _THIRD * S,
        lambda U, S, C: Fraction(2 * U),
        lambda U, S, C: Fraction(8 * S * U + 4 * S**2 + 4 * U),
    ),
    (Algorithm.ADMM_UL, "SxS", Metric.AR): (
        lambda U, S, C: C * (2 * U * S**2 + 10 * _THIRD * S**3 + 4 * U * S + 4 * S**2 - _THIRD * S),
        lambda U, S, C: Fraction(2 * U),
        lambda U, S, C: Fraction(C * (8 * S * U + 4 * S**2 + 2 * U) + 2 * U),
    ),
    (Algorithm.ADMM_UL, "UxU", Metric.TM): (
        lambda U, S, C: 2 * S * U**2 + 10 * _THIRD * U**3 + 4 * S * U + 4 * U**2 - _THIRD * U,
        lambda U, S, C: Fraction(2 * U),
        lambda U, S, C: Fraction(4 * U**2 + 6 * U),
    ),
    (Algorithm.ADMM_UL, "UxU", Metric.AR): (
        lambda U, S, C: C * (2 * S * U**2 + 10 * _THIRD * U**3 + 4 * S * U + 4 * U**2 - _THIRD * U),
        lambda U, S, C: Fraction(2 * U),
        lambda U, S, C: Fraction(C * (4 * U**2 + 4 * U) + 2 * U),
    ),
    (Algorithm.CG_UL, NO_MODE, Metric.TM): (
        lambda U, S, C: Fraction(4 * S * U + 2 * U),
        lambda U, S, C: Fraction(8 * S * U + 6 * U),
        lambda U, S, C: Fraction(8 * S * U + 12 * U),
    ),
    (Algorithm.CG_UL, NO_MODE, Metric.AR): (
        lambda U, S, C: Fraction(4 * C * S * U + 2 * U),
        lambda U, S, C: Fraction(C * (8 * S * U + 4 * U) + 2 * U),
        lambda U, S, C: Fraction(C * (8 * S * U + 10 * U) + 2 * U),
    ),
}

_CENTRALIZED: Dict[Algorithm, Formula] = {
    Algorithm.ZF_DL: lambda U, S, C: 6 * C * S * U**2 + 10 * _THIRD * U**3 + 4 * C * S * U - 4 * _THIRD * U,
    Algorithm.MMSE_UL: lambda U, S, C: 6 * C * S * U**2 + 10 * _THIRD * U**3 + 4 * C * S * U - _THIRD * U,
}

ITERATIVE = (Algorithm.ADMM_DL, Algorithm.ADMM_UL, Algorithm.CG_UL)


class ComplexityReport(BaseModel):
    """Evaluated multiplication counts of one algorithm, mode and metric."""
    algorithm: Algorithm
    mode: str = Field(..., description="SxS, UxU or n/a")
    metric: Metric
    U: int = Field(..., ge=1)
    S: int = Field(..., ge=1)
    C: int = Field(..., ge=1)
    iterations: int = Field(..., ge=1)
    preprocessing: int = Field(..., ge=0)
    first_iter: int = Field(..., ge=0)
    per_iter: int = Field(..., ge=0)

    def total_for(self, T: int) -> int:
        if T < 1:
            raise ConfigurationError(f"iteration count must be >= 1, got {T}")
        return self.preprocessing + self.first_iter + (T - 1) * self.per_iter

    @property
    def total(self) -> int:
        return self.total_for(self.iterations)


def _integral(value: Fraction, label: str) -> int:
    if value.denominator != 1:
        raise ArithmeticError(f"{label} evaluated to non-integer {value}")
    if value < 0:
        raise ArithmeticError(f"{label} evaluated to negative {value}")
    return int(value)


def _normalize_mode(algorithm: Algorithm, mode: Optional[Union[InverseMode, str]], S: int, U: int) -> str:
    if algorithm in (Algorithm.ADMM_DL, Algorithm.ADMM_UL):
        if mode is None:
            return preferred_mode(S, U).value
        if mode == NO_MODE:
            raise ConfigurationError(f"{algorithm.value} needs mode SxS or UxU")
        try:
            return InverseMode(mode).value
        except ValueError as exc:
            raise ConfigurationError(f"unknown mode '{mode}' for {algorithm.value}") from exc
    if mode not in (None, NO_MODE):
        raise ConfigurationError(f"{algorithm.value} has no '{mode}' mode")
    return NO_MODE


def complexity_eval(
    algorithm: Union[Algorithm, str],
    mode: Optional[Union[InverseMode, str]],
    metric: Union[Metric, str],
    U: int,
    S: int,
    C: int,
    T: int = 1,
) -> ComplexityReport:
    """Evaluate one complexity row. ``mode=None`` picks the smaller inverse for ADMM."""
    try:
        algorithm = Algorithm(algorithm)
        metric = Metric(metric)
    except ValueError as exc:
        raise ConfigurationError(f"unknown complexity row: {exc}") from exc
    if min(U, S, C, T) < 1:
        raise ConfigurationError(f"U, S, C and T must be >= 1, got U={U}, S={S}, C={C}, T={T}")
    mode_key = _normalize_mode(algorithm, mode, S, U)
    label = f"{algorithm.value}/{mode_key}/{metric.value}"

    if algorithm in _CENTRALIZED:
        # TM and AR coincide on a single central processing element
        pre, first, sub = _integral(_CENTRALIZED[algorithm](U, S, C), label), 0, 0
    else:
        pre_f, first_f, sub_f = _FORMULAS[(algorithm, mode_key, metric)]
        pre = _integral(pre_f(U, S, C), label)
        first = _integral(first_f(U, S, C), label)
        sub = _integral(sub_f(U, S, C), label)

    return ComplexityReport(
        algorithm=algorithm, mode=mode_key, metric=metric, U=U, S=S, C=C, iterations=T,
        preprocessing=pre, first_iter=first, per_iter=sub,
    )


def all_rows(U: int, S: int, C: int, T: int = 1) -> List[ComplexityReport]:
    """Every row of the complexity table: 8 ADMM rows, 2 CG rows, 4 centralized rows."""
    rows = []
    for algorithm in (Algorithm.ADMM_DL, Algorithm.ADMM_UL):
        for mode in (InverseMode.SXS, InverseMode.UXU):
            for metric in Metric:
                rows.append(complexity_eval(algorithm, mode, metric, U, S, C, T))
    for metric in Metric:
        rows.append(complexity_eval(Algorithm.CG_UL, None, metric, U, S, C, T))
    for algorithm in (Algorithm.ZF_DL, Algorithm.MMSE_UL):
        for metric in Metric:
            rows.append(complexity_eval(algorithm, None, metric, U, S, C, T))
    return rows


COMPLEXITY_COLUMNS = [
    "algorithm", "mode", "metric", "U", "S", "C", "iterations",
    "preprocessing", "first_iter", "per_iter", "total",
]


def complexity_rows_for_csv(reports: List[ComplexityReport]) -> List[Dict[str, object]]:
    """Flatten reports into CSV records (columns ``COMPLEXITY_COLUMNS``)."""
    records = []
    for report in reports:
        record = report.model_dump()
        record["algorithm"] = report.algorithm.value
        record["metric"] = report.metric.value
        record["total"] = report.total
        records.append({column: record[column] for column in COMPLEXITY_COLUMNS})
    return records


# Uplink/downlink algorithm names of the experiment configuration that have a table row
_UPLINK_ROWS = {"admm": Algorithm.ADMM_UL, "cg": Algorithm.CG_UL, "mmse": Algorithm.MMSE_UL}
_DOWNLINK_ROWS = {"admm": Algorithm.ADMM_DL, "zf": Algorithm.ZF_DL}

SnrTargetFn = Callable[[str, int], Optional[float]]


def tradeoff_table(config: "SystemConfig", snr_target_fn: SnrTargetFn) -> List["TradeoffRow"]:
    """Join TM complexity with the SNR needed to reach the target BER.

    ``snr_target_fn(label, iterations)`` returns the interpolated SNR for a BER
    curve or ``None`` when the target is not reached inside the grid.
    Centralized baselines appear once with ``iterations = 0``.
    """
    from schemas import TradeoffRow, downlink_label, uplink_label

    U, S, C = config.users, config.antennas_per_cluster, config.clusters
    entries = []
    for name in config.algorithms:
        if name in _UPLINK_ROWS:
            entries.append((uplink_label(name, config.admm.regularizer), _UPLINK_ROWS[name]))
    for name in config.downlink_algorithms:
        if name in _DOWNLINK_ROWS:
            entries.append((downlink_label(name), _DOWNLINK_ROWS[name]))

    rows = []
    for label, algorithm in entries:
        counts = [0] if algorithm not in ITERATIVE else sorted(set(config.iterations))
        for T in counts:
            report = complexity_eval(algorithm, None, Metric.TM, U, S, C, max(T, 1))
            snr = snr_target_fn(label, T)
            if snr is None:
                logger.warning(f"{label} with {T} iterations never reaches BER {config.target_ber} in the SNR grid")
            rows.append(TradeoffRow(
                algorithm=label,
                iterations=T,
                tm_complexity=report.total,
                snr_db_at_target=snr,
                reachable=snr is not None,
            ))
    return rows
