"""
BER Harness - Monte-Carlo bit-error-rate sweeps for uplink detection and downlink beamforming.

Signal model:
    Uplink    y = H s + n at the base station, SNR per receive antenna U Es / No,
              so No = U Es 10^(-snr/10).
    Downlink  y = sum_c H_c x_c + n at the users, SNR per user Es / No,
              so No = Es 10^(-snr/10); the precoder is not power-normalized.

Every trial draws one channel per subcarrier (held for ``n_sym`` symbol vectors),
one payload and one unit-variance noise realization. The same draws are reused
at every SNR point, with the noise scaled by sqrt(No), so curves of different
algorithms and SNRs are compared on paired realizations.

Consensus traffic in a ``BerRow`` is per channel use: the rounds and upstream
bytes needed to process one symbol vector on all ``n_sc`` subcarriers.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import settings
from schemas import BerRow, CsiMode, SystemConfig, downlink_label, uplink_label

from ..core.channel import (
    ClusteredChannel,
    Stream,
    complex_gaussian,
    downlink,
    estimate_clusters,
    generate,
    partition,
    split_rows,
    stack,
    stream,
)
from ..core.modem import Constellation, constellation, count_errors, demap, map_bits, random_bits
from ..core.performance import PerformanceTimer
from ..core.runtime import ConsensusRuntime
from ..schemas.params import Regularizer
from ..workers.trial_worker import TrialResult, TrialTally, TrialWorker
from .beamformer import admm_beamform, transmit, zf_centralized
from .detector import admm_detect, cg_detect, mmse_centralized, mrc_centralized, zf_centralized_detect

logger = logging.getLogger(__name__)


def uplink_noise_variance(snr_db: float, U: int, Es: float = 1.0) -> float:
    return U * Es * 10.0 ** (-snr_db / 10.0)


def downlink_noise_variance(snr_db: float, Es: float = 1.0) -> float:
    return Es * 10.0 ** (-snr_db / 10.0)


def _traffic(runtime: Optional[ConsensusRuntime], n_sym: int) -> Tuple[int, int]:
    if runtime is None:
        return 0, 0
    record = runtime.record
    return record.rounds, record.bytes_total // max(n_sym, 1)


def _tally(bits: np.ndarray, xhat: np.ndarray, cons: Constellation, Es: float,
           runtime: Optional[ConsensusRuntime], n_sym: int) -> TrialTally:
    errors, total = count_errors(bits, demap(xhat / math.sqrt(Es), cons))
    rounds, nbytes = _traffic(runtime, n_sym)
    return TrialTally(bit_errors=errors, bits_total=total, consensus_rounds=rounds, consensus_bytes=nbytes)


def _payload(config: SystemConfig, cons: Constellation, trial: int) -> Tuple[np.ndarray, np.ndarray]:
    """Bits ``n_sc x U x (n_sym * bps)`` and symbols ``n_sc x U x n_sym`` of one trial."""
    shape = (config.n_sc, config.users, config.n_sym * cons.bits_per_symbol)
    bits = random_bits(shape, stream(config.seed, Stream.BITS, trial))
    return bits, math.sqrt(config.es) * map_bits(bits, cons)


def _box_radius(config: SystemConfig, cons: Constellation) -> Optional[float]:
    if config.admm.box_radius is not None:
        return config.admm.box_radius
    return cons.box_radius * math.sqrt(config.es)


def _channel_knowledge(config: SystemConfig, clustered: ClusteredChannel, No: float, trial: int) -> ClusteredChannel:
    if CsiMode(config.csi) is CsiMode.PERFECT:
        return clustered
    return estimate_clusters(clustered, No, config.es, config.seed, trial)


def _rows_from_cells(config: SystemConfig, cells: TrialResult) -> List[BerRow]:
    rows = []
    for (snr_index, label, iterations), tally in cells.items():
        ber = tally.bit_errors / tally.bits_total if tally.bits_total else 0.0
        rows.append(BerRow(
            snr_db=config.snr_grid_db[snr_index],
            algorithm=label,
            iterations=iterations,
            bits_total=tally.bits_total,
            bit_errors=tally.bit_errors,
            ber=ber,
            consensus_rounds=tally.consensus_rounds,
            consensus_bytes=tally.consensus_bytes,
        ))
    rows.sort(key=lambda row: (row.snr_db, row.algorithm, row.iterations))
    for row in rows:
        logger.info(
            f"SNR {row.snr_db:6.2f} dB  {row.algorithm:<10} T={row.iterations:<3} "
            f"BER={row.ber:.3e} ({row.bit_errors}/{row.bits_total})"
        )
    return rows


# Uplink

def uplink_trial(config: SystemConfig, trial: int, max_workers: int = 1) -> TrialResult:
    """Run every configured detector on one channel realization at every SNR point."""
    cons = constellation(config.modulation)
    U, C, B, Es = config.users, config.clusters, config.antennas, config.es
    H = generate(U, B, config.seed, n_sc=config.n_sc, trial=trial).H
    clustered = partition(H, C)
    bits, s = _payload(config, cons, trial)
    unit_noise = complex_gaussian(stream(config.seed, Stream.NOISE, trial), (config.n_sc, B, config.n_sym))
    clean = H @ s
    r = _box_radius(config, cons)

    cells: TrialResult = {}
    for k, snr_db in enumerate(config.snr_grid_db):
        No = uplink_noise_variance(snr_db, U, Es)
        y = clean + math.sqrt(No) * unit_noise
        known = _channel_knowledge(config, clustered, No, trial)
        y_parts = split_rows(y, C)

        for name in config.algorithms:
            if name in ("mmse", "zf", "mrc"):
                H_known = stack(known)
                if name == "mmse":
                    xhat = mmse_centralized(H_known, y, No, Es)
                elif name == "zf":
                    xhat = zf_centralized_detect(H_known, y)
                else:
                    xhat = mrc_centralized(H_known, y)
                cells[(k, name, 0)] = _tally(bits, xhat, cons, Es, None, config.n_sym)
                continue

            for T in config.iterations:
                runtime = ConsensusRuntime(C, max_workers)
                if name == "admm":
                    params = config.admm.model_copy(update={"t_max": T, "No": No, "Es": Es, "box_radius": r})
                    xhat = admm_detect(known, y_parts, params, runtime)
                    label = uplink_label(name, config.admm.regularizer)
                else:
                    rho = No / Es if config.cg_loading is Regularizer.MMSE else 0.0
                    xhat = cg_detect(known, y_parts, rho, T, runtime)
                    label = name
                cells[(k, label, T)] = _tally(bits, xhat, cons, Es, runtime, config.n_sym)
    return cells


def run_uplink_sweep(
    config: SystemConfig,
    max_workers: Optional[int] = None,
    trial_workers: Optional[int] = None,
) -> List[BerRow]:
    """Uplink BER of every configured detector over the SNR grid."""
    if config.n_sym == 0:
        logger.info("No data symbols requested; uplink sweep is empty")
        return []
    workers = max_workers or settings.max_workers
    with PerformanceTimer("sweep.uplink", {"trials": config.trials}):
        cells = TrialWorker(trial_workers).run_trials(lambda t: uplink_trial(config, t, workers), config.trials)
    return _rows_from_cells(config, cells)


# Downlink

def downlink_trial(config: SystemConfig, trial: int, max_workers: int = 1) -> TrialResult:
    """Run every configured precoder on one channel realization at every SNR point."""
    cons = constellation(config.modulation)
    U, C, B, Es = config.users, config.clusters, config.antennas, config.es
    H = generate(U, B, config.seed, n_sc=config.n_sc, trial=trial).H
    clustered = partition(H, C)
    true_dl = downlink(clustered)
    bits, s = _payload(config, cons, trial)
    unit_noise = complex_gaussian(stream(config.seed, Stream.DOWNLINK_NOISE, trial), (config.n_sc, U, config.n_sym))
    perfect = CsiMode(config.csi) is CsiMode.PERFECT

    cells: TrialResult = {}
    cached: Dict[Tuple[str, int], Tuple[np.ndarray, Optional[ConsensusRuntime]]] = {}
    for k, snr_db in enumerate(config.snr_grid_db):
        No = downlink_noise_variance(snr_db, Es)
        noise = math.sqrt(No) * unit_noise
        known_dl = downlink(_channel_knowledge(config, clustered, No, trial))

        for name in config.downlink_algorithms:
            label = downlink_label(name)
            counts = [0] if name == "zf" else config.iterations
            for T in counts:
                if perfect and (label, T) in cached:
                    y_clean, runtime = cached[(label, T)]
                else:
                    if name == "zf":
                        runtime = None
                        x = zf_centralized(stack(known_dl), s)
                        y_clean = stack(true_dl) @ x
                    else:
                        runtime = ConsensusRuntime(C, max_workers)
                        params = config.beamforming.model_copy(update={"t_max": T})
                        x_parts = admm_beamform(known_dl, s, params, runtime)
                        y_clean = transmit(true_dl, x_parts)
                    cached[(label, T)] = (y_clean, runtime)
                cells[(k, label, T)] = _tally(bits, y_clean + noise, cons, Es, runtime, config.n_sym)
    return cells


def run_downlink_sweep(
    config: SystemConfig,
    max_workers: Optional[int] = None,
    trial_workers: Optional[int] = None,
) -> List[BerRow]:
    """Downlink BER of every configured precoder over the SNR grid."""
    if config.n_sym == 0:
        logger.info("No data symbols requested; downlink sweep is empty")
        return []
    workers = max_workers or settings.max_workers
    with PerformanceTimer("sweep.downlink", {"trials": config.trials}):
        cells = TrialWorker(trial_workers).run_trials(lambda t: downlink_trial(config, t, workers), config.trials)
    return _rows_from_cells(config, cells)


# Target-BER interpolation

def snr_at_target_ber(rows: Sequence[BerRow], algorithm: str, iterations: int, target: float = 0.01) -> Optional[float]:
    """SNR at which a BER curve first reaches ``target``.

    Interpolates log10(BER) linearly between the bracketing grid points; a zero
    BER counts as half an error. Returns the first grid point when it already
    meets the target and ``None`` when no point does.
    """
    curve = sorted(
        (row for row in rows if row.algorithm == algorithm and row.iterations == iterations),
        key=lambda row: row.snr_db,
    )
    if not curve:
        return None

    def log_ber(row: BerRow) -> float:
        floor = 0.5 / row.bits_total if row.bits_total else 1e-12
        return math.log10(max(row.ber, floor))

    for i, row in enumerate(curve):
        if row.ber <= target:
            if i == 0:
                return row.snr_db
            prev = curve[i - 1]
            lo, hi = log_ber(prev), log_ber(row)
            goal = math.log10(target)
            if hi == lo:
                return row.snr_db
            frac = (lo - goal) / (lo - hi)
            return prev.snr_db + frac * (row.snr_db - prev.snr_db)
    return None
