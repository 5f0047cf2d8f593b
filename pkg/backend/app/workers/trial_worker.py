"""Worker pool for independent Monte-Carlo trials.

Every trial draws its channel, payload bits and noise from streams keyed by the
trial index, so trials share no state and can run in any order. The worker only
has to run them and add up their error counts.

Worker Architecture:
- Trials are submitted to a thread pool of ``settings.trial_workers`` threads
  (one thread runs them inline)
- Per-trial tallies are merged in trial order, so the merged counts do not
  depend on completion order
- A failing trial aborts the sweep; its exception propagates to the caller
  with the trial index logged
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, Hashable, List, Optional

from config import settings

from ..core.performance import PerformanceTimer

logger = logging.getLogger(__name__)


@dataclass
class TrialTally:
    """Bit-error counts and consensus traffic of one (SNR, algorithm, iterations) cell."""
    bit_errors: int = 0
    bits_total: int = 0
    consensus_rounds: int = 0
    consensus_bytes: int = 0

    def add(self, other: "TrialTally") -> None:
        self.bit_errors += other.bit_errors
        self.bits_total += other.bits_total
        # traffic depends only on the dimensions, so every trial reports the same
        self.consensus_rounds = other.consensus_rounds
        self.consensus_bytes = other.consensus_bytes


TrialResult = Dict[Hashable, TrialTally]
TrialFn = Callable[[int], TrialResult]


class TrialWorker:
    """
    Runs ``trial_fn(trial)`` for every trial and merges the per-cell tallies.

    Args:
        workers: thread count; defaults to ``settings.trial_workers``
    """

    def __init__(self, workers: Optional[int] = None):
        self.workers = max(1, workers or settings.trial_workers)

    def _run_one(self, trial_fn: TrialFn, trial: int) -> TrialResult:
        with PerformanceTimer("sweep.trial", {"trial": trial}):
            try:
                return trial_fn(trial)
            except Exception:
                logger.error(f"Trial {trial} failed")
                raise

    def run_trials(self, trial_fn: TrialFn, trials: int) -> TrialResult:
        """Run ``trials`` trials and return the merged tallies."""
        if self.workers == 1:
            results: List[TrialResult] = [self._run_one(trial_fn, t) for t in range(trials)]
        else:
            with ThreadPoolExecutor(max_workers=self.workers) as executor:
                futures = [executor.submit(self._run_one, trial_fn, t) for t in range(trials)]
                results = [future.result() for future in futures]

        merged: TrialResult = {}
        for result in results:
            for key, tally in result.items():
                merged.setdefault(key, TrialTally()).add(tally)
        logger.debug(f"Merged {trials} trials into {len(merged)} cells using {self.workers} worker(s)")
        return merged
