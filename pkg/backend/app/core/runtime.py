"""Simulated decentralized execution: cluster workers, fusion-node consensus, traffic accounting.

Execution model:
    Every cluster runs a *program*: a generator function closed over its own
    ``ClusterContext``. Each ``yield`` hands a local vector to the fusion node and
    suspends the cluster until the consensus round completes; the generator then
    receives the summed vector. A round is a full barrier: the runtime advances
    every cluster to its next ``yield`` (in parallel on a thread pool, or
    sequentially when ``max_workers == 1``), sums the contributions on the fusion
    node in fixed cluster order 0..C-1, and broadcasts the result.

    Because the reduction order is a pure function of ``C``, outputs do not depend
    on worker count or on the order in which clusters are advanced.

Isolation:
    ``ClusterContext`` refuses reads and writes from any worker that is currently
    executing a different cluster, so the only data crossing cluster boundaries is
    what passes through ``allreduce_sum``.

Traffic accounting:
    Each round gathers one vector from every cluster and delivers the sum back to
    every cluster. ``gathered_complex`` and ``broadcast_complex`` count complex
    scalars; ``bytes_total`` is the upstream payload at 16 bytes per
    double-precision complex scalar.
"""

import logging
import random
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Generator, List, Optional, Sequence

import numpy as np

from .errors import ContractViolationError, DimensionError

logger = logging.getLogger(__name__)

BYTES_PER_COMPLEX = 16

ClusterProgram = Callable[[], Generator[np.ndarray, np.ndarray, Any]]

_active = threading.local()


def _active_cluster() -> Optional[int]:
    return getattr(_active, "cluster", None)


@dataclass
class ConsensusRecord:
    """Cumulative consensus traffic of one runtime."""
    rounds: int = 0
    gathered_complex: int = 0
    broadcast_complex: int = 0
    round_sizes: List[int] = field(default_factory=list)

    @property
    def bytes_total(self) -> int:
        return BYTES_PER_COMPLEX * self.gathered_complex

    @property
    def bytes_broadcast(self) -> int:
        return BYTES_PER_COMPLEX * self.broadcast_complex

    def add_round(self, clusters: int, length: int) -> None:
        self.rounds += 1
        self.gathered_complex += clusters * length
        self.broadcast_complex += clusters * length
        self.round_sizes.append(length)

    def merge(self, other: "ConsensusRecord") -> None:
        self.rounds += other.rounds
        self.gathered_complex += other.gathered_complex
        self.broadcast_complex += other.broadcast_complex
        self.round_sizes.extend(other.round_sizes)

    def as_dict(self) -> Dict[str, int]:
        return {
            "rounds": self.rounds,
            "gathered_complex": self.gathered_complex,
            "broadcast_complex": self.broadcast_complex,
            "bytes_total": self.bytes_total,
        }


class ClusterContext:
    """Cluster-local state (channel block, receive data, iterates).

    Only the cluster that owns the context may touch it while programs run;
    the coordinating thread may read it before and after a run.
    """

    def __init__(self, index: int, **local: Any):
        self._index = index
        self._data: Dict[str, Any] = dict(local)

    @property
    def index(self) -> int:
        return self._index

    def _check_owner(self, key: str) -> None:
        active = _active_cluster()
        if active is not None and active != self._index:
            raise ContractViolationError(
                f"cluster {active} accessed '{key}' of cluster {self._index} outside consensus"
            )

    def __getitem__(self, key: str) -> Any:
        self._check_owner(key)
        return self._data[key]

    def __setitem__(self, key: str, value: Any) -> None:
        self._check_owner(key)
        self._data[key] = value

    def __contains__(self, key: str) -> bool:
        return key in self._data

    def get(self, key: str, default: Any = None) -> Any:
        self._check_owner(key)
        return self._data.get(key, default)


class ConsensusRuntime:
    """Fusion node plus the worker pool that advances cluster programs."""

    def __init__(self, C: int, max_workers: int = 1, schedule_seed: Optional[int] = None):
        if C < 1:
            raise DimensionError(f"runtime needs at least one cluster, got {C}")
        self.C = C
        self.max_workers = max(1, min(max_workers, C))
        self.schedule_seed = schedule_seed
        self.record = ConsensusRecord()
        self._lock = threading.Lock()

    @property
    def reduction_order(self) -> tuple:
        return tuple(range(self.C))

    def reset(self) -> ConsensusRecord:
        """Start a fresh record and return the previous one."""
        with self._lock:
            previous, self.record = self.record, ConsensusRecord()
        return previous

    def allreduce_sum(self, locals_: Sequence[np.ndarray]) -> np.ndarray:
        """Sum one vector per cluster in fixed cluster order and account the round."""
        if len(locals_) != self.C:
            raise DimensionError(f"expected {self.C} local vectors, got {len(locals_)}")
        shape = np.shape(locals_[0])
        for c, vector in enumerate(locals_):
            if np.shape(vector) != shape:
                raise DimensionError(f"cluster {c} sent shape {np.shape(vector)}, expected {shape}")
        total = np.array(locals_[self.reduction_order[0]], dtype=np.complex128, copy=True)
        for c in self.reduction_order[1:]:
            total += locals_[c]
        with self._lock:
            self.record.add_round(self.C, total.size)
        logger.debug(f"Consensus round {self.record.rounds}: {self.C} x {total.size} complex values")
        return total

    def run_decentralized(self, programs: Sequence[ClusterProgram]) -> List[Any]:
        """Run one program per cluster to completion and return their outputs.

        ``programs[c]`` is cluster ``c``'s closure; calling it must return a
        generator whose yields are its consensus contributions.
        """
        if len(programs) != self.C:
            raise DimensionError(f"expected {self.C} cluster programs, got {len(programs)}")
        generators: List[Optional[Generator]] = [None] * self.C
        inbox: List[Optional[np.ndarray]] = [None] * self.C
        shuffler = random.Random(self.schedule_seed) if self.schedule_seed is not None else None

        def advance(c: int):
            _active.cluster = c
            try:
                if generators[c] is None:
                    generators[c] = programs[c]()
                    return "yield", next(generators[c])
                return "yield", generators[c].send(inbox[c])
            except StopIteration as stop:
                return "done", stop.value
            finally:
                _active.cluster = None

        executor = ThreadPoolExecutor(max_workers=self.max_workers) if self.max_workers > 1 else None
        try:
            while True:
                order = list(range(self.C))
                if shuffler is not None:
                    shuffler.shuffle(order)
                if executor is None:
                    stepped = {c: advance(c) for c in order}
                else:
                    futures = {c: executor.submit(advance, c) for c in order}
                    stepped = {c: futures[c].result() for c in order}
                kinds = {stepped[c][0] for c in range(self.C)}
                if kinds == {"done"}:
                    return [stepped[c][1] for c in range(self.C)]
                if len(kinds) > 1:
                    raise ContractViolationError("clusters disagree on the number of consensus rounds")
                total = self.allreduce_sum([stepped[c][1] for c in range(self.C)])
                for c in range(self.C):
                    inbox[c] = total.copy()
        finally:
            if executor is not None:
                executor.shutdown(wait=True)


def run_decentralized(programs: Sequence[ClusterProgram], runtime: ConsensusRuntime) -> List[Any]:
    """Module-level form of ``ConsensusRuntime.run_decentralized``."""
    return runtime.run_decentralized(programs)


_ROUNDS = {
    "admm-ul": lambda T: T,
    "cg-ul": lambda T: T + 1,
    "admm-dl": lambda T: T - 1,
}


def predicted_traffic(algorithm: str, U: int, C: int, n_sc: int, T: int, n_sym: int = 1) -> ConsensusRecord:
    """Traffic a decentralized run should record: U*n_sc*n_sym values per cluster per round."""
    try:
        rounds = _ROUNDS[algorithm.lower()](T)
    except KeyError as exc:
        raise DimensionError(f"no traffic model for algorithm '{algorithm}'") from exc
    record = ConsensusRecord()
    for _ in range(rounds):
        record.add_round(C, U * n_sc * n_sym)
    return record
