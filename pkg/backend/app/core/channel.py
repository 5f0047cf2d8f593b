"""Synthetic MIMO channels, row-wise antenna clustering and pilot-based estimation.

Channel model:
    Entries are i.i.d. circularly-symmetric complex Gaussian with unit variance
    (Rayleigh fading). Each subcarrier is an independent narrowband realization.

Random streams:
    Every random quantity of an experiment is drawn from a counter-based Philox
    generator seeded by ``SeedSequence(seed, spawn_key=(purpose, *key))``. The
    purpose separates channel, noise, pilot-noise and payload-bit streams; the key
    carries the trial index and, for pilot noise, the cluster index. One seed
    therefore reproduces a whole experiment, and streams never overlap.

Pilots:
    The ``U`` users send a ``U``-slot orthogonal burst built from the unnormalized
    ``U x U`` DFT matrix scaled to per-symbol energy ``Es``. The least-squares
    estimate ``Y P^H / (Es U)`` then has per-entry error variance ``No / (U Es)``.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import List, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, ParameterError, PartitionError

logger = logging.getLogger(__name__)


class Stream(IntEnum):
    """Purpose index of a random stream (first spawn-key entry)."""
    CHANNEL = 0
    NOISE = 1
    PILOT = 2
    BITS = 3
    DOWNLINK_NOISE = 4


class Link(str, Enum):
    UPLINK = "uplink"
    DOWNLINK = "downlink"


def stream(seed: int, purpose: Stream, *key: int) -> np.random.Generator:
    """Return the random generator for ``purpose`` and ``key`` under ``seed``."""
    sequence = np.random.SeedSequence(seed, spawn_key=(int(purpose),) + tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(sequence))


def complex_gaussian(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """Draw circularly-symmetric complex Gaussian samples with the given variance."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """Full uplink channel ``H`` (B x U, or n_sc x B x U) and the seed it came from."""
    H: np.ndarray
    seed: int

    @property
    def antennas(self) -> int:
        return self.H.shape[-2]

    @property
    def users(self) -> int:
        return self.H.shape[-1]


@dataclass(frozen=True, eq=False)
class ClusteredChannel:
    """Channel blocks held by the ``C`` antenna clusters, in cluster order.

    Uplink blocks are ``S x U``; downlink blocks are their transposes (``U x S``).
    A leading subcarrier axis is allowed on every block (``n_sc x S x U``).
    Receive data split with ``split_rows`` is ``(S,)``, ``(S, K)`` or
    ``(n_sc, S, K)`` per cluster.
    """
    clusters: List[np.ndarray]
    link: Link = Link.UPLINK
    _shape: tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.clusters:
            raise PartitionError("a clustered channel needs at least one cluster")
        shape = self.clusters[0].shape
        for block in self.clusters:
            if block.shape != shape:
                raise PartitionError(f"cluster blocks must share one shape, got {block.shape} and {shape}")
        object.__setattr__(self, "_shape", shape)

    @property
    def C(self) -> int:
        return len(self.clusters)

    @property
    def S(self) -> int:
        return self._shape[-2] if self.link is Link.UPLINK else self._shape[-1]

    @property
    def U(self) -> int:
        return self._shape[-1] if self.link is Link.UPLINK else self._shape[-2]

    @property
    def B(self) -> int:
        return self.C * self.S

    @property
    def batch_shape(self) -> tuple:
        return self._shape[:-2]

    def __getitem__(self, c: int) -> np.ndarray:
        return self.clusters[c]

    def __iter__(self):
        return iter(self.clusters)

    def __len__(self) -> int:
        return len(self.clusters)


def generate(U: int, B: int, seed: int, n_sc: Optional[int] = None, trial: int = 0) -> ChannelRealization:
    """Draw an i.i.d. Rayleigh uplink channel ``H`` of shape ``B x U``.

    With ``n_sc`` an independent realization is drawn per subcarrier
    (shape ``n_sc x B x U``). ``trial`` selects an independent channel stream.
    """
    if U < 1:
        raise ConfigurationError("invalid channel dimensions", [f"users must be >= 1, got {U}"])
    if B < U:
        raise ConfigurationError("invalid channel dimensions", [f"antennas B={B} must be >= users U={U}"])
    shape = (B, U) if n_sc is None else (n_sc, B, U)
    H = complex_gaussian(stream(seed, Stream.CHANNEL, trial), shape)
    return ChannelRealization(H=H, seed=seed)


def split_rows(a: np.ndarray, C: int) -> List[np.ndarray]:
    """Split the antenna axis of ``a`` into ``C`` equal, contiguous blocks.

    Accepted shapes:

    - ``(B,)``: one receive vector; axis 0 is split
    - ``(B, K)``: ``K`` receive vectors or a ``B x U`` channel; axis 0 is split
    - ``(n_sc, B, K)``: a subcarrier stack; axis -2 is split

    Any array with two or more axes is split along axis -2, so a stack of
    per-subcarrier vectors must be passed as ``(n_sc, B, 1)``, not ``(n_sc, B)``.
    """
    a = np.asarray(a)
    if a.ndim == 0:
        raise PartitionError("cannot split a scalar into antenna clusters")
    axis = a.ndim - 2 if a.ndim >= 2 else 0
    rows = a.shape[axis]
    if C < 1 or rows % C != 0:
        raise PartitionError(f"cannot split {rows} antennas into {C} equal clusters")
    return [block.copy() for block in np.split(a, C, axis=axis)]


def partition(H: np.ndarray, C: int) -> ClusteredChannel:
    """Split the rows of ``H`` into ``C`` equal, contiguous antenna clusters."""
    return ClusteredChannel(clusters=split_rows(H, C), link=Link.UPLINK)


def stack(clustered: ClusteredChannel) -> np.ndarray:
    """Reassemble the full channel: ``B x U`` from uplink blocks, ``U x B`` from downlink blocks."""
    if clustered.link is Link.UPLINK:
        return np.concatenate(clustered.clusters, axis=-2)
    return np.concatenate(clustered.clusters, axis=-1)


def downlink(clustered: ClusteredChannel) -> ClusteredChannel:
    """Return the reciprocal downlink blocks ``H_c^d = (H_c^u)^T``."""
    if clustered.link is Link.DOWNLINK:
        return clustered
    blocks = [np.swapaxes(block, -1, -2).copy() for block in clustered.clusters]
    return ClusteredChannel(clusters=blocks, link=Link.DOWNLINK)


def pilot_matrix(U: int, Es: float) -> np.ndarray:
    """Orthogonal ``U``-slot pilot burst: unnormalized DFT scaled to energy ``Es``."""
    k = np.arange(U)
    return np.sqrt(Es) * np.exp(-2j * np.pi * np.outer(k, k) / U)


def pilot_estimate(H_c: np.ndarray, No: float, Es: float, seed: int, key: Sequence[int] = ()) -> np.ndarray:
    """Least-squares estimate of a cluster channel from one orthogonal pilot burst.

    Returns ``H_c`` plus estimation error with per-entry variance ``No / (U Es)``.
    Noiseless pilots (``No == 0``) return ``H_c`` unchanged.
    """
    if No < 0:
        raise ParameterError(f"noise variance must be nonnegative, got {No}")
    if not Es > 0:
        raise ParameterError(f"symbol energy must be positive, got {Es}")
    H_c = np.asarray(H_c, dtype=np.complex128)
    if No == 0:
        return H_c.copy()
    U = H_c.shape[-1]
    P = pilot_matrix(U, Es)
    noise = complex_gaussian(stream(seed, Stream.PILOT, *key), H_c.shape, No)
    received = H_c @ P + noise
    return received @ P.conj().T / (Es * U)


def estimate_clusters(clustered: ClusteredChannel, No: float, Es: float, seed: int, trial: int = 0) -> ClusteredChannel:
    """Pilot-estimate every cluster with its own pilot-noise stream."""
    blocks = [
        pilot_estimate(block, No, Es, seed, key=(trial, c))
        for c, block in enumerate(clustered.clusters)
    ]
    logger.debug(f"Estimated {clustered.C} cluster channels (No={No:.3g}, trial={trial})")
    return ClusteredChannel(clusters=blocks, link=clustered.link)
