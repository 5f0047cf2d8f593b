"""Gray-coded BPSK/QAM mapping, hard slicing and bit-error counting.

Square QAM is built from two independent Gray-coded PAM axes: the first half of
every bit group labels the in-phase level, the second half the quadrature level,
most significant bit first. Level ``k`` (counted from the most negative) carries
the Gray label ``k ^ (k >> 1)``, so for 16-QAM the axis map is
00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3 before scaling by 1/sqrt(10).
All constellations are scaled to unit mean energy (Es = 1).

Slicing picks the nearest level per axis, which is the Euclidean nearest point
for square constellations; ties go to the more negative coordinate.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from .errors import FramingError


class Modulation(str, Enum):
    BPSK = "bpsk"
    QPSK = "qpsk"
    QAM16 = "16qam"
    QAM64 = "64qam"


_BITS_PER_AXIS = {
    Modulation.BPSK: 1,
    Modulation.QPSK: 1,
    Modulation.QAM16: 2,
    Modulation.QAM64: 3,
}


@dataclass(frozen=True, eq=False)
class Constellation:
    """Gray-labelled constellation with unit mean energy.

    ``points[i]`` is the symbol carrying the bit label ``i`` (MSB first).
    ``box_radius`` is the largest per-axis coordinate, i.e. the radius of the
    hypercube that covers the constellation.
    """
    scheme: Modulation
    points: np.ndarray
    bits_per_symbol: int
    box_radius: float
    levels_per_axis: int
    scale: float

    @property
    def is_real(self) -> bool:
        return self.scheme is Modulation.BPSK

    @property
    def bits_per_axis(self) -> int:
        return _BITS_PER_AXIS[self.scheme]


def _gray(k: np.ndarray) -> np.ndarray:
    return k ^ (k >> 1)


def _inverse_gray(bits_per_axis: int) -> np.ndarray:
    levels = 1 << bits_per_axis
    table = np.empty(levels, dtype=np.int64)
    table[_gray(np.arange(levels))] = np.arange(levels)
    return table


def constellation(scheme) -> Constellation:
    """Build the constellation for ``scheme`` (name or ``Modulation``)."""
    scheme = Modulation(scheme)
    per_axis = _BITS_PER_AXIS[scheme]
    levels = 1 << per_axis
    if scheme is Modulation.BPSK:
        scale = 1.0
        bits_per_symbol = 1
    else:
        scale = float(np.sqrt(3.0 / (2.0 * (levels ** 2 - 1))))
        bits_per_symbol = 2 * per_axis
    cons = Constellation(
        scheme=scheme,
        points=np.empty(0, dtype=np.complex128),
        bits_per_symbol=bits_per_symbol,
        box_radius=(levels - 1) * scale,
        levels_per_axis=levels,
        scale=scale,
    )
    labels = np.arange(1 << bits_per_symbol)
    label_bits = (labels[:, None] >> np.arange(bits_per_symbol - 1, -1, -1)) & 1
    object.__setattr__(cons, "points", map_bits(label_bits.reshape(-1), cons))
    return cons


def _axis_values(bits: np.ndarray, cons: Constellation) -> np.ndarray:
    """Map groups of ``bits_per_axis`` bits (last axis) to scaled PAM levels."""
    weights = 1 << np.arange(cons.bits_per_axis - 1, -1, -1)
    label = bits @ weights
    k = _inverse_gray(cons.bits_per_axis)[label]
    return (2 * k - (cons.levels_per_axis - 1)) * cons.scale


def map_bits(bits, cons: Constellation) -> np.ndarray:
    """Map a bit array to symbols; the last axis is grouped into symbols."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.ndim == 0 or bits.shape[-1] % cons.bits_per_symbol != 0:
        raise FramingError(
            f"{bits.shape[-1] if bits.ndim else 0} bits cannot be framed into "
            f"{cons.bits_per_symbol}-bit {cons.scheme.value} symbols"
        )
    groups = bits.reshape(bits.shape[:-1] + (-1, cons.bits_per_symbol))
    if cons.is_real:
        return _axis_values(groups, cons).astype(np.complex128)
    half = cons.bits_per_axis
    real = _axis_values(groups[..., :half], cons)
    imag = _axis_values(groups[..., half:], cons)
    return real + 1j * imag


def _axis_index(values: np.ndarray, cons: Constellation) -> np.ndarray:
    position = (values / cons.scale + (cons.levels_per_axis - 1)) / 2.0
    k = np.ceil(position - 0.5).astype(np.int64)
    return np.clip(k, 0, cons.levels_per_axis - 1)


def _level(k: np.ndarray, cons: Constellation) -> np.ndarray:
    return (2 * k - (cons.levels_per_axis - 1)) * cons.scale


def slice_symbols(xhat, cons: Constellation) -> np.ndarray:
    """Replace every entry by its nearest constellation point."""
    xhat = np.asarray(xhat, dtype=np.complex128)
    real = _level(_axis_index(xhat.real, cons), cons)
    if cons.is_real:
        return real.astype(np.complex128)
    imag = _level(_axis_index(xhat.imag, cons), cons)
    return real + 1j * imag


def _axis_bits(k: np.ndarray, cons: Constellation) -> np.ndarray:
    label = _gray(k)
    shifts = np.arange(cons.bits_per_axis - 1, -1, -1)
    return (label[..., None] >> shifts) & 1


def demap(xhat, cons: Constellation) -> np.ndarray:
    """Hard-decision bits for ``xhat``; symbols expand along the last axis."""
    xhat = np.asarray(xhat, dtype=np.complex128)
    bits = _axis_bits(_axis_index(xhat.real, cons), cons)
    if not cons.is_real:
        bits = np.concatenate([bits, _axis_bits(_axis_index(xhat.imag, cons), cons)], axis=-1)
    return bits.reshape(xhat.shape[:-1] + (-1,)).astype(np.int8) if xhat.ndim else bits.astype(np.int8)


def random_bits(shape, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 2, size=shape, dtype=np.int8)


def count_errors(tx_bits, rx_bits) -> Tuple[int, int]:
    """Return ``(bit_errors, bits_total)`` between two equally long streams."""
    tx = np.asarray(tx_bits).reshape(-1)
    rx = np.asarray(rx_bits).reshape(-1)
    if tx.size != rx.size:
        raise FramingError(f"bit streams differ in length: {tx.size} vs {rx.size}")
    return int(np.count_nonzero(tx != rx)), int(tx.size)
