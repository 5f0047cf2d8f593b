"""
Unit tests for Gray mapping, slicing, demapping and bit-error counting.
"""

import numpy as np
import pytest

from app.core.errors import FramingError
from app.core.modem import Modulation, constellation, count_errors, demap, map_bits, random_bits, slice_symbols


class TestConstellation:
    """Test suite for constellation construction."""

    @pytest.mark.parametrize("scheme", list(Modulation))
    def test_unit_mean_energy(self, scheme):
        cons = constellation(scheme)
        assert np.isclose(np.mean(np.abs(cons.points) ** 2), 1.0, atol=1e-12)
        assert len(cons.points) == 2 ** cons.bits_per_symbol

    def test_box_radius(self):
        assert np.isclose(constellation("16qam").box_radius, 3 / np.sqrt(10))
        assert np.isclose(constellation("64qam").box_radius, 7 / np.sqrt(42))
        assert constellation("bpsk").box_radius == 1.0

    def test_neighbours_differ_in_one_bit(self):
        """Adjacent 16-QAM levels on one axis carry Gray labels."""
        cons = constellation("16qam")
        levels = np.array([-3, -1, 1, 3]) / np.sqrt(10)
        labels = [demap(np.array([level + 1j * levels[0]]), cons)[:2] for level in levels]
        for a, b in zip(labels, labels[1:]):
            assert np.sum(a != b) == 1


class TestMapBits:
    """Test suite for map_bits."""

    def test_16qam_convention(self):
        cons = constellation(Modulation.QAM16)
        symbol = map_bits(np.array([1, 0, 1, 0]), cons)
        assert np.allclose(symbol, [(3 + 3j) / np.sqrt(10)])

    def test_bpsk_convention(self):
        cons = constellation("bpsk")
        assert np.allclose(map_bits(np.array([0, 1]), cons), [-1, 1])

    def test_framing_error(self):
        with pytest.raises(FramingError):
            map_bits(np.array([1, 0, 1]), constellation("16qam"))

    def test_last_axis_is_grouped(self):
        cons = constellation("qpsk")
        bits = np.zeros((2, 3, 8), dtype=np.int8)
        assert map_bits(bits, cons).shape == (2, 3, 4)


class TestSlice:
    """Test suite for nearest-point slicing."""

    def test_points_are_fixed(self):
        cons = constellation("64qam")
        assert np.allclose(slice_symbols(cons.points, cons), cons.points, atol=1e-12)

    def test_origin_tie_breaks_negative(self):
        cons = constellation("16qam")
        assert np.allclose(slice_symbols(np.array([0j]), cons), [(-1 - 1j) / np.sqrt(10)])

    def test_matches_exhaustive_search(self, rng):
        cons = constellation("16qam")
        x = 1.5 * (rng.standard_normal(10_000) + 1j * rng.standard_normal(10_000))
        nearest = cons.points[np.argmin(np.abs(x[:, None] - cons.points[None, :]), axis=1)]
        assert np.allclose(slice_symbols(x, cons), nearest)

    def test_bpsk_slices_real_axis(self):
        cons = constellation("bpsk")
        assert np.allclose(slice_symbols(np.array([0.3 + 2j, -0.2 - 1j]), cons), [1, -1])


class TestDemap:
    """Test suite for demap and the noiseless round trip."""

    @pytest.mark.parametrize("scheme", list(Modulation))
    def test_round_trip(self, scheme, rng):
        cons = constellation(scheme)
        bits = random_bits((3, 5, 4 * cons.bits_per_symbol), rng)
        assert np.array_equal(demap(map_bits(bits, cons), cons), bits)

    def test_demap_of_sliced_equals_demap(self, rng):
        cons = constellation("16qam")
        x = rng.standard_normal(100) + 1j * rng.standard_normal(100)
        assert np.array_equal(demap(slice_symbols(x, cons), cons), demap(x, cons))


class TestCountErrors:
    """Test suite for count_errors."""

    def test_identical(self):
        bits = np.array([0, 1, 1, 0])
        assert count_errors(bits, bits) == (0, 4)

    def test_complemented(self):
        bits = np.array([0, 1, 1, 0])
        assert count_errors(bits, 1 - bits) == (4, 4)

    def test_single_flip(self):
        tx = np.zeros(100, dtype=np.int8)
        rx = tx.copy()
        rx[42] = 1
        assert count_errors(tx, rx) == (1, 100)

    def test_length_mismatch_raises(self):
        with pytest.raises(FramingError):
            count_errors(np.zeros(3), np.zeros(4))
