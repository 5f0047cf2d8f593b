"""Test configuration and shared fixtures for the DBP simulator."""

import numpy as np
import pytest

from schemas import SystemConfig
from app.core.channel import complex_gaussian, generate, partition


@pytest.fixture
def rng():
    """Seeded generator for ad-hoc test data."""
    return np.random.default_rng(20240611)


@pytest.fixture
def small_channel():
    """Uplink channel with U=4 users and B=8 antennas."""
    return generate(4, 8, seed=7).H


@pytest.fixture
def clustered_small(small_channel):
    """``small_channel`` split into C=2 clusters of S=4 antennas."""
    return partition(small_channel, 2)


@pytest.fixture
def random_uplink(rng):
    """Factory for a random ``(H, s, y)`` uplink instance."""
    def make(U: int, B: int, No: float = 0.1):
        H = complex_gaussian(rng, (B, U))
        s = complex_gaussian(rng, (U,))
        y = H @ s + complex_gaussian(rng, (B,), No)
        return H, s, y
    return make


@pytest.fixture
def tiny_config():
    """Small, fast experiment used by harness and CLI tests."""
    return SystemConfig(
        users=4,
        clusters=2,
        antennas_per_cluster=4,
        modulation="qpsk",
        snr_grid_db=[0.0, 10.0],
        trials=2,
        n_sc=2,
        n_sym=3,
        algorithms=["mmse", "zf", "mrc", "admm", "cg"],
        downlink_algorithms=["zf", "admm"],
        iterations=[1, 2],
        seed=3,
    )


@pytest.fixture
def output_dir(tmp_path):
    """Temporary directory for CSV reports."""
    path = tmp_path / "reports"
    path.mkdir()
    return path
