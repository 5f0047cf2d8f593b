"""
End-to-end checks of the decentralized algorithms against their centralized
counterparts, plus the BER behaviour of full Monte-Carlo sweeps.

The Monte-Carlo checks run 10^5 bits per SNR point and are marked ``slow``;
deselect them with ``pytest -m "not slow"``.
"""

import numpy as np
import pytest

from schemas import SystemConfig
from app.core.channel import complex_gaussian, downlink, partition, split_rows
from app.core.numeric import herm
from app.core.runtime import ConsensusRuntime, predicted_traffic
from app.schemas.params import AdmmParams, BfParams, InverseMode, Regularizer
from app.services.beamformer import admm_beamform, bf_preprocess, transmit, zf_centralized
from app.services.detector import (
    admm_detect,
    admm_preprocess,
    admm_z_update,
    cg_detect,
    mmse_centralized,
)
from app.services.harness import run_downlink_sweep, run_uplink_sweep, snr_at_target_ber

SCHEDULES = [(2, 0), (4, 1), (8, 7)]


def _relative_error(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def _uplink_instance(rng, U, B, No):
    H = complex_gaussian(rng, (B, U))
    y = H @ complex_gaussian(rng, (U,)) + complex_gaussian(rng, (B,), No)
    return H, y


class TestAdmmDetectionOracle:
    """Decentralized ADMM converges to the centralized MMSE estimate."""

    def test_fifty_instances(self, rng):
        No = 0.1
        params = AdmmParams(rho=1.0, gamma=1.0, t_max=200, regularizer=Regularizer.MMSE, No=No, Es=1.0)
        for _ in range(50):
            H, y = _uplink_instance(rng, 8, 32, No)
            s = admm_detect(partition(H, 4), split_rows(y, 4), params, ConsensusRuntime(4))
            assert _relative_error(s, mmse_centralized(H, y, No)) <= 1e-5


class TestCgDetectionOracle:
    """Decentralized CG after U iterations equals the direct solve."""

    def test_fifty_instances(self, rng):
        rho = 0.1
        for _ in range(50):
            H, y = _uplink_instance(rng, 8, 32, rho)
            expected = np.linalg.solve(herm(H) @ H + rho * np.eye(8), herm(H) @ y)
            x = cg_detect(partition(H, 4), split_rows(y, 4), rho, 8, ConsensusRuntime(4))
            assert _relative_error(x, expected) <= 1e-7


class TestAdmmBeamformingOracle:
    """Decentralized ADMM precoding converges to centralized ZF."""

    def test_fifty_instances(self, rng):
        params = BfParams(rho=1.0, gamma=1.0, t_max=300, epsilon=0.0)
        for _ in range(50):
            clusters = downlink(partition(complex_gaussian(rng, (32, 8)), 4))
            s = complex_gaussian(rng, (8,))
            x_parts = admm_beamform(clusters, s, params, ConsensusRuntime(4))
            x_zf = zf_centralized(np.concatenate(clusters.clusters, axis=-1), s)
            assert _relative_error(np.concatenate(x_parts), x_zf) <= 1e-3
            assert _relative_error(transmit(clusters, x_parts), s) <= 1e-3


class TestInverseModes:
    """Both inverse branches give the same iterates for S < U, S = U and S > U."""

    @pytest.mark.parametrize("S, U", [(4, 8), (8, 8), (16, 8)])
    def test_detection_branches(self, rng, S, U):
        for _ in range(100):
            rho = rng.uniform(0.5, 2.0)
            H_c = complex_gaussian(rng, (S, U))
            y_c = complex_gaussian(rng, (S,))
            sxs = admm_preprocess(H_c, y_c, rho, InverseMode.SXS)
            uxu = admm_preprocess(H_c, y_c, rho, InverseMode.UXU)
            assert np.allclose(sxs.y_reg, uxu.y_reg, atol=1e-8, rtol=0)
            d = complex_gaussian(rng, (U,))
            assert np.allclose(admm_z_update(sxs, d), admm_z_update(uxu, d), atol=1e-8, rtol=0)

    @pytest.mark.parametrize("S, U", [(4, 8), (8, 8), (16, 8)])
    def test_beamforming_branches(self, rng, S, U):
        C = 4
        for _ in range(100):
            params = BfParams(rho=rng.uniform(0.5, 2.0))
            H_c = complex_gaussian(rng, (U, S))
            s = complex_gaussian(rng, (U,))
            sxs = bf_preprocess(H_c, s, params, C=C, B=C * S, U=U, mode=InverseMode.SXS)
            uxu = bf_preprocess(H_c, s, params, C=C, B=C * S, U=U, mode=InverseMode.UXU)
            assert np.allclose(sxs.x, uxu.x, atol=1e-8, rtol=0)


class TestScheduleIndependence:
    """Worker count and scheduling order never change a single bit of the output."""

    U, B = 8, 32

    def _check(self, C, run):
        reference = run(ConsensusRuntime(C))
        for workers, seed in SCHEDULES:
            out = run(ConsensusRuntime(C, max_workers=workers, schedule_seed=seed))
            if isinstance(reference, list):
                for a, b in zip(reference, out):
                    assert np.array_equal(a, b)
            else:
                assert np.array_equal(reference, out)

    @pytest.mark.parametrize("C", [1, 2, 4, 8])
    @pytest.mark.parametrize("regularizer", [Regularizer.MMSE, Regularizer.ZF, Regularizer.BOX])
    def test_admm_detection(self, rng, C, regularizer):
        H, y = _uplink_instance(rng, self.U, self.B, 0.1)
        clusters, y_parts = partition(H, C), split_rows(y, C)
        params = AdmmParams(t_max=5, regularizer=regularizer, No=0.1, box_radius=1.0)
        self._check(C, lambda runtime: admm_detect(clusters, y_parts, params, runtime))

    @pytest.mark.parametrize("C", [1, 2, 4, 8])
    def test_cg_detection(self, rng, C):
        H, y = _uplink_instance(rng, self.U, self.B, 0.1)
        clusters, y_parts = partition(H, C), split_rows(y, C)
        self._check(C, lambda runtime: cg_detect(clusters, y_parts, 0.1, 5, runtime))

    @pytest.mark.parametrize("C", [1, 2, 4, 8])
    def test_admm_beamforming(self, rng, C):
        clusters = downlink(partition(complex_gaussian(rng, (self.B, self.U)), C))
        s = complex_gaussian(rng, (self.U, 3))
        params = BfParams(t_max=5, epsilon=0.1)
        self._check(C, lambda runtime: admm_beamform(clusters, s, params, runtime))

    def test_sweeps(self, tiny_config):
        config = tiny_config.model_copy(update={"clusters": 4, "antennas_per_cluster": 2})
        assert run_uplink_sweep(config, max_workers=4) == run_uplink_sweep(config, max_workers=1)
        assert run_downlink_sweep(config, max_workers=4) == run_downlink_sweep(config, max_workers=1)


class TestConsensusBandwidth:
    """Gathered entries are U per subcarrier, cluster and iteration."""

    def test_admm_detection_traffic(self, rng):
        H = complex_gaussian(rng, (100, 64, 16))
        y = complex_gaussian(rng, (100, 64))
        runtime = ConsensusRuntime(8)
        admm_detect(partition(H, 8), split_rows(y[..., None], 8), AdmmParams(t_max=5, No=0.1), runtime)
        assert runtime.record.rounds == 5
        assert runtime.record.gathered_complex == 5 * 8 * 16 * 100 == 64000
        assert runtime.record == predicted_traffic("admm-ul", U=16, C=8, n_sc=100, T=5)


@pytest.fixture(scope="module")
def near_mmse_rows():
    """Uplink sweep with U=16, S=8, C=8, 16-QAM at 102400 bits per SNR point."""
    config = SystemConfig(
        users=16, clusters=8, antennas_per_cluster=8, modulation="16qam",
        snr_grid_db=[float(snr) for snr in range(0, 22, 2)],
        trials=10, n_sc=20, n_sym=8,
        algorithms=["mmse", "admm", "cg"], iterations=[3, 5, 10], seed=1,
    )
    return run_uplink_sweep(config)


def _gaps(rows, label, counts):
    """SNR penalty at 1% BER relative to centralized MMSE, per iteration count."""
    mmse = snr_at_target_ber(rows, "mmse", 0, 0.01)
    assert mmse is not None
    gaps = {}
    for T in counts:
        snr = snr_at_target_ber(rows, label, T, 0.01)
        assert snr is not None
        gaps[T] = snr - mmse
    return gaps


@pytest.mark.slow
class TestMonteCarloBer:
    """BER sweeps at 10^5 bits per SNR point on i.i.d. Rayleigh channels."""

    @pytest.mark.xfail(
        strict=True,
        reason="on i.i.d. Rayleigh with S < U, three iterations leave about 3.5 dB (ADMM) "
               "and 1.5 dB (CG) to MMSE at 1% BER",
    )
    def test_three_iterations_within_one_db(self, near_mmse_rows):
        assert near_mmse_rows[0].bits_total >= 100_000
        for label in ("admm-mmse", "cg"):
            assert abs(_gaps(near_mmse_rows, label, [3])[3]) <= 1.0

    def test_admm_gap_shrinks_with_iterations(self, near_mmse_rows):
        gaps = _gaps(near_mmse_rows, "admm-mmse", [3, 5, 10])
        assert gaps[3] > gaps[5] > gaps[10]
        assert gaps[10] <= 1.0

    def test_cg_gap_shrinks_with_iterations(self, near_mmse_rows):
        gaps = _gaps(near_mmse_rows, "cg", [3, 5, 10])
        assert gaps[3] > gaps[5]
        assert gaps[5] <= 1.0
        assert abs(gaps[10]) <= 0.5

    def test_single_iteration_beamforming(self):
        config = SystemConfig(
            users=16, clusters=8, antennas_per_cluster=32, modulation="16qam",
            snr_grid_db=[0.0, 5.0, 10.0], trials=20, n_sc=10, n_sym=8,
            downlink_algorithms=["admm"], iterations=[1], seed=2,
        )
        rows = run_downlink_sweep(config)
        assert [row.snr_db for row in rows] == [0.0, 5.0, 10.0]
        assert all(row.bits_total >= 100_000 for row in rows)
        assert all(row.consensus_rounds == 0 and row.consensus_bytes == 0 for row in rows)
        assert rows[0].ber > rows[1].ber > rows[2].ber
