"""
Unit tests for the simulated consensus runtime and its traffic accounting.
"""

import numpy as np
import pytest

from app.core.errors import ContractViolationError, DimensionError
from app.core.runtime import (
    BYTES_PER_COMPLEX,
    ClusterContext,
    ConsensusRecord,
    ConsensusRuntime,
    predicted_traffic,
    run_decentralized,
)


class TestAllreduceSum:
    """Test suite for allreduce_sum."""

    def setup_method(self):
        """Set up test fixtures."""
        self.runtime = ConsensusRuntime(8)

    def test_single_cluster_returns_input(self):
        runtime = ConsensusRuntime(1)
        v = np.array([1 + 2j, 3 - 1j])
        out = runtime.allreduce_sum([v])
        assert np.array_equal(out, v)
        assert out is not v

    def test_round_accounting(self):
        """One round with C=8, U=16 gathers 128 values and delivers 16 per cluster."""
        locals_ = [np.ones(16, dtype=complex) * c for c in range(8)]
        total = self.runtime.allreduce_sum(locals_)
        assert np.array_equal(total, np.full(16, 28, dtype=complex))
        record = self.runtime.record
        assert record.rounds == 1
        assert record.gathered_complex == 128
        assert record.broadcast_complex // 8 == 16
        assert record.bytes_total == 128 * BYTES_PER_COMPLEX

    def test_fixed_reduction_order(self, rng):
        locals_ = [rng.standard_normal(5) + 1j * rng.standard_normal(5) for _ in range(8)]
        a = self.runtime.allreduce_sum(locals_)
        b = ConsensusRuntime(8, max_workers=4, schedule_seed=3).allreduce_sum(locals_)
        assert np.array_equal(a, b)

    def test_wrong_count_raises(self):
        with pytest.raises(DimensionError):
            self.runtime.allreduce_sum([np.zeros(2)] * 7)

    def test_shape_mismatch_raises(self):
        with pytest.raises(DimensionError):
            self.runtime.allreduce_sum([np.zeros(2)] * 7 + [np.zeros(3)])

    def test_reset_returns_previous_record(self):
        self.runtime.allreduce_sum([np.zeros(2)] * 8)
        previous = self.runtime.reset()
        assert previous.rounds == 1
        assert self.runtime.record.rounds == 0


class TestRunDecentralized:
    """Test suite for cluster program execution."""

    @staticmethod
    def _programs(values, rounds):
        def make(value):
            def program():
                acc = value
                for _ in range(rounds):
                    acc = (yield acc) * 0.5 + value
                return acc
            return program
        return [make(v) for v in values]

    def test_outputs_are_schedule_independent(self, rng):
        values = [rng.standard_normal(4) + 0j for _ in range(4)]
        reference = run_decentralized(self._programs(values, 3), ConsensusRuntime(4))
        for workers in (2, 4):
            for seed in (0, 1, 2):
                runtime = ConsensusRuntime(4, max_workers=workers, schedule_seed=seed)
                outputs = runtime.run_decentralized(self._programs(values, 3))
                for a, b in zip(reference, outputs):
                    assert np.array_equal(a, b)

    def test_round_count(self):
        runtime = ConsensusRuntime(3)
        runtime.run_decentralized(self._programs([np.zeros(2)] * 3, 5))
        assert runtime.record.rounds == 5

    def test_no_yield_means_no_traffic(self):
        runtime = ConsensusRuntime(2)
        outputs = runtime.run_decentralized(self._programs([np.ones(2)] * 2, 0))
        assert runtime.record.rounds == 0
        assert np.array_equal(outputs[0], np.ones(2))

    def test_disagreeing_round_counts_raise(self):
        runtime = ConsensusRuntime(2)
        programs = self._programs([np.ones(2)], 1) + self._programs([np.ones(2)], 2)
        with pytest.raises(ContractViolationError):
            runtime.run_decentralized(programs)

    def test_wrong_program_count_raises(self):
        with pytest.raises(DimensionError):
            ConsensusRuntime(2).run_decentralized(self._programs([np.ones(1)], 1))


class TestClusterContext:
    """Test suite for cluster-local state isolation."""

    def test_foreign_access_is_rejected(self):
        contexts = [ClusterContext(0, secret=1), ClusterContext(1, secret=2)]

        def snoop():
            yield np.zeros(1)
            return contexts[1]["secret"]

        def honest():
            yield np.zeros(1)
            return contexts[1]["secret"]

        with pytest.raises(ContractViolationError):
            ConsensusRuntime(2).run_decentralized([snoop, honest])

    def test_owner_and_coordinator_access(self):
        ctx = ClusterContext(0, value=3)
        ctx["other"] = 4
        assert ctx["value"] == 3
        assert ctx.get("missing") is None
        assert "other" in ctx
        assert ctx.index == 0


class TestPredictedTraffic:
    """Test suite for the consensus bandwidth model."""

    def test_admm_uplink(self):
        record = predicted_traffic("admm-ul", U=16, C=8, n_sc=100, T=5)
        assert record.rounds == 5
        assert record.gathered_complex == 5 * 8 * 16 * 100

    def test_cg_and_beamforming_rounds(self):
        assert predicted_traffic("cg-ul", 4, 2, 1, T=3).rounds == 4
        assert predicted_traffic("admm-dl", 4, 2, 1, T=3).rounds == 2
        assert predicted_traffic("admm-dl", 4, 2, 1, T=1).rounds == 0

    def test_unknown_algorithm_raises(self):
        with pytest.raises(DimensionError):
            predicted_traffic("mmse", 4, 2, 1, 1)

    def test_merge(self):
        a = predicted_traffic("admm-ul", 4, 2, 1, 2)
        a.merge(predicted_traffic("cg-ul", 4, 2, 1, 1))
        assert a.rounds == 4
        assert a.as_dict()["gathered_complex"] == 4 * 2 * 4
        assert isinstance(a, ConsensusRecord)
