"""
Integration tests - end-to-end cost and correctness sweeps.

All marked slow; deselect with `pytest -m "not slow"`.
"""

import numpy as np
import pytest

from app.application.dto.reconcile_dto import SweepRequestDTO
from app.application.harness import (
    cost_trend,
    gen_instance,
    mean_cost,
    measurements_for,
    recovery_rate,
    run_trial,
    session_params_for,
    sweep,
    trial_seed,
    worked_example_instance,
)
from app.domain.baselines import guess_overshoot_cells, guess_schedule_cost_cells
from app.domain.hashing import derive_seed
from app.domain.iblt import build, list_entries
from app.domain.value_objects import ProtocolName
from app.infrastructure.session_runner import run_inproc_session

pytestmark = pytest.mark.slow


class TestEndToEndCorrectness:
    """n=100 sessions across k and d, scored against the brute-force difference."""

    def test_sessions_reconcile_and_stay_within_2n_rows(self):
        n = 100
        total = exact = 0
        for k in (2, 3):
            for d in (0, 1, 5, 20, 50, 100):
                for trial in range(50):
                    inst = gen_instance(n, d, trial_seed(0, n, d, trial))
                    params = session_params_for(inst, k)
                    outcome = run_inproc_session(inst.s_a, inst.s_b, params).outcome
                    assert outcome.rows_used <= 2 * n
                    if outcome.success:
                        # a Done is never wrong
                        assert outcome.delta_a == inst.delta_a
                        assert outcome.delta_b == inst.delta_b
                        exact += 1
                    else:
                        assert outcome.abort_reason is not None
                    total += 1
        assert total == 600
        assert exact / total >= 0.98


class TestCostShape:
    """Where CS-IBLT wins and loses against the guessing baseline at n=200."""

    def test_small_difference_costs_under_half_the_first_guess(self):
        request = SweepRequestDTO(
            n=200, k=2, d_min=1, d_max=1, trials=20, protocols=[ProtocolName.CS_IBLT]
        )
        records = sweep(request)
        assert all(r.success for r in records)
        assert mean_cost(records, ProtocolName.CS_IBLT, 1) < 400 / 2

    def test_full_difference_stays_within_2n_rows(self):
        request = SweepRequestDTO(
            n=200, k=2, d_min=200, d_max=200, trials=10,
            protocols=[ProtocolName.CS_IBLT, ProtocolName.IBLT_GUESS],
        )
        records = sweep(request)
        for record in records:
            if record.protocol is ProtocolName.CS_IBLT:
                assert record.scalars_sent <= 800
            else:
                assert record.scalars_sent > 800
        assert 2 * guess_schedule_cost_cells(200, 200) > 800

    def test_moderate_difference_crossover(self):
        request = SweepRequestDTO(
            n=200, k=2, d_min=40, d_max=100, d_step=10, trials=10,
            protocols=[ProtocolName.CS_IBLT, ProtocolName.IBLT_GUESS],
        )
        records = sweep(request)
        assert any(
            mean_cost(records, ProtocolName.IBLT_GUESS, d) <= mean_cost(records, ProtocolName.CS_IBLT, d)
            for d in request.d_values()
        )

    def test_rows_used_track_the_difference(self):
        records = []
        for d in (1, 10, 50, 100, 200):
            records += sweep(SweepRequestDTO(
                n=200, k=2, d_min=d, d_max=d, trials=5, protocols=[ProtocolName.CS_IBLT]
            ))
        assert cost_trend(records, ProtocolName.CS_IBLT) > 0.9


class TestSparseRecovery:
    """Planted sparse integer vectors at b=400."""

    @pytest.mark.parametrize("s", [2, 8, 32])
    def test_two_s_log_rows_plus_slack(self, s):
        m = measurements_for(400, s, 2.0, slack=10)
        assert recovery_rate(400, s, m, trials=100, base_seed=s) >= 0.95


def _capacity_hits(n: int, b: int, trials: int) -> int:
    hits = 0
    for trial in range(trials):
        rng = np.random.default_rng(trial)
        elements = (rng.choice(2**32 - 1, size=n, replace=False) + 1).tolist()
        result = list_entries(build(elements, b, 3, derive_seed(trial, 2)))
        hits += result.success and result.positives == set(elements)
    return hits


class TestIbltCapacity:
    """k=3 tables of random positive elements."""

    def test_list_entries_at_1_3n_cells(self):
        assert _capacity_hits(5000, 6500, 200) / 200 >= 0.99

    def test_list_entries_at_650_cells(self):
        """Stopping sets at n=500 cost a few percent at 1.3n."""
        assert _capacity_hits(500, 650, 200) / 200 >= 0.95


class TestWorkedExample:
    """S_A = {1..7}, S_B = {2..8} across seeds."""

    def test_reconciles_within_the_table_length(self):
        for seed in range(20):
            record = run_trial(worked_example_instance(seed), ProtocolName.CS_IBLT, k=2)
            assert record.success
            assert record.rows_used <= 14


class TestBaselineCosts:
    """Closed-form baseline costs."""

    def test_naive_and_overshoot(self):
        record = run_trial(gen_instance(200, 1, 3), ProtocolName.NAIVE)
        assert record.scalars_sent == 200
        assert guess_overshoot_cells(200, 1) == 198
