"""
Unit tests - sparse recovery, quantisation and verification.
"""

import numpy as np
import pytest

from app.domain.cs_encode import encode_prefix, matrix_rows
from app.domain.exceptions import DimensionMismatchError, InvalidParametersError
from app.domain.iblt import build_signed, list_entries
from app.domain.sparse_recovery import (
    RecoveryProblem,
    SolverConfig,
    quantize,
    recover_difference,
    residual_ok,
    solve_l1,
)
from app.domain.value_objects import MatrixSpec, SolverKind
from tests.conftest import WORKED_B, WORKED_HASH_SEED, WORKED_K


def _planted(b: int, s: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    x = np.zeros(b)
    x[rng.choice(b, size=s, replace=False)] = rng.choice([-3, -1, 1, 2, 5], size=s)
    return x


def _problem(table, matrix_seed: int, m: int) -> RecoveryProblem:
    spec = MatrixSpec(seed=matrix_seed, b=table.b)
    rows = encode_prefix(table, spec, m)
    return RecoveryProblem(
        phi_rows=matrix_rows(spec, 0, m),
        y_sum=np.array([r.y_sum for r in rows]),
        y_count=np.array([r.y_count for r in rows]),
    )


class TestQuantize:
    """Round half away from zero."""

    def test_rounding(self):
        assert quantize(np.array([0.5, -0.5, 1.49, -2.51, 3.0])).tolist() == [1, -1, 1, -3, 3]


class TestSolveL1:
    """Greedy and linear-programming solvers."""

    @pytest.mark.parametrize("kind", [SolverKind.OMP, SolverKind.BASIS_PURSUIT])
    def test_recovers_planted_vector(self, kind):
        b, s = 120, 4
        x = _planted(b, s, 1)
        phi = matrix_rows(MatrixSpec(seed=3, b=b), 0, 40)
        x_hat = solve_l1(phi, phi @ x, SolverConfig(kind=kind))
        assert np.array_equal(quantize(x_hat), x.astype(np.int64))

    def test_zero_measurements_give_zero(self):
        phi = matrix_rows(MatrixSpec(seed=3, b=30), 0, 5)
        assert not solve_l1(phi, np.zeros(5)).any()

    def test_square_system_is_solved_exactly(self):
        b = 20
        x = np.arange(-10, 10, dtype=float)
        phi = matrix_rows(MatrixSpec(seed=8, b=b), 0, b)
        assert np.array_equal(quantize(solve_l1(phi, phi @ x)), x.astype(np.int64))

    def test_one_sparse_value_seven(self):
        hits = 0
        for seed in range(100):
            x = np.zeros(100)
            x[np.random.default_rng(seed).integers(100)] = 7
            phi = matrix_rows(MatrixSpec(seed=seed, b=100), 0, 12)
            hits += np.abs(solve_l1(phi, phi @ x) - x).max() < 0.5
        assert hits >= 99

    def test_shape_checks(self):
        phi = np.ones((3, 5))
        with pytest.raises(DimensionMismatchError):
            solve_l1(phi, np.ones(4))

    def test_config_validation(self):
        with pytest.raises(InvalidParametersError):
            SolverConfig(residual_tol=0)
        with pytest.raises(InvalidParametersError):
            SolverConfig(attempt_every=0)


class TestResidualCheck:
    """Verification of quantised candidates."""

    def test_accepts_exact_and_rejects_wrong(self):
        phi = matrix_rows(MatrixSpec(seed=2, b=10), 0, 6)
        x = np.array([0, 1, 0, 0, -1, 0, 0, 0, 0, 0])
        y = phi @ x
        assert residual_ok(phi, x, y, 1e-6)
        assert not residual_ok(phi, x * 2, y, 1e-6)


class TestRecoverDifference:
    """Both IBLT columns recovered from a row prefix."""

    def test_worked_example_from_full_prefix(self, worked_table_a, worked_table_b):
        diff = worked_table_a.subtract(worked_table_b)
        recovered = recover_difference(
            _problem(diff, 5, WORKED_B), (WORKED_B, WORKED_K, WORKED_HASH_SEED)
        )
        assert recovered.verified
        assert recovered.table == diff

    def test_sparse_difference_from_short_prefix(self, worked_table_a, worked_table_b):
        """Four nonzero cells come back before the system is square."""
        diff = worked_table_a.subtract(worked_table_b)
        recovered = recover_difference(
            _problem(diff, 5, 13), (WORKED_B, WORKED_K, WORKED_HASH_SEED)
        )
        assert recovered.verified
        assert recovered.table == diff

    def test_no_rows_gives_verified_empty_table(self):
        problem = RecoveryProblem(np.empty((0, 8)), np.empty(0), np.empty(0))
        recovered = recover_difference(problem, (8, 2, 0))
        assert recovered.verified
        assert recovered.table.is_empty()

    def test_underdetermined_dense_table_is_not_verified(self, worked_table_a):
        """Ten nonzero cells cannot be pinned down by three rows."""
        recovered = recover_difference(
            _problem(worked_table_a, 5, 3), (WORKED_B, WORKED_K, WORKED_HASH_SEED)
        )
        assert not recovered.verified

    def test_width_mismatch(self):
        problem = RecoveryProblem(np.ones((2, 5)), np.ones(2), np.ones(2))
        with pytest.raises(DimensionMismatchError):
            recover_difference(problem, (6, 2, 0))


def _random_difference(rng: np.random.Generator, b: int, d: int, high: int = 2**32 - 1):
    values = (rng.choice(high, size=d, replace=False) + 1).tolist()
    split = int(rng.integers(0, d + 1))
    return build_signed(values[:split], values[split:], b, 2, int(rng.integers(1 << 32)))


class TestVerificationGuards:
    """What a verified recovery promises."""

    def test_verification_is_monotone_in_rows(self):
        cfg = SolverConfig(kind=SolverKind.BASIS_PURSUIT)
        for seed in range(5):
            rng = np.random.default_rng(seed)
            diff = _random_difference(rng, 40, 4, high=10_000)
            verified = [
                recover_difference(_problem(diff, seed, m), diff.params, cfg).verified
                for m in range(1, diff.b + 1)
            ]
            first = verified.index(True)
            assert all(verified[first:])
            assert recover_difference(_problem(diff, seed, diff.b), diff.params, cfg).table == diff

    @pytest.mark.slow
    def test_no_silent_wrong_answers_when_under_measured(self):
        rng = np.random.default_rng(2024)
        wrong = 0
        for trial in range(1000):
            diff = _random_difference(rng, 60, int(rng.integers(2, 16)))
            m = int(rng.integers(1, diff.nonzero_cells()))
            recovered = recover_difference(_problem(diff, trial, m), diff.params)
            if recovered.verified and recovered.table != diff:
                wrong += list_entries(recovered.table).success
        assert wrong == 0
