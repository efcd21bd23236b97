"""
Unit tests - signed IBLT: insertion, subtraction and peeling.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.domain.exceptions import (
    InvalidElementError,
    InvalidParametersError,
    ParameterMismatchError,
)
from app.domain.iblt import (
    Iblt,
    build,
    build_signed,
    capacity_factor,
    cell_indices,
    list_entries,
    list_entries_against,
    recommended_length,
)
from app.domain.value_objects import IbltCell
from tests.conftest import WORKED_B, WORKED_HASH_SEED, WORKED_INDICES, WORKED_K

elements = st.integers(min_value=1, max_value=2**32 - 1)


class TestConstruction:
    """Parameter validation."""

    def test_new_table_is_empty(self):
        table = Iblt(10, 3, 0)
        assert table.is_empty()
        assert table.cells == [IbltCell()] * 10

    @pytest.mark.parametrize("b,k", [(1, 2), (3, 1), (2, 3)])
    def test_rejects_bad_shape(self, b, k):
        with pytest.raises(InvalidParametersError, match="b >= k >= 2"):
            Iblt(b, k, 0)

    @pytest.mark.parametrize("e", [0, -1, 2**32])
    def test_rejects_out_of_range_element(self, e):
        with pytest.raises(InvalidElementError):
            Iblt(10, 2, 0).insert(e)

    def test_capacity_factors(self):
        assert capacity_factor(3) == 1.2
        assert recommended_length(500, 3, signed=False) == 600
        assert recommended_length(100, 2) == 200
        with pytest.raises(InvalidParametersError):
            capacity_factor(9)


class TestWorkedExample:
    """S_A = {1..7}, S_B = {2..8} at b=14, k=2."""

    def test_cell_layout(self):
        table = Iblt(WORKED_B, WORKED_K, WORKED_HASH_SEED)
        for e, idx in WORKED_INDICES.items():
            assert table.indices(e) == idx

    def test_table_contents(self, worked_table_a):
        assert worked_table_a.sums.tolist() == [8, 9, 0, 5, 5, 5, 7, 2, 0, 0, 2, 6, 0, 7]
        assert worked_table_a.counts.tolist() == [2, 2, 0, 2, 1, 1, 2, 1, 0, 0, 1, 1, 0, 1]

    def test_difference_table_peels_to_one_and_minus_eight(self, worked_table_a, worked_table_b):
        diff = worked_table_a.subtract(worked_table_b)
        assert diff.cell(0) == IbltCell(1, 1)
        assert diff.cell(3) == IbltCell(1, 1)
        assert diff.cell(12) == IbltCell(-8, -1)
        assert diff.cell(13) == IbltCell(-8, -1)
        assert diff.nonzero_cells() == 4

        result = list_entries(diff)
        assert result.success
        assert result.positives == {1}
        assert result.negatives == {8}

    def test_positive_table_peels_completely(self, worked_table_a):
        result = list_entries(worked_table_a)
        assert result.success
        assert result.positives == set(range(1, 8))
        assert result.negatives == set()


class TestAlgebra:
    """Insert/delete and subtraction identities."""

    @given(st.sets(elements, max_size=30), st.sets(elements, max_size=30))
    def test_difference_identity(self, a, b):
        """IBLT(A) - IBLT(B) equals the table of A-B inserted and B-A deleted."""
        left = build(a, 64, 3, 11).subtract(build(b, 64, 3, 11))
        right = build_signed(a - b, b - a, 64, 3, 11)
        assert left == right

    @given(st.sets(elements, max_size=30))
    def test_insert_then_delete_is_empty(self, a):
        table = build(a, 40, 3, 5)
        for e in a:
            table.delete(e)
        assert table.is_empty()

    def test_subtract_rejects_mismatched_tables(self):
        with pytest.raises(ParameterMismatchError):
            Iblt(10, 2, 0).subtract(Iblt(10, 2, 1))

    def test_count_total(self):
        assert build({1, 2, 3}, 10, 3, 0).count_total() == 9

    def test_copy_is_independent(self, worked_table_a):
        clone = worked_table_a.copy()
        clone.insert(100)
        assert clone != worked_table_a


class TestListEntries:
    """Peeling edge cases."""

    def test_empty_table(self):
        result = list_entries(Iblt(8, 2, 0))
        assert result.success
        assert result.positives == set() and result.negatives == set()

    def test_does_not_mutate_input(self, worked_table_a):
        before = worked_table_a.copy()
        list_entries(worked_table_a)
        assert worked_table_a == before

    def test_overloaded_table_reports_failure(self):
        """Far above capacity nothing is pure, so peeling stalls."""
        table = build(range(1, 201), 20, 3, 0)
        result = list_entries(table)
        assert not result.success
        assert result.residual_cells > 0

    def test_fake_pure_cell_is_rejected(self):
        """A lone count-1 cell cannot drain: the element would need k cells."""
        table = Iblt.from_columns([0] * 9 + [999], [0] * 9 + [1], k=2, seed=0)
        result = list_entries(table)
        assert not result.success

    @settings(max_examples=50, deadline=None)
    @given(st.sets(elements, min_size=1, max_size=40), st.sets(elements, max_size=40))
    def test_signed_difference_recovers_both_sides(self, a, b):
        d = len(a ^ b)
        table = build_signed(a - b, b - a, max(4 * d, 8), 3, 17)
        result = list_entries(table)
        if result.success:
            assert result.positives == a - b
            assert result.negatives == b - a

    def test_capacity_rule_at_k3(self):
        """500 elements in 1.4n cells peel in almost every seeded trial."""
        rng = np.random.default_rng(0)
        wins = 0
        for seed in range(20):
            values = rng.choice(2**32 - 1, size=500, replace=False) + 1
            wins += list_entries(build(values.tolist(), 700, 3, seed)).success
        assert wins >= 19

    def test_chain_of_cancelling_cells_peels_fully(self):
        """+a, -m, +c chained so the middle cells start at count zero."""

        def on_cells(cells):
            return next(
                e for e in range(1, 10_000)
                if set(cell_indices(e, 8, 2, 0)) == cells
            )

        a = on_cells({0, 1})
        m = on_cells({1, 2})
        c = on_cells({2, 3})
        table = build_signed({a, c}, {m}, 8, 2, 0)
        assert int(np.abs(table.counts).sum()) == 2
        result = list_entries(table)
        assert result.success
        assert result.positives == {a, c}
        assert result.negatives == {m}


def _same_cells_pair(b: int, k: int, seed: int) -> tuple[int, int]:
    seen: dict[frozenset[int], int] = {}
    for e in range(1, 10_000):
        cells = frozenset(cell_indices(e, b, k, seed))
        if cells in seen:
            return seen[cells], e
        seen[cells] = e
    raise AssertionError("no colliding pair")


class TestListEntriesAgainst:
    """Peeling with the receiver's own set at hand."""

    def test_breaks_a_stall_with_a_local_element(self):
        y1, y2 = _same_cells_pair(8, 2, 0)
        shared = set(cell_indices(y1, 8, 2, 0))
        local = {y1, y2} | {
            e for e in range(1, 60) if not shared & set(cell_indices(e, 8, 2, 0))
        }
        table = build_signed(set(), {y1, y2}, 8, 2, 0)
        assert not list_entries(table).success

        result = list_entries_against(table, local)
        assert result.success
        assert result.positives == set()
        assert result.negatives == {y1, y2}

    def test_negative_must_be_local(self):
        table = build_signed(set(), {77}, 8, 3, 0)
        assert list_entries(table).negatives == {77}
        result = list_entries_against(table, {5, 6})
        assert not result.success
        assert result.negatives == set()

    def test_positive_must_not_be_local(self):
        table = build_signed({77}, set(), 8, 3, 0)
        result = list_entries_against(table, {77})
        assert not result.success
        assert result.positives == set()

    def test_overloaded_table_still_fails(self):
        table = build(range(1, 201), 20, 3, 0)
        result = list_entries_against(table, set())
        assert not result.success
        assert result.residual_cells > 0

    def test_does_not_mutate_input(self, worked_table_a):
        before = worked_table_a.copy()
        list_entries_against(worked_table_a, set())
        assert worked_table_a == before

    @settings(max_examples=50, deadline=None)
    @given(st.sets(elements, min_size=1, max_size=40), st.sets(elements, max_size=40))
    def test_success_is_always_the_true_difference(self, a, b):
        d = len(a ^ b)
        table = build_signed(a - b, b - a, max(d, 4), 2, 5)
        result = list_entries_against(table, b)
        if result.success:
            assert result.positives == a - b
            assert result.negatives == b - a
