"""
Signed invertible Bloom lookup table.

Cells hold (sum, count) pairs. Counts may go negative, so the cellwise
difference of two tables is itself a table holding Delta_A as insertions and
Delta_B as deletions, and peeling it yields both differences at once.
"""

import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidParametersError, ParameterMismatchError
from .hashing import element_hash
from .value_objects import ELEMENT_MAX, Element, IbltCell, validate_element

logger = logging.getLogger(__name__)

# Cell sums stay far below this for |set| <= 2^20 elements under 2^32.
_SUM_LIMIT = 1 << 62

# Positive-only table length multipliers by hash count.
CAPACITY_FACTORS: dict[int, float] = {3: 1.2, 4: 1.3, 5: 1.4, 6: 1.6, 7: 1.7}


def capacity_factor(k: int) -> float:
    """Table length per stored element needed for peeling to succeed w.h.p."""
    try:
        return CAPACITY_FACTORS[k]
    except KeyError:
        raise InvalidParametersError(f"No capacity factor tabulated for k={k}") from None


def recommended_length(n: int, k: int, signed: bool = True) -> int:
    """Length for n elements: 2n for difference tables, capacity rule otherwise."""
    if n < 1:
        raise InvalidParametersError(f"n must be at least 1, got {n}")
    if signed:
        return max(2 * n, k)
    return max(math.ceil(capacity_factor(k) * n), k)


def cell_indices(e: int, b: int, k: int, seed: int) -> list[int]:
    """k pairwise distinct cell indices for e, by rejection over hash attempts."""
    indices: list[int] = []
    attempt = 0
    while len(indices) < k:
        idx = element_hash(e, seed, attempt) % b
        if idx not in indices:
            indices.append(idx)
        attempt += 1
    return indices


@dataclass
class ExtractResult:
    """Outcome of LIST-ENTRIES on a (possibly signed) table."""
    positives: set[Element] = field(default_factory=set)
    negatives: set[Element] = field(default_factory=set)
    success: bool = True
    residual_cells: int = 0


@dataclass(eq=False)
class Iblt:
    """
    Entity - b cells of (sum, count) under k seeded hash functions.
    insert/delete mutate in place and return the table for chaining.
    """
    b: int
    k: int
    seed: int
    sums: np.ndarray = field(init=False, repr=False)
    counts: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.k < 2 or self.b < self.k:
            raise InvalidParametersError(
                f"IBLT needs b >= k >= 2, got b={self.b}, k={self.k}"
            )
        if not 0 <= self.seed < 1 << 64:
            raise InvalidParametersError(f"Hash seed must fit in 64 bits: {self.seed}")
        self.sums = np.zeros(self.b, dtype=np.int64)
        self.counts = np.zeros(self.b, dtype=np.int64)

    @property
    def params(self) -> tuple[int, int, int]:
        return (self.b, self.k, self.seed)

    @property
    def cells(self) -> list[IbltCell]:
        return [IbltCell(int(s), int(c)) for s, c in zip(self.sums, self.counts)]

    def cell(self, i: int) -> IbltCell:
        return IbltCell(int(self.sums[i]), int(self.counts[i]))

    def indices(self, e: int) -> list[int]:
        return cell_indices(e, self.b, self.k, self.seed)

    def insert(self, e: int) -> "Iblt":
        return self._apply(validate_element(e), 1)

    def delete(self, e: int) -> "Iblt":
        return self._apply(validate_element(e), -1)

    def _apply(self, e: int, sign: int) -> "Iblt":
        idx = self.indices(e)
        self.sums[idx] += sign * e
        self.counts[idx] += sign
        if np.abs(self.sums[idx]).max() >= _SUM_LIMIT:
            raise OverflowError(f"IBLT cell sum overflow after applying {e}")
        return self

    def subtract(self, other: "Iblt") -> "Iblt":
        if self.params != other.params:
            raise ParameterMismatchError(
                f"Cannot subtract IBLT{other.params} from IBLT{self.params}"
            )
        result = Iblt(self.b, self.k, self.seed)
        result.sums = self.sums - other.sums
        result.counts = self.counts - other.counts
        return result

    def copy(self) -> "Iblt":
        result = Iblt(self.b, self.k, self.seed)
        result.sums = self.sums.copy()
        result.counts = self.counts.copy()
        return result

    def is_empty(self) -> bool:
        return not self.sums.any() and not self.counts.any()

    def count_total(self) -> int:
        return int(self.counts.sum())

    def nonzero_cells(self) -> int:
        return int(np.count_nonzero((self.sums != 0) | (self.counts != 0)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Iblt):
            return NotImplemented
        return (
            self.params == other.params
            and np.array_equal(self.sums, other.sums)
            and np.array_equal(self.counts, other.counts)
        )

    @classmethod
    def from_columns(
        cls, sums: Iterable[int], counts: Iterable[int], k: int, seed: int
    ) -> "Iblt":
        sums_arr = np.asarray(list(sums), dtype=np.int64)
        counts_arr = np.asarray(list(counts), dtype=np.int64)
        if sums_arr.shape != counts_arr.shape:
            raise InvalidParametersError("Sum and count columns differ in length")
        table = cls(len(sums_arr), k, seed)
        table.sums = sums_arr
        table.counts = counts_arr
        return table

    def list_entries(self) -> ExtractResult:
        return list_entries(self)


def new(b: int, k: int, seed: int) -> Iblt:
    return Iblt(b, k, seed)


def insert(iblt: Iblt, e: int) -> Iblt:
    return iblt.insert(e)


def delete(iblt: Iblt, e: int) -> Iblt:
    return iblt.delete(e)


def subtract(a: Iblt, b: Iblt) -> Iblt:
    return a.subtract(b)


def build(elements: Iterable[int], b: int, k: int, seed: int) -> Iblt:
    table = Iblt(b, k, seed)
    for e in elements:
        table.insert(e)
    return table


def build_signed(
    inserted: Iterable[int], deleted: Iterable[int], b: int, k: int, seed: int
) -> Iblt:
    table = build(inserted, b, k, seed)
    for e in deleted:
        table.delete(e)
    return table


class _IndexCache(dict[int, list[int]]):
    """Cell indices per element, computed once per decode."""

    def __init__(self, iblt: Iblt) -> None:
        super().__init__()
        self._iblt = iblt

    def __missing__(self, e: int) -> list[int]:
        idx = self[e] = self._iblt.indices(e)
        return idx


def _candidate(total: int, count: int) -> int | None:
    if total == 0 or (total > 0) != (count > 0):
        return None
    e = abs(total)
    return e if e < ELEMENT_MAX else None


def _peel(
    iblt: Iblt,
    sums: list[int],
    counts: list[int],
    positives: set[Element],
    negatives: set[Element],
    index_of: _IndexCache,
    local: frozenset[int] | None = None,
    banned: frozenset[int] = frozenset(),
) -> bool:
    """
    Peel the columns in place. With a local set, negatives must belong to it
    and positives must not; count -1 cells are taken first. Returns True when
    an element would be extracted twice.
    """
    neg_pending = [i for i, c in enumerate(counts) if c == -1]
    pos_pending = [i for i, c in enumerate(counts) if c == 1]
    # each extraction names a distinct element, so b*k bounds a valid peel
    limit = iblt.b * iblt.k
    extracted = 0

    while (neg_pending or pos_pending) and extracted < limit:
        i = neg_pending.pop() if neg_pending else pos_pending.pop()
        count = counts[i]
        if count not in (1, -1):
            continue
        e = _candidate(sums[i], count)
        if e is None or e in banned:
            continue
        if local is not None and (e in local) != (count < 0):
            continue
        idx = index_of[e]
        if i not in idx:
            continue
        if e in positives or e in negatives:
            return True
        (positives if count > 0 else negatives).add(Element(e))
        extracted += 1
        for j in idx:
            sums[j] -= count * e
            counts[j] -= count
            if counts[j] == -1:
                neg_pending.append(j)
            elif counts[j] == 1:
                pos_pending.append(j)
    return False


def _result(
    positives: set[Element],
    negatives: set[Element],
    sums: list[int],
    counts: list[int],
    conflict: bool,
) -> ExtractResult:
    residual = sum(1 for s, c in zip(sums, counts) if s != 0 or c != 0)
    success = residual == 0 and not conflict
    if not success:
        logger.debug(
            "LIST-ENTRIES stopped with %d residual cells (conflict=%s)", residual, conflict
        )
    return ExtractResult(
        positives=positives,
        negatives=negatives,
        success=success,
        residual_cells=residual,
    )


def list_entries(iblt: Iblt) -> ExtractResult:
    """
    Peel every cell whose count is +1 or -1 and whose candidate element is
    consistent (sign(sum) == sign(count), in range, hashes back to the cell).
    Runs on a copy; the caller's table is untouched.
    """
    sums = [int(v) for v in iblt.sums]
    counts = [int(v) for v in iblt.counts]
    positives: set[Element] = set()
    negatives: set[Element] = set()
    conflict = _peel(iblt, sums, counts, positives, negatives, _IndexCache(iblt))
    return _result(positives, negatives, sums, counts, conflict)


def list_entries_against(
    iblt: Iblt, local: Iterable[int], max_repairs: int = 16
) -> ExtractResult:
    """
    Peel a difference table IBLT(S_A) - IBLT(local) knowing the local set.

    Negatives must be local elements and positives must not. When peeling
    stalls, single repairs are tried greedily and kept if they shrink the
    residual: banning an extracted positive (a mixed cell that happened to
    hash back) or taking a local element whose cells are all nonzero as a
    negative (breaks a stopping set). A wrong repair leaves a ghost entry
    behind, so it never drains the table.
    """
    members = frozenset(int(e) for e in local)
    index_of = _IndexCache(iblt)

    def attempt(
        forced: tuple[int, ...], banned: frozenset[int]
    ) -> tuple[ExtractResult, list[int], list[int]]:
        sums = [int(v) for v in iblt.sums]
        counts = [int(v) for v in iblt.counts]
        negatives: set[Element] = set()
        for y in forced:
            for j in index_of[y]:
                sums[j] += y
                counts[j] += 1
            negatives.add(Element(y))
        positives: set[Element] = set()
        conflict = _peel(iblt, sums, counts, positives, negatives, index_of, members, banned)
        return _result(positives, negatives, sums, counts, conflict), sums, counts

    forced: tuple[int, ...] = ()
    banned: frozenset[int] = frozenset()
    best, sums, counts = attempt(forced, banned)

    for _ in range(max_repairs):
        if best.success:
            break
        moves = [(forced, banned | {p}) for p in sorted(best.positives)]
        moves += [
            (forced + (y,), banned)
            for y in sorted(members - best.negatives)
            if all(sums[j] != 0 or counts[j] != 0 for j in index_of[y])
        ]
        chosen = None
        for move in moves:
            result, move_sums, move_counts = attempt(*move)
            if not result.success and result.residual_cells == 0:
                continue  # drained only through a conflict
            target = chosen[0].residual_cells if chosen else best.residual_cells
            if result.residual_cells < target:
                chosen = (result, move_sums, move_counts, move)
                if result.success:
                    break
        if chosen is None:
            break
        best, sums, counts, (forced, banned) = chosen
        logger.debug("Repair step left %d residual cells", best.residual_cells)
    return best
