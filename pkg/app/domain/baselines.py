"""
Comparison methods under the same cost accounting as CS-IBLT.

Cost unit is one 64-bit scalar: a raw element costs 1, an IBLT cell 2, and a
Bloom filter ceil(bits / 64).
"""

import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidParametersError
from .hashing import derive_seed, element_hash, element_hash_array
from .iblt import build, list_entries
from .protocol import ReconcileOutcome, classify
from .value_objects import Element, validate_element

logger = logging.getLogger(__name__)

SCALARS_PER_CELL = 2
BLOOM_UNIVERSE_LIMIT = 1 << 26
# Last-resort table length for the guessing baseline, as a multiple of 2n.
FALLBACK_MARGIN = 2.0


def _as_set(elements: Iterable[int]) -> set[Element]:
    return {validate_element(e) for e in elements}


def naive_reconcile(s_a: Iterable[int], s_b: Iterable[int]) -> ReconcileOutcome:
    """A ships S_A whole; B diffs locally."""
    a, b = _as_set(s_a), _as_set(s_b)
    return ReconcileOutcome(
        delta_a=a - b,
        delta_b=b - a,
        scalars_sent=len(a),
        success=True,
        handshake_messages=1,
    )


# --- Bloom filter ---------------------------------------------------------


@dataclass(eq=False)
class BloomFilter:
    """Entity - bit array with k_bf seeded hash functions; no false negatives."""
    size: int
    hash_count: int
    seed: int = 0
    bits: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.size < 1 or self.hash_count < 1:
            raise InvalidParametersError(
                f"Bloom filter needs size >= 1 and hash_count >= 1, got {self.size}, {self.hash_count}"
            )
        self.bits = np.zeros(self.size, dtype=bool)

    @classmethod
    def for_elements(cls, count: int, bits_per_element: int, seed: int = 0) -> "BloomFilter":
        if bits_per_element < 1:
            raise InvalidParametersError(f"bits_per_element must be >= 1: {bits_per_element}")
        hash_count = max(1, round(bits_per_element * math.log(2)))
        return cls(size=bits_per_element * max(count, 1), hash_count=hash_count, seed=seed)

    def _positions(self, elements: np.ndarray) -> np.ndarray:
        return np.stack([
            element_hash_array(elements, self.seed, j) % np.uint64(self.size)
            for j in range(self.hash_count)
        ]).astype(np.int64)

    def add(self, e: int) -> None:
        for j in range(self.hash_count):
            self.bits[element_hash(e, self.seed, j) % self.size] = True

    def add_many(self, elements: Iterable[int]) -> None:
        arr = np.fromiter(elements, dtype=np.uint64)
        if arr.size:
            self.bits[self._positions(arr).ravel()] = True

    def __contains__(self, e: int) -> bool:
        return all(
            self.bits[element_hash(e, self.seed, j) % self.size] for j in range(self.hash_count)
        )

    def query_many(self, elements: np.ndarray) -> np.ndarray:
        if elements.size == 0:
            return np.zeros(0, dtype=bool)
        return self.bits[self._positions(elements.astype(np.uint64))].all(axis=0)

    @property
    def cost_scalars(self) -> int:
        return math.ceil(self.size / 64)


def bloom_reconcile(
    s_a: Iterable[int],
    s_b: Iterable[int],
    universe_max: int,
    bits_per_element: int,
    seed: int = 0,
) -> ReconcileOutcome:
    """
    B drops the S_B elements missing from A's filter and adds every other
    element of U = [1, universe_max] that the filter reports. False positives
    leak into Delta_A and hide members of Delta_B.
    """
    a, b = _as_set(s_a), _as_set(s_b)
    if not 1 <= universe_max <= BLOOM_UNIVERSE_LIMIT:
        raise InvalidParametersError(
            f"universe_max must lie in [1, {BLOOM_UNIVERSE_LIMIT}], got {universe_max}"
        )
    if any(e > universe_max for e in a | b):
        raise InvalidParametersError(f"Set elements exceed universe_max={universe_max}")

    bloom = BloomFilter.for_elements(len(a), bits_per_element, seed)
    bloom.add_many(a)

    local = np.fromiter(sorted(b), dtype=np.uint64, count=len(b))
    delta_b = {Element(int(e)) for e in local[~bloom.query_many(local)]}

    universe = np.arange(1, universe_max + 1, dtype=np.uint64)
    reported = universe[bloom.query_many(universe)]
    delta_a = {Element(int(e)) for e in reported} - b

    # A's |S_A| travels in the header and is the only consistency check available
    success = len(b) + len(delta_a) - len(delta_b) == len(a)
    logger.debug(
        "Bloom baseline: %d candidate additions, %d removals, consistent=%s",
        len(delta_a), len(delta_b), success,
    )
    return ReconcileOutcome(
        delta_a=delta_a,
        delta_b=delta_b,
        scalars_sent=bloom.cost_scalars if a else 0,
        success=success,
        handshake_messages=1,
    )


# --- IBLT with difference-size guessing -----------------------------------


@dataclass(frozen=True, slots=True)
class GuessSchedule:
    """Value Object - d_0 = ceil(n/2), d_{t+1} = ceil((n + d_t)/2), capped at n."""
    n: int
    guesses: tuple[int, ...]

    @classmethod
    def for_bound(cls, n: int) -> "GuessSchedule":
        if n < 1:
            raise InvalidParametersError(f"n must be at least 1, got {n}")
        guesses = [math.ceil(n / 2)]
        while guesses[-1] < n:
            guesses.append(min(n, math.ceil((n + guesses[-1]) / 2)))
        return cls(n=n, guesses=tuple(guesses))

    def cells(self, rounds: int) -> int:
        """Cells sent over the first `rounds` rounds."""
        return sum(2 * d for d in self.guesses[:rounds])

    def __len__(self) -> int:
        return len(self.guesses)


def guess_schedule(n: int) -> list[int]:
    return list(GuessSchedule.for_bound(n).guesses)


def guess_overshoot_cells(n: int, d: int) -> int:
    """Cells wasted by round 0 against an oracle table of 2d cells (d <= d_0)."""
    d0 = GuessSchedule.for_bound(n).guesses[0]
    if not 0 <= d <= d0:
        raise InvalidParametersError(f"Overshoot formula holds for 0 <= d <= {d0}, got {d}")
    return 2 * d0 - 2 * d


def guess_schedule_cost_cells(n: int, d: int, k: int = 2) -> int:
    """
    Cumulative cells sent until the first guess with d_t >= d, floored at k
    per round. Peeling can still fail at that round, so this is a lower bound
    on what iblt_guess_reconcile pays.
    """
    schedule = GuessSchedule.for_bound(n)
    if not 0 <= d <= n:
        raise InvalidParametersError(f"d must lie in [0, {n}], got {d}")
    total = 0
    for guess in schedule.guesses:
        total += max(2 * guess, k)
        if guess >= d:
            break
    return total


def _iblt_round(
    a: set[Element], b: set[Element], cells: int, k: int, seed: int
) -> tuple[set[Element], set[Element]] | None:
    cells = max(cells, k)
    diff = build(a, cells, k, seed).subtract(build(b, cells, k, seed))
    extract = list_entries(diff)
    if not extract.success:
        return None
    delta_a, delta_b = classify(extract)
    if not delta_b <= b or delta_a & b:
        return None
    return delta_a, delta_b


def iblt_guess_reconcile(
    s_a: Iterable[int], s_b: Iterable[int], n: int, k: int, seed: int = 0
) -> ReconcileOutcome:
    """
    Round t ships a fresh IBLT of 2 * d_t cells. Each failed round costs the
    receiver one reply message and no scalars.
    """
    a, b = _as_set(s_a), _as_set(s_b)
    schedule = GuessSchedule.for_bound(n)
    scalars = 0
    for t, guess in enumerate(schedule.guesses):
        cells = max(2 * guess, k)
        scalars += SCALARS_PER_CELL * cells
        found = _iblt_round(a, b, cells, k, derive_seed(seed, t))
        if found is not None:
            return ReconcileOutcome(
                delta_a=found[0],
                delta_b=found[1],
                scalars_sent=scalars,
                success=True,
                rounds=t + 1,
                handshake_messages=t + 1,
            )
        logger.debug("Guess round %d with %d cells failed", t, cells)

    cells = math.ceil(2 * n * FALLBACK_MARGIN)
    scalars += SCALARS_PER_CELL * cells
    found = _iblt_round(a, b, cells, k, derive_seed(seed, len(schedule)))
    logger.info("Guess schedule exhausted for n=%d; fallback table of %d cells", n, cells)
    return ReconcileOutcome(
        delta_a=found[0] if found else set(),
        delta_b=found[1] if found else set(),
        scalars_sent=scalars,
        success=found is not None,
        rounds=len(schedule) + 1,
        handshake_messages=len(schedule) + 1,
        fallback_used=True,
    )


def iblt_oracle_reconcile(
    s_a: Iterable[int],
    s_b: Iterable[int],
    k: int,
    seed: int = 0,
    cells_per_difference: float = 2.0,
) -> ReconcileOutcome:
    """Plain IBLT sized from the true d, the reference point when d is known."""
    a, b = _as_set(s_a), _as_set(s_b)
    d = len(a ^ b)
    cells = max(math.ceil(cells_per_difference * d), k)
    found = _iblt_round(a, b, cells, k, seed)
    return ReconcileOutcome(
        delta_a=found[0] if found else set(),
        delta_b=found[1] if found else set(),
        scalars_sent=SCALARS_PER_CELL * cells,
        success=found is not None,
        handshake_messages=1,
    )
