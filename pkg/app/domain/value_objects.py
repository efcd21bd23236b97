"""
Value Objects - immutable data shared by the reconciliation domain.
"""

from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import NewType

from .exceptions import InvalidElementError, InvalidParametersError

Element = NewType("Element", int)

ELEMENT_MAX = 1 << 32  # exclusive
PROTOCOL_VERSION = 1


def validate_element(value: int) -> Element:
    """Return value as an Element, or raise if it is outside [1, 2^32)."""
    if isinstance(value, bool) or not 1 <= int(value) < ELEMENT_MAX:
        raise InvalidElementError(f"Element out of range [1, 2^32): {value}")
    return Element(int(value))


class DBound(IntEnum):
    """Upper bound on the difference size, selects the table length."""
    AT_MOST_N = 0   # b = 2n
    AT_MOST_2N = 1  # b = 4n

    @property
    def length_factor(self) -> int:
        return 2 if self is DBound.AT_MOST_N else 4


class AbortReason(IntEnum):
    """Reason codes carried by the Abort message."""
    OUT_OF_ORDER = 0
    TIMEOUT = 1
    PARAMETER_REJECTION = 2
    ROWS_EXHAUSTED = 3


class ProtocolName(str, Enum):
    CS_IBLT = "cs-iblt"
    IBLT_GUESS = "iblt-guess"
    IBLT_ORACLE = "iblt-oracle"
    NAIVE = "naive"
    BLOOM = "bloom"


class TransportName(str, Enum):
    INPROC = "inproc"
    TCP = "tcp"


class SolverKind(str, Enum):
    OMP = "omp"                      # greedy orthogonal matching pursuit
    BASIS_PURSUIT = "basis-pursuit"  # l1 linear program (HiGHS)


@dataclass(frozen=True, slots=True)
class IbltCell:
    """Value Object - one (sum, count) cell of an IBLT."""
    sum: int = 0
    count: int = 0


@dataclass(frozen=True, slots=True)
class MatrixSpec:
    """Value Object - identifies the shared measurement matrix."""
    seed: int
    b: int
    max_rows: int | None = None

    def __post_init__(self) -> None:
        if self.b < 1:
            raise InvalidParametersError(f"Matrix width must be positive, got {self.b}")
        if not 0 <= self.seed < 1 << 64:
            raise InvalidParametersError(f"Matrix seed must fit in 64 bits: {self.seed}")
        if self.max_rows is None:
            object.__setattr__(self, "max_rows", self.b)

    @property
    def row_budget(self) -> int:
        return self.b if self.max_rows is None else self.max_rows


@dataclass(frozen=True, slots=True)
class MeasurementRow:
    """Value Object - row i of y = Phi . IBLT for both IBLT columns."""
    index: int
    y_sum: float
    y_count: float

    def __sub__(self, other: "MeasurementRow") -> "MeasurementRow":
        if self.index != other.index:
            raise InvalidParametersError(
                f"Cannot subtract rows {self.index} and {other.index}"
            )
        return MeasurementRow(self.index, self.y_sum - other.y_sum, self.y_count - other.y_count)


@dataclass(frozen=True, slots=True)
class SessionParams:
    """Value Object - parameters both hosts agree on in the Hello exchange."""
    n: int
    k: int
    b: int
    matrix_seed: int
    hash_seed: int
    d_bound: DBound = DBound.AT_MOST_N

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidParametersError(f"n must be at least 1, got {self.n}")
        if self.k < 2:
            raise InvalidParametersError(f"k must be at least 2, got {self.k}")
        if self.b != self.d_bound.length_factor * self.n:
            raise InvalidParametersError(
                f"b={self.b} does not follow the {self.d_bound.name} rule for n={self.n}"
            )

    @property
    def matrix_spec(self) -> MatrixSpec:
        return MatrixSpec(seed=self.matrix_seed, b=self.b)
