"""
CS-IBLT reconciliation protocol.

Host A (sender) streams measurement rows of Phi . IBLT_A. Host B (receiver)
subtracts its own rows, attempts sparse recovery of IBLT_A - IBLT_B after each
row, peels the recovered table and acknowledges with Done once peeling
succeeds. Both state machines are plain data plus functions; the session
runner in the infrastructure layer moves their messages over a channel.
"""

import logging
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .cs_encode import encode_with_row, gaussian_row
from .exceptions import (
    ClassificationError,
    InconsistentDeltasError,
    InvalidParametersError,
    ParameterRejectionError,
    ProtocolViolationError,
    SetTooLargeError,
    VersionMismatchError,
)
from .iblt import ExtractResult, Iblt, build, list_entries_against
from .sparse_recovery import RecoveryProblem, SolverConfig, recover_difference
from .value_objects import (
    PROTOCOL_VERSION,
    AbortReason,
    DBound,
    Element,
    MeasurementRow,
    SessionParams,
    validate_element,
)

logger = logging.getLogger(__name__)

# --- messages -------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Hello:
    version: int
    n: int
    k: int
    b: int
    matrix_seed: int
    hash_seed: int
    d_bound: DBound = DBound.AT_MOST_N


@dataclass(frozen=True, slots=True)
class Row:
    index: int
    y_sum: float
    y_count: float

    @classmethod
    def from_measurement(cls, row: MeasurementRow) -> "Row":
        return cls(row.index, row.y_sum, row.y_count)

    @property
    def measurement(self) -> MeasurementRow:
        return MeasurementRow(self.index, self.y_sum, self.y_count)


@dataclass(frozen=True, slots=True)
class Done:
    delta_a_count: int
    delta_b_count: int


@dataclass(frozen=True, slots=True)
class Abort:
    reason: AbortReason


Message = Union[Hello, Row, Done, Abort]


# --- outcome --------------------------------------------------------------


@dataclass
class ReconcileOutcome:
    """Recovered differences plus communication accounting (64-bit scalar units)."""
    delta_a: set[Element] = field(default_factory=set)
    delta_b: set[Element] = field(default_factory=set)
    rows_used: int = 0
    scalars_sent: int = 0
    success: bool = False
    rounds: int = 1
    handshake_messages: int = 0
    abort_reason: AbortReason | None = None
    fallback_used: bool = False


# --- negotiation ----------------------------------------------------------


def negotiate(
    n: int,
    k: int,
    d_bound: DBound = DBound.AT_MOST_N,
    seeds: tuple[int, int] = (0, 0),
) -> SessionParams:
    """Session parameters with b = 2n (AT_MOST_N) or 4n (AT_MOST_2N)."""
    matrix_seed, hash_seed = seeds
    if n < 1 or k < 2:
        raise ParameterRejectionError(f"Rejecting n={n}, k={k}: need n >= 1 and k >= 2")
    try:
        return SessionParams(
            n=n,
            k=k,
            b=DBound(d_bound).length_factor * n,
            matrix_seed=matrix_seed,
            hash_seed=hash_seed,
            d_bound=DBound(d_bound),
        )
    except InvalidParametersError as exc:
        raise ParameterRejectionError(str(exc)) from exc


def hello_for(params: SessionParams) -> Hello:
    return Hello(
        version=PROTOCOL_VERSION,
        n=params.n,
        k=params.k,
        b=params.b,
        matrix_seed=params.matrix_seed,
        hash_seed=params.hash_seed,
        d_bound=params.d_bound,
    )


def params_from_hello(hello: Hello) -> SessionParams:
    if hello.version != PROTOCOL_VERSION:
        raise VersionMismatchError(
            f"Peer speaks version {hello.version}, expected {PROTOCOL_VERSION}"
        )
    if not 0 <= hello.matrix_seed < 1 << 64 or not 0 <= hello.hash_seed < 1 << 64:
        raise ParameterRejectionError("Seeds must fit in 64 bits")
    try:
        return SessionParams(
            n=hello.n,
            k=hello.k,
            b=hello.b,
            matrix_seed=hello.matrix_seed,
            hash_seed=hello.hash_seed,
            d_bound=DBound(hello.d_bound),
        )
    except (InvalidParametersError, ValueError) as exc:
        raise ParameterRejectionError(str(exc)) from exc


def _host_table(elements: Iterable[int], params: SessionParams) -> tuple[set[Element], Iblt]:
    members = {validate_element(e) for e in elements}
    if len(members) > params.n:
        raise SetTooLargeError(f"Set of {len(members)} elements exceeds n={params.n}")
    return members, build(members, params.b, params.k, params.hash_seed)


# --- sender ---------------------------------------------------------------


@dataclass
class SenderState:
    params: SessionParams
    table: Iblt
    next_row: int = 0
    finished: bool = False
    acknowledged: bool = False


def sender_start(s_a: Iterable[int], params: SessionParams) -> SenderState:
    _, table = _host_table(s_a, params)
    return SenderState(params=params, table=table)


def sender_next_row(state: SenderState) -> Row | None:
    """Next measurement row, or None once all b rows have been sent."""
    if state.finished:
        raise ProtocolViolationError("Sender already finished")
    if state.next_row >= state.params.b:
        state.finished = True
        return None
    i = state.next_row
    phi_row = gaussian_row(state.params.matrix_seed, i, state.params.b)
    state.next_row += 1
    return Row.from_measurement(encode_with_row(state.table, phi_row, i))


def sender_on_message(state: SenderState, message: Message) -> None:
    if isinstance(message, (Done, Abort)):
        state.finished = True
        state.acknowledged = isinstance(message, Done)
    else:
        raise ProtocolViolationError(f"Sender cannot handle {type(message).__name__}")


# --- receiver -------------------------------------------------------------


@dataclass
class ReceiverState:
    params: SessionParams
    table: Iblt
    members: set[Element]
    solver: SolverConfig = field(default_factory=SolverConfig)
    received_rows: list[MeasurementRow] = field(default_factory=list)
    outcome: ReconcileOutcome | None = None
    attempts: int = 0
    _stalled: bytes | None = field(default=None, init=False, repr=False)
    _phi: np.ndarray = field(init=False, repr=False)
    _diff_sum: np.ndarray = field(init=False, repr=False)
    _diff_count: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        b = self.params.b
        self._phi = np.zeros((b, b), dtype=np.float64)
        self._diff_sum = np.zeros(b, dtype=np.float64)
        self._diff_count = np.zeros(b, dtype=np.float64)

    @property
    def closed(self) -> bool:
        return self.outcome is not None

    def problem(self) -> RecoveryProblem:
        m = len(self.received_rows)
        return RecoveryProblem(
            phi_rows=self._phi[:m],
            y_sum=self._diff_sum[:m],
            y_count=self._diff_count[:m],
        )


def receiver_start(
    s_b: Iterable[int],
    hello: Hello | SessionParams,
    solver: SolverConfig | None = None,
) -> ReceiverState:
    params = params_from_hello(hello) if isinstance(hello, Hello) else hello
    members, table = _host_table(s_b, params)
    return ReceiverState(
        params=params, table=table, members=members, solver=solver or SolverConfig()
    )


def _fail(state: ReceiverState, reason: AbortReason) -> Abort:
    m = len(state.received_rows)
    state.outcome = ReconcileOutcome(
        rows_used=m, scalars_sent=2 * m, success=False, handshake_messages=2, abort_reason=reason
    )
    logger.warning("Session aborted after %d rows: %s", m, reason.name)
    return Abort(reason)


def _attempt(state: ReceiverState) -> tuple[set[Element], set[Element]] | None:
    m = len(state.received_rows)
    state.attempts += 1
    recovered = recover_difference(
        state.problem(),
        (state.params.b, state.params.k, state.params.hash_seed),
        state.solver,
    )
    if not recovered.verified:
        return None
    key = recovered.table.sums.tobytes() + recovered.table.counts.tobytes()
    if key == state._stalled:
        return None
    extract = list_entries_against(recovered.table, state.members)
    if not extract.success:
        state._stalled = key
        logger.debug("Recovered table at m=%d did not peel (%d cells left)", m, extract.residual_cells)
        return None
    delta_a, delta_b = classify(extract)
    if not delta_b <= state.members or delta_a & state.members:
        logger.warning("Discarding recovery at m=%d that contradicts the local set", m)
        return None
    return delta_a, delta_b


def receiver_on_row(state: ReceiverState, row: Row) -> Done | Abort | None:
    """
    Consume one row. Returns None to keep streaming, Done once the differences
    are recovered, or Abort on a gap in row indices or an exhausted budget.
    """
    if state.closed:
        raise ProtocolViolationError("Receiver session already closed")
    m = len(state.received_rows)
    if row.index != m:
        logger.warning("Expected row %d, got %d", m, row.index)
        return _fail(state, AbortReason.OUT_OF_ORDER)

    phi_row = gaussian_row(state.params.matrix_seed, m, state.params.b)
    diff = row.measurement - encode_with_row(state.table, phi_row, m)
    state._phi[m] = phi_row
    state._diff_sum[m] = diff.y_sum
    state._diff_count[m] = diff.y_count
    state.received_rows.append(row.measurement)
    m += 1

    last_row = m == state.params.b
    if m % state.solver.attempt_every == 0 or last_row:
        found = _attempt(state)
        logger.debug("Recovery attempt %d at m=%d: %s", state.attempts, m, found is not None)
        if found is not None:
            delta_a, delta_b = found
            state.outcome = ReconcileOutcome(
                delta_a=delta_a,
                delta_b=delta_b,
                rows_used=m,
                scalars_sent=2 * m,
                success=True,
                handshake_messages=2,
            )
            logger.info(
                "Reconciled with %d rows: |delta_a|=%d |delta_b|=%d", m, len(delta_a), len(delta_b)
            )
            return Done(len(delta_a), len(delta_b))
    if last_row:
        return receiver_exhausted(state)
    return None


def receiver_exhausted(state: ReceiverState) -> Abort:
    """Abort once all b rows were consumed without a verified recovery."""
    if len(state.received_rows) < state.params.b:
        raise ProtocolViolationError(
            f"Only {len(state.received_rows)} of {state.params.b} rows consumed"
        )
    return _fail(state, AbortReason.ROWS_EXHAUSTED)


def receiver_on_timeout(state: ReceiverState) -> Abort:
    return _fail(state, AbortReason.TIMEOUT)


# --- classification and application --------------------------------------


def classify(extract: ExtractResult) -> tuple[set[Element], set[Element]]:
    """Positive extractions are Delta_A; negated negatives are Delta_B."""
    if not extract.success:
        raise ClassificationError("Cannot classify a failed extraction")
    return set(extract.positives), set(extract.negatives)


def apply_reconciliation(
    s_b: Iterable[int], delta_a: Iterable[int], delta_b: Iterable[int]
) -> set[Element]:
    """(S_B | Delta_A) - Delta_B, refusing deltas that contradict S_B."""
    local = {Element(e) for e in s_b}
    add = {Element(e) for e in delta_a}
    remove = {Element(e) for e in delta_b}
    if not remove <= local:
        raise InconsistentDeltasError(
            f"{len(remove - local)} elements of Delta_B are not in S_B"
        )
    if add & local:
        raise InconsistentDeltasError(f"{len(add & local)} elements of Delta_A already in S_B")
    return (local | add) - remove
