"""Domain layer - Pure Python reconciliation logic."""

from app.domain.baselines import (
    BloomFilter,
    GuessSchedule,
    bloom_reconcile,
    guess_overshoot_cells,
    guess_schedule,
    guess_schedule_cost_cells,
    iblt_guess_reconcile,
    iblt_oracle_reconcile,
    naive_reconcile,
)
from app.domain.cs_encode import encode_prefix, encode_row, matrix_row
from app.domain.iblt import ExtractResult, Iblt, cell_indices, list_entries, list_entries_against
from app.domain.protocol import (
    Abort,
    Done,
    Hello,
    ReconcileOutcome,
    ReceiverState,
    Row,
    SenderState,
    apply_reconciliation,
    classify,
    hello_for,
    negotiate,
    params_from_hello,
    receiver_exhausted,
    receiver_on_row,
    receiver_on_timeout,
    receiver_start,
    sender_next_row,
    sender_start,
)
from app.domain.sparse_recovery import (
    RecoveredIblt,
    RecoveryProblem,
    SolverConfig,
    quantize,
    recover_difference,
    solve_l1,
)
from app.domain.value_objects import (
    AbortReason,
    DBound,
    Element,
    IbltCell,
    MatrixSpec,
    MeasurementRow,
    SessionParams,
)
