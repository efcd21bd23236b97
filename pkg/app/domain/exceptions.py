"""
Domain errors. Everything subclasses ValueError so the API layer can map
them to HTTP 400 with a single handler.
"""


class ReconciliationError(ValueError):
    """Base class for all reconciliation errors."""


class InvalidParametersError(ReconciliationError):
    """Table, matrix or session parameters out of range."""


class ParameterMismatchError(ReconciliationError):
    """Two tables with different (b, k, seed) were combined."""


class DimensionMismatchError(ReconciliationError):
    """Matrix width does not match the table length."""


class RowBudgetExceededError(ReconciliationError):
    """Requested a measurement row at or beyond max_rows."""


class NoConvergenceError(ReconciliationError):
    """The sparse solver ran out of iterations."""


class SetTooLargeError(ReconciliationError):
    """A host set is larger than the negotiated bound n."""


class InvalidElementError(ReconciliationError):
    """Element outside [1, 2^32)."""


class ClassificationError(ReconciliationError):
    """Classification requested on a failed extraction."""


class InconsistentDeltasError(ReconciliationError):
    """Recovered differences contradict the local set."""


class ProtocolViolationError(ReconciliationError):
    """Message arrived out of order or in the wrong session phase."""


class VersionMismatchError(ReconciliationError):
    """Peer speaks a different protocol version."""


class ParameterRejectionError(ReconciliationError):
    """Peer proposed session parameters we refuse."""


class InfeasibleParametersError(ReconciliationError):
    """Instance generator asked for an impossible (n, d) combination."""


class MalformedCsvError(ReconciliationError):
    """Results CSV does not follow the fixed schema."""


class WireFormatError(ReconciliationError):
    """Frame could not be decoded."""


class TransportError(ReconciliationError):
    """Channel closed, timed out or failed underneath a session."""
