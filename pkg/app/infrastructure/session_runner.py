"""
Drives the sender and receiver state machines over a message channel.

The in-process runner is lock-step in a single thread: A emits a row, B
consumes it and maybe replies. Two runs with the same inputs therefore emit
identical frame sequences. The TCP runner puts each host in its own thread;
A streams ahead of B, so only the rows B consumed are charged.
"""

import logging
import threading
from collections.abc import Iterable
from dataclasses import dataclass, field

from app.domain.exceptions import (
    ParameterRejectionError,
    ProtocolViolationError,
    SetTooLargeError,
    TransportError,
    VersionMismatchError,
)
from app.domain.protocol import (
    Abort,
    Done,
    Hello,
    ReconcileOutcome,
    Row,
    SenderState,
    hello_for,
    receiver_on_row,
    receiver_on_timeout,
    receiver_start,
    sender_next_row,
    sender_on_message,
    sender_start,
)
from app.domain.sparse_recovery import SolverConfig
from app.domain.value_objects import AbortReason, SessionParams
from app.infrastructure.transport import (
    IMessageChannel,
    channel_pair,
    tcp_accept,
    tcp_connect,
    tcp_listen,
)

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 5.0

_REJECTIONS = (VersionMismatchError, ParameterRejectionError, SetTooLargeError)


@dataclass
class SessionResult:
    outcome: ReconcileOutcome
    sender_frames: list[bytes] = field(default_factory=list)
    receiver_frames: list[bytes] = field(default_factory=list)

    @property
    def transcript(self) -> bytes:
        """A's frames followed by B's frames."""
        return b"".join(self.sender_frames) + b"".join(self.receiver_frames)


def _rejected(reason: AbortReason) -> ReconcileOutcome:
    return ReconcileOutcome(success=False, handshake_messages=2, abort_reason=reason)


def run_sender(
    channel: IMessageChannel,
    s_a: Iterable[int],
    params: SessionParams,
    timeout: float = DEFAULT_TIMEOUT,
) -> SenderState:
    """Host A: Hello, then rows until B answers with Done or Abort."""
    state = sender_start(s_a, params)
    channel.send(hello_for(params))
    while not state.finished:
        reply = channel.poll()
        if reply is not None:
            sender_on_message(state, reply)
            break
        row = sender_next_row(state)
        if row is None:
            reply = channel.recv(timeout)
            if reply is None:
                raise TransportError(f"No reply from receiver within {timeout}s")
            sender_on_message(state, reply)
            break
        channel.send(row)
    logger.debug("Sender finished after %d rows", state.next_row)
    return state


def run_receiver(
    channel: IMessageChannel,
    s_b: Iterable[int],
    solver: SolverConfig | None = None,
    timeout: float = DEFAULT_TIMEOUT,
) -> ReconcileOutcome:
    """Host B: wait for Hello, consume rows, reply Done or Abort."""
    first = channel.recv(timeout)
    if first is None:
        raise TransportError(f"No Hello within {timeout}s")
    if not isinstance(first, Hello):
        channel.send(Abort(AbortReason.OUT_OF_ORDER))
        return _rejected(AbortReason.OUT_OF_ORDER)
    try:
        state = receiver_start(s_b, first, solver)
    except _REJECTIONS as exc:
        logger.warning("Rejecting session: %s", exc)
        channel.send(Abort(AbortReason.PARAMETER_REJECTION))
        return _rejected(AbortReason.PARAMETER_REJECTION)

    while state.outcome is None:
        message = channel.recv(timeout)
        reply: Done | Abort | None
        if message is None:
            reply = receiver_on_timeout(state)
        elif isinstance(message, Row):
            reply = receiver_on_row(state, message)
        elif isinstance(message, Abort):
            state.outcome = _rejected(message.reason)
            reply = None
        else:
            raise ProtocolViolationError(f"Receiver got unexpected {type(message).__name__}")
        if reply is not None:
            channel.send(reply)
    return state.outcome


def run_inproc_session(
    s_a: Iterable[int],
    s_b: Iterable[int],
    params: SessionParams,
    solver: SolverConfig | None = None,
) -> SessionResult:
    a_end, b_end = channel_pair()
    sender = sender_start(s_a, params)
    a_end.send(hello_for(params))

    hello = b_end.poll()
    assert isinstance(hello, Hello)
    try:
        receiver = receiver_start(s_b, hello, solver)
    except _REJECTIONS as exc:
        logger.warning("Rejecting session: %s", exc)
        b_end.send(Abort(AbortReason.PARAMETER_REJECTION))
        return SessionResult(
            _rejected(AbortReason.PARAMETER_REJECTION), a_end.sent_frames, b_end.sent_frames
        )

    while receiver.outcome is None:
        row = sender_next_row(sender)
        if row is None:
            break
        a_end.send(row)
        message = b_end.poll()
        assert isinstance(message, Row)
        reply = receiver_on_row(receiver, message)
        if reply is not None:
            b_end.send(reply)
            answer = a_end.poll()
            assert answer is not None
            sender_on_message(sender, answer)

    if receiver.outcome is None:
        b_end.send(receiver_on_timeout(receiver))
    assert receiver.outcome is not None
    return SessionResult(receiver.outcome, a_end.sent_frames, b_end.sent_frames)


def run_tcp_session(
    s_a: Iterable[int],
    s_b: Iterable[int],
    params: SessionParams,
    solver: SolverConfig | None = None,
    timeout: float = DEFAULT_TIMEOUT,
    addr: str = "127.0.0.1:0",
) -> SessionResult:
    """Both hosts on loopback: B listens in a worker thread, A connects."""
    server = tcp_listen(addr)
    port = server.getsockname()[1]
    result: dict[str, object] = {}

    def serve() -> None:
        try:
            channel = tcp_accept(server, timeout)
            try:
                result["outcome"] = run_receiver(channel, s_b, solver, timeout)
                result["frames"] = channel.sent_frames
                channel.drain(timeout)
            finally:
                channel.close()
        except Exception as exc:  # surfaced on the calling thread
            result["error"] = exc

    worker = threading.Thread(target=serve, name="csiblt-receiver", daemon=True)
    worker.start()
    try:
        channel = tcp_connect(f"127.0.0.1:{port}", timeout)
        try:
            run_sender(channel, s_a, params, timeout)
            sender_frames = channel.sent_frames
        finally:
            channel.close()
    finally:
        worker.join(timeout)
        server.close()

    if "error" in result:
        raise result["error"]  # type: ignore[misc]
    if "outcome" not in result:
        raise TransportError("Receiver thread did not finish")
    return SessionResult(
        result["outcome"],  # type: ignore[arg-type]
        sender_frames,
        result["frames"],  # type: ignore[arg-type]
    )


def listen_and_receive(
    addr: str,
    s_b: Iterable[int],
    solver: SolverConfig | None = None,
    timeout: float = DEFAULT_TIMEOUT,
) -> ReconcileOutcome:
    server = tcp_listen(addr)
    try:
        channel = tcp_accept(server, None)
        try:
            outcome = run_receiver(channel, s_b, solver, timeout)
            channel.drain(timeout)
            return outcome
        finally:
            channel.close()
    finally:
        server.close()


def connect_and_send(
    addr: str,
    s_a: Iterable[int],
    params: SessionParams,
    timeout: float = DEFAULT_TIMEOUT,
) -> SenderState:
    channel = tcp_connect(addr, timeout)
    try:
        return run_sender(channel, s_a, params, timeout)
    finally:
        channel.close()
