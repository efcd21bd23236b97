"""
Message channels between the two hosts: an in-process queue pair and a TCP
stream socket. Both move encoded frames, so the codec is exercised either way.
"""

import logging
import queue
import select
import socket
from abc import ABC, abstractmethod

from app.domain.exceptions import TransportError
from app.domain.protocol import Message
from app.infrastructure.wire import FrameDecoder, encode_message

logger = logging.getLogger(__name__)

_RECV_CHUNK = 65536


class IMessageChannel(ABC):

    def __init__(self) -> None:
        self.sent_frames: list[bytes] = []

    def send(self, message: Message) -> None:
        frame = encode_message(message)
        self.sent_frames.append(frame)
        self._send_frame(frame)

    @abstractmethod
    def _send_frame(self, frame: bytes) -> None:
        ...

    @abstractmethod
    def recv(self, timeout: float | None) -> Message | None:
        """Next message, or None if nothing arrived within timeout seconds."""
        ...

    def poll(self) -> Message | None:
        return self.recv(0.0)

    def drain(self, timeout: float | None) -> None:
        """Discard incoming messages until the peer goes quiet or closes."""
        try:
            while self.recv(timeout) is not None:
                pass
        except TransportError:
            pass

    def close(self) -> None:
        pass


class QueueChannel(IMessageChannel):
    """One end of an in-process duplex link."""

    def __init__(self, outbox: "queue.Queue[bytes]", inbox: "queue.Queue[bytes]") -> None:
        super().__init__()
        self._outbox = outbox
        self._inbox = inbox
        self._decoder = FrameDecoder()
        self._ready: list[Message] = []

    def _send_frame(self, frame: bytes) -> None:
        self._outbox.put(frame)

    def recv(self, timeout: float | None) -> Message | None:
        while not self._ready:
            try:
                if timeout is not None and timeout <= 0:
                    chunk = self._inbox.get_nowait()
                else:
                    chunk = self._inbox.get(timeout=timeout)
            except queue.Empty:
                return None
            self._ready.extend(self._decoder.feed(chunk))
        return self._ready.pop(0)


def channel_pair() -> tuple[QueueChannel, QueueChannel]:
    """(host A end, host B end) of a fresh in-process link."""
    a_to_b: queue.Queue[bytes] = queue.Queue()
    b_to_a: queue.Queue[bytes] = queue.Queue()
    return QueueChannel(a_to_b, b_to_a), QueueChannel(b_to_a, a_to_b)


class TcpChannel(IMessageChannel):
    """Length-prefixed frames over a connected stream socket."""

    def __init__(self, sock: socket.socket) -> None:
        super().__init__()
        self._sock = sock
        self._decoder = FrameDecoder()
        self._ready: list[Message] = []

    def _send_frame(self, frame: bytes) -> None:
        try:
            self._sock.sendall(frame)
        except OSError as exc:
            raise TransportError(f"Send failed: {exc}") from exc

    def recv(self, timeout: float | None) -> Message | None:
        while not self._ready:
            try:
                readable, _, _ = select.select([self._sock], [], [], timeout)
                if not readable:
                    return None
                chunk = self._sock.recv(_RECV_CHUNK)
            except OSError as exc:
                raise TransportError(f"Receive failed: {exc}") from exc
            if not chunk:
                raise TransportError("Peer closed the connection")
            self._ready.extend(self._decoder.feed(chunk))
        return self._ready.pop(0)

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            logger.debug("Socket already closed")


def parse_address(addr: str) -> tuple[str, int]:
    host, sep, port = addr.rpartition(":")
    if not sep or not port.isdigit():
        raise TransportError(f"Address must look like host:port, got {addr!r}")
    return host or "127.0.0.1", int(port)


def tcp_listen(addr: str) -> socket.socket:
    try:
        return socket.create_server(parse_address(addr))
    except OSError as exc:
        raise TransportError(f"Cannot listen on {addr}: {exc}") from exc


def tcp_accept(server: socket.socket, timeout: float | None) -> TcpChannel:
    server.settimeout(timeout)
    try:
        conn, peer = server.accept()
    except OSError as exc:
        raise TransportError(f"No peer connected: {exc}") from exc
    conn.settimeout(None)
    logger.info("Accepted connection from %s:%d", *peer[:2])
    return TcpChannel(conn)


def tcp_connect(addr: str, timeout: float | None) -> TcpChannel:
    try:
        sock = socket.create_connection(parse_address(addr), timeout=timeout)
    except OSError as exc:
        raise TransportError(f"Cannot connect to {addr}: {exc}") from exc
    sock.settimeout(None)
    return TcpChannel(sock)
