"""
Bit-exact binary encoding of protocol messages.

frame   = u32 payload length | u8 message type | payload      (little-endian)
Hello   0x01  u8 version, u64 n, u8 k, u64 b, u64 matrix_seed, u64 hash_seed, u8 d_bound
Row     0x02  u32 index, f64 y_sum, f64 y_count
Done    0x03  u32 |delta_a|, u32 |delta_b|
Abort   0x04  u8 reason
"""

import struct

from app.domain.exceptions import WireFormatError
from app.domain.protocol import Abort, Done, Hello, Message, Row
from app.domain.value_objects import AbortReason, DBound

HEADER = struct.Struct("<IB")

MSG_HELLO = 0x01
MSG_ROW = 0x02
MSG_DONE = 0x03
MSG_ABORT = 0x04

_PAYLOADS: dict[int, struct.Struct] = {
    MSG_HELLO: struct.Struct("<BQBQQQB"),
    MSG_ROW: struct.Struct("<Idd"),
    MSG_DONE: struct.Struct("<II"),
    MSG_ABORT: struct.Struct("<B"),
}


def _fields(message: Message) -> tuple[int, tuple]:
    if isinstance(message, Hello):
        return MSG_HELLO, (
            message.version, message.n, message.k, message.b,
            message.matrix_seed, message.hash_seed, int(message.d_bound),
        )
    if isinstance(message, Row):
        return MSG_ROW, (message.index, message.y_sum, message.y_count)
    if isinstance(message, Done):
        return MSG_DONE, (message.delta_a_count, message.delta_b_count)
    if isinstance(message, Abort):
        return MSG_ABORT, (int(message.reason),)
    raise WireFormatError(f"Not a protocol message: {message!r}")


def encode_message(message: Message) -> bytes:
    msg_type, values = _fields(message)
    try:
        payload = _PAYLOADS[msg_type].pack(*values)
    except struct.error as exc:
        raise WireFormatError(f"Cannot encode {message!r}: {exc}") from exc
    return HEADER.pack(len(payload), msg_type) + payload


def decode_payload(msg_type: int, payload: bytes) -> Message:
    layout = _PAYLOADS.get(msg_type)
    if layout is None:
        raise WireFormatError(f"Unknown message type 0x{msg_type:02x}")
    if len(payload) != layout.size:
        raise WireFormatError(
            f"Payload of type 0x{msg_type:02x} has {len(payload)} bytes, expected {layout.size}"
        )
    values = layout.unpack(payload)
    try:
        if msg_type == MSG_HELLO:
            version, n, k, b, matrix_seed, hash_seed, d_bound = values
            return Hello(version, n, k, b, matrix_seed, hash_seed, DBound(d_bound))
        if msg_type == MSG_ROW:
            return Row(*values)
        if msg_type == MSG_DONE:
            return Done(*values)
        return Abort(AbortReason(values[0]))
    except ValueError as exc:
        raise WireFormatError(f"Bad field in message type 0x{msg_type:02x}: {exc}") from exc


def decode_message(frame: bytes) -> Message:
    """Decode exactly one complete frame."""
    if len(frame) < HEADER.size:
        raise WireFormatError(f"Frame of {len(frame)} bytes is shorter than the header")
    length, msg_type = HEADER.unpack_from(frame)
    if len(frame) != HEADER.size + length:
        raise WireFormatError(
            f"Frame declares {length} payload bytes but carries {len(frame) - HEADER.size}"
        )
    return decode_payload(msg_type, frame[HEADER.size:])


class FrameDecoder:
    """Incremental decoder: feed arbitrary byte chunks, get whole messages back."""

    def __init__(self) -> None:
        self._buffer = bytearray()

    def feed(self, data: bytes) -> list[Message]:
        self._buffer.extend(data)
        messages: list[Message] = []
        while len(self._buffer) >= HEADER.size:
            length, msg_type = HEADER.unpack_from(self._buffer)
            end = HEADER.size + length
            if len(self._buffer) < end:
                break
            payload = bytes(self._buffer[HEADER.size:end])
            del self._buffer[:end]
            messages.append(decode_payload(msg_type, payload))
        return messages

    @property
    def pending(self) -> int:
        return len(self._buffer)
