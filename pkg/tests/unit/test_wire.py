"""
Unit tests - binary message codec against golden frames.
"""

import struct

import pytest

from app.domain.exceptions import WireFormatError
from app.domain.protocol import Abort, Done, Hello, Row
from app.domain.value_objects import AbortReason, DBound
from app.infrastructure.wire import FrameDecoder, decode_message, encode_message

GOLDEN = [
    (
        Hello(version=1, n=7, k=2, b=14, matrix_seed=3, hash_seed=7, d_bound=DBound.AT_MOST_N),
        bytes.fromhex(
            "23000000" "01"
            "01" "0700000000000000" "02" "0e00000000000000"
            "0300000000000000" "0700000000000000" "00"
        ),
    ),
    (
        Row(index=0, y_sum=1.0, y_count=-2.0),
        bytes.fromhex("14000000" "02" "00000000" "000000000000f03f" "00000000000000c0"),
    ),
    (
        Done(delta_a_count=1, delta_b_count=1),
        bytes.fromhex("08000000" "03" "01000000" "01000000"),
    ),
    (
        Abort(AbortReason.TIMEOUT),
        bytes.fromhex("01000000" "04" "01"),
    ),
]


class TestGoldenFrames:
    """Bit-exact encoding of all four message types."""

    @pytest.mark.parametrize("message,frame", GOLDEN)
    def test_encode(self, message, frame):
        assert encode_message(message) == frame

    @pytest.mark.parametrize("message,frame", GOLDEN)
    def test_decode_and_reencode(self, message, frame):
        decoded = decode_message(frame)
        assert decoded == message
        assert encode_message(decoded) == frame

    def test_hello_frame_size(self):
        assert len(GOLDEN[0][1]) == 5 + 35


class TestMalformedFrames:
    """Decoder rejections."""

    def test_unknown_type(self):
        with pytest.raises(WireFormatError, match="Unknown message type"):
            decode_message(bytes.fromhex("01000000" "09" "00"))

    def test_wrong_payload_length(self):
        with pytest.raises(WireFormatError):
            decode_message(bytes.fromhex("02000000" "04" "0100"))

    def test_truncated_frame(self):
        with pytest.raises(WireFormatError):
            decode_message(GOLDEN[1][1][:-1])

    def test_unknown_abort_reason(self):
        with pytest.raises(WireFormatError, match="Bad field"):
            decode_message(bytes.fromhex("01000000" "04" "07"))

    def test_field_out_of_range(self):
        with pytest.raises(WireFormatError):
            encode_message(Done(delta_a_count=-1, delta_b_count=0))


class TestFrameDecoder:
    """Incremental decoding of a byte stream."""

    def test_byte_by_byte(self):
        stream = b"".join(frame for _, frame in GOLDEN)
        decoder = FrameDecoder()
        out = []
        for i in range(len(stream)):
            out.extend(decoder.feed(stream[i:i + 1]))
        assert out == [message for message, _ in GOLDEN]
        assert decoder.pending == 0

    def test_partial_frame_is_buffered(self):
        decoder = FrameDecoder()
        assert decoder.feed(GOLDEN[2][1][:6]) == []
        assert decoder.pending == 6
        assert decoder.feed(GOLDEN[2][1][6:]) == [GOLDEN[2][0]]

    def test_row_float_bits_survive(self):
        row = Row(index=5, y_sum=-0.1, y_count=1e300)
        frame = encode_message(row)
        assert struct.unpack_from("<d", frame, 9)[0] == -0.1
        assert decode_message(frame) == row
