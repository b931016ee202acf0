import random
import struct

import pytest

from admire.codec import Message, MsgType, decode_message, encode_message
from admire.errors import CodecError


def discover(src="n1", dst="*", corr=7, ttl=3, payload=b""):
    return Message(MsgType.DISCOVER, src, dst, corr, ttl, payload)


class TestRoundTrip:
    def test_minimal_discover(self):
        m = discover()
        assert decode_message(encode_message(m)) == m

    def test_empty_ids_and_payload(self):
        m = Message(MsgType.TASK_RESULT, "", "", 0, 0, b"")
        assert decode_message(encode_message(m)) == m

    def test_unicode_node_ids(self):
        m = Message(MsgType.DATA_TRANSFER, "né", "α", 1, 1, b"\x00\xff")
        assert decode_message(encode_message(m)) == m

    def test_fuzz_round_trip(self):
        rng = random.Random(1009)
        types = list(MsgType)
        for _ in range(1000):
            m = Message(
                msg_type=rng.choice(types),
                src="".join(rng.choice("abcxyz-_.0189") for _ in range(rng.randint(0, 12))),
                dst="".join(rng.choice("abcxyz-_.0189") for _ in range(rng.randint(0, 12))),
                correlation_id=rng.randrange(1 << 64),
                ttl=rng.randrange(1 << 16),
                payload=bytes(rng.randrange(256) for _ in range(rng.randint(0, 64))),
            )
            assert decode_message(encode_message(m)) == m


class TestGoldenFrame:
    def test_discover_frame_byte_layout(self):
        # frame built field by field with struct, independent of the encoder
        m = discover(src="alpha", dst="beta", corr=0x1122334455667788, ttl=9,
                     payload=b"hi")
        expected = (
            b"ADMR"
            + bytes([1, 1])
            + struct.pack(">QH", 0x1122334455667788, 9)
            + struct.pack(">H", 5) + b"alpha"
            + struct.pack(">H", 4) + b"beta"
            + struct.pack(">I", 2) + b"hi"
        )
        assert encode_message(m) == expected

    def test_stable_across_calls(self):
        m = discover(src="n-0", dst="n-1", corr=42, ttl=2, payload=b"\x01\x02")
        assert encode_message(m) == encode_message(m)

    def test_msg_type_byte_values(self):
        for t, value in (
            (MsgType.DISCOVER, 1),
            (MsgType.DISCOVER_HIT, 2),
            (MsgType.TASK_SUBMIT, 3),
            (MsgType.TASK_RESULT, 4),
            (MsgType.DATA_TRANSFER, 5),
        ):
            frame = encode_message(Message(t, "a", "b", 0, 0))
            assert frame[5] == value


class TestMalformedFrames:
    def test_bad_magic(self):
        frame = bytearray(encode_message(discover()))
        frame[0:4] = b"NOPE"
        with pytest.raises(CodecError) as err:
            decode_message(bytes(frame))
        assert err.value.code == "bad-magic"

    def test_unsupported_version(self):
        frame = bytearray(encode_message(discover()))
        frame[4] = 2
        with pytest.raises(CodecError) as err:
            decode_message(bytes(frame))
        assert err.value.code == "unsupported-version"

    def test_truncated_payload(self):
        frame = encode_message(discover(payload=b"abcdef"))
        with pytest.raises(CodecError) as err:
            decode_message(frame[:-3])
        assert err.value.code == "malformed-frame"
        assert "offset" in err.value.message

    def test_every_truncation_point_rejected(self):
        frame = encode_message(discover(src="node-a", dst="node-b", payload=b"xyz"))
        for cut in range(len(frame)):
            with pytest.raises(CodecError):
                decode_message(frame[:cut])

    def test_trailing_bytes(self):
        frame = encode_message(discover())
        with pytest.raises(CodecError) as err:
            decode_message(frame + b"\x00")
        assert err.value.code == "malformed-frame"

    def test_unknown_msg_type(self):
        frame = bytearray(encode_message(discover()))
        frame[5] = 99
        with pytest.raises(CodecError) as err:
            decode_message(bytes(frame))
        assert err.value.code == "malformed-frame"

    def test_encode_rejects_out_of_range(self):
        with pytest.raises(CodecError):
            encode_message(discover(corr=1 << 64))
        with pytest.raises(CodecError):
            encode_message(discover(ttl=1 << 16))
