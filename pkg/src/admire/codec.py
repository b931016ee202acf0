"""Bit-exact wire codec for grid messages.

Frame layout: 4 magic bytes ``ADMR``; 1 version byte (0x01); 1 msg_type byte;
8-byte big-endian correlation id; 2-byte big-endian ttl; 2-byte length +
UTF-8 src id; 2-byte length + UTF-8 dst id; 4-byte length + payload bytes.
A socket backend can speak this format without touching the upper layers.
"""

import struct
from dataclasses import dataclass, field
from enum import IntEnum

from .errors import CodecError

MAGIC = b"ADMR"
VERSION = 1


class MsgType(IntEnum):
    DISCOVER = 1
    DISCOVER_HIT = 2
    TASK_SUBMIT = 3
    TASK_RESULT = 4
    DATA_TRANSFER = 5


@dataclass(frozen=True)
class Message:
    msg_type: MsgType
    src: str
    dst: str
    correlation_id: int
    ttl: int
    payload: bytes = field(default=b"")


def encode_message(m: Message) -> bytes:
    if not 0 <= m.correlation_id < 1 << 64:
        raise CodecError("malformed-frame", "correlation_id out of range")
    if not 0 <= m.ttl < 1 << 16:
        raise CodecError("malformed-frame", "ttl out of range")
    src = m.src.encode("utf-8")
    dst = m.dst.encode("utf-8")
    if len(src) >= 1 << 16 or len(dst) >= 1 << 16:
        raise CodecError("malformed-frame", "node id too long")
    if len(m.payload) >= 1 << 32:
        raise CodecError("malformed-frame", "payload too long")
    parts = [
        MAGIC,
        bytes([VERSION, int(m.msg_type)]),
        struct.pack(">QH", m.correlation_id, m.ttl),
        struct.pack(">H", len(src)),
        src,
        struct.pack(">H", len(dst)),
        dst,
        struct.pack(">I", len(m.payload)),
        m.payload,
    ]
    return b"".join(parts)


def decode_message(data: bytes) -> Message:
    def need(offset: int, n: int, what: str) -> bytes:
        if offset + n > len(data):
            raise CodecError(
                "malformed-frame", f"offset {offset}: truncated while reading {what}"
            )
        return data[offset : offset + n]

    if need(0, 4, "magic") != MAGIC:
        raise CodecError("bad-magic", "frame does not start with ADMR")
    version = need(4, 1, "version")[0]
    if version != VERSION:
        raise CodecError("unsupported-version", f"version byte {version}")
    type_byte = need(5, 1, "msg_type")[0]
    try:
        msg_type = MsgType(type_byte)
    except ValueError:
        raise CodecError("malformed-frame", f"offset 5: unknown msg_type {type_byte}") from None
    correlation_id, ttl = struct.unpack(">QH", need(6, 10, "header"))
    offset = 16
    ids = []
    for what in ("src", "dst"):
        (length,) = struct.unpack(">H", need(offset, 2, f"{what} length"))
        offset += 2
        raw = need(offset, length, what)
        offset += length
        try:
            ids.append(raw.decode("utf-8"))
        except UnicodeDecodeError:
            raise CodecError(
                "malformed-frame", f"offset {offset - length}: {what} not valid UTF-8"
            ) from None
    (plen,) = struct.unpack(">I", need(offset, 4, "payload length"))
    offset += 4
    payload = need(offset, plen, "payload")
    offset += plen
    if offset != len(data):
        raise CodecError(
            "malformed-frame", f"offset {offset}: {len(data) - offset} trailing bytes"
        )
    return Message(
        msg_type=msg_type,
        src=ids[0],
        dst=ids[1],
        correlation_id=correlation_id,
        ttl=ttl,
        payload=payload,
    )
