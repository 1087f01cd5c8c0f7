"""Recursive length prefix (RLP) encoding, the serialization used by
legacy-format public-chain transactions.

Items are byte strings or (nested) lists of items. Integers are encoded as
minimal big-endian byte strings (zero is the empty string). Decoding is
strict: non-canonical encodings — long form where short form fits, length
bytes with leading zeros, a single low byte wrapped in a string header —
are rejected, so encode(decode(x)) == x always holds.
"""

from __future__ import annotations

RlpItem = bytes | list["RlpItem"]


class RlpError(ValueError):
    """Raised for non-canonical or truncated RLP input."""


def encode_int(value: int) -> bytes:
    """Minimal big-endian representation; zero is the empty string."""
    if value < 0:
        raise ValueError(f"cannot RLP-encode negative integer {value}")
    if value == 0:
        return b""
    return value.to_bytes((value.bit_length() + 7) // 8, "big")


def decode_int(data: bytes) -> int:
    if data[:1] == b"\x00":
        raise RlpError("integer field has leading zero byte")
    return int.from_bytes(data, "big")


def encode(item: RlpItem) -> bytes:
    if isinstance(item, (bytes, bytearray)):
        data = bytes(item)
        if len(data) == 1 and data[0] < 0x80:
            return data
        return _length_prefix(len(data), 0x80) + data
    if isinstance(item, (list, tuple)):
        payload = b"".join(encode(sub) for sub in item)
        return _length_prefix(len(payload), 0xC0) + payload
    raise TypeError(f"cannot RLP-encode {type(item).__name__}")


def _length_prefix(length: int, offset: int) -> bytes:
    if length <= 55:
        return bytes([offset + length])
    length_bytes = length.to_bytes((length.bit_length() + 7) // 8, "big")
    return bytes([offset + 55 + len(length_bytes)]) + length_bytes


def decode(data: bytes) -> RlpItem:
    """Decode exactly one item; trailing bytes are an error."""
    item, consumed = _decode_at(data, 0)
    if consumed != len(data):
        raise RlpError(f"{len(data) - consumed} trailing bytes after RLP item")
    return item


def _decode_at(data: bytes, pos: int) -> tuple[RlpItem, int]:
    if pos >= len(data):
        raise RlpError("truncated RLP input")
    head = data[pos]
    if head < 0x80:  # single byte, encodes itself
        return bytes([head]), pos + 1
    if head <= 0xB7:  # short string
        length = head - 0x80
        payload, end = _take(data, pos + 1, length)
        if length == 1 and payload[0] < 0x80:
            raise RlpError("single byte below 0x80 must encode itself")
        return payload, end
    if head <= 0xBF:  # long string
        length, start = _read_length(data, pos, head - 0xB7)
        if length <= 55:
            raise RlpError("long string form used for short string")
        return _take(data, start, length)
    if head <= 0xF7:  # short list
        length = head - 0xC0
        return _decode_list(data, pos + 1, length)
    # long list
    length, start = _read_length(data, pos, head - 0xF7)
    if length <= 55:
        raise RlpError("long list form used for short list")
    return _decode_list(data, start, length)


def _read_length(data: bytes, pos: int, n_bytes: int) -> tuple[int, int]:
    raw, end = _take(data, pos + 1, n_bytes)
    if raw[0] == 0:
        raise RlpError("length bytes have leading zero")
    return int.from_bytes(raw, "big"), end


def _take(data: bytes, pos: int, length: int) -> tuple[bytes, int]:
    end = pos + length
    if end > len(data):
        raise RlpError(f"truncated RLP input: wanted {length} bytes at {pos}")
    return data[pos:end], end


def _decode_list(data: bytes, pos: int, length: int) -> tuple[list, int]:
    end = pos + length
    if end > len(data):
        raise RlpError(f"truncated RLP list: wanted {length} bytes at {pos}")
    items: list[RlpItem] = []
    while pos < end:
        item, pos = _decode_at(data, pos)
        if pos > end:  # inner item ran past its enclosing list's bounds
            raise RlpError("RLP item overruns its enclosing list")
        items.append(item)
    return items, end
