"""Canonical byte encoding shared by ledger records and wire messages.

Layout rules (documented byte-exactly in docs/wire-formats.md):
- integers: fixed-width big-endian (u8, u32, u64)
- byte strings: u32 length prefix + raw bytes
- text: UTF-8, encoded as a byte string
- maps: u32 entry count + entries as (key, value) string pairs, sorted by key

Every record type has exactly one encoding, so identical logical content
always hashes identically.
"""

from __future__ import annotations

import struct


class DecodeError(ValueError):
    """Raised when bytes do not parse as a canonical record."""


def pack_u8(value: int) -> bytes:
    try:
        return struct.pack(">B", value)
    except struct.error as exc:
        raise ValueError(f"u8 out of range: {value!r}") from exc


def pack_u32(value: int) -> bytes:
    try:
        return struct.pack(">I", value)
    except struct.error as exc:
        raise ValueError(f"u32 out of range: {value!r}") from exc


def pack_u64(value: int) -> bytes:
    try:
        return struct.pack(">Q", value)
    except struct.error as exc:
        raise ValueError(f"u64 out of range: {value!r}") from exc


def pack_bytes(value: bytes) -> bytes:
    return struct.pack(">I", len(value)) + value


def pack_str(value: str) -> bytes:
    return pack_bytes(value.encode("utf-8"))


def pack_map(value: dict[str, str]) -> bytes:
    out = [pack_u32(len(value))]
    for key in sorted(value):
        out.append(pack_str(key))
        out.append(pack_str(value[key]))
    return b"".join(out)


class ByteReader:
    """Sequential reader over a canonical byte string."""

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    def _take(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise DecodeError(f"truncated record: wanted {n} bytes at offset {self._pos}")
        chunk = self._data[self._pos:self._pos + n]
        self._pos += n
        return chunk

    def read_u8(self) -> int:
        return self._take(1)[0]

    def read_u32(self) -> int:
        return struct.unpack(">I", self._take(4))[0]

    def read_u64(self) -> int:
        return struct.unpack(">Q", self._take(8))[0]

    def read_bytes(self) -> bytes:
        length = self.read_u32()
        return self._take(length)

    def read_str(self) -> str:
        raw = self.read_bytes()
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DecodeError(f"invalid UTF-8 in string field: {exc}") from exc

    def read_map(self) -> dict[str, str]:
        count = self.read_u32()
        out: dict[str, str] = {}
        for _ in range(count):
            key = self.read_str()
            out[key] = self.read_str()
        return out

    def remaining(self) -> int:
        return len(self._data) - self._pos

    def expect_end(self) -> None:
        if self.remaining():
            raise DecodeError(f"{self.remaining()} trailing bytes after record")
