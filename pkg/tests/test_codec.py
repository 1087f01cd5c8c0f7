"""Canonical byte codec: frozen layouts plus encode/decode round trips."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from notarychain.codec import (
    ByteReader,
    DecodeError,
    pack_bytes,
    pack_map,
    pack_str,
    pack_u8,
    pack_u32,
    pack_u64,
)


def test_fixed_width_big_endian_layout():
    # Frozen layouts: big-endian, fixed width, no tags.
    assert pack_u8(0x7F) == b"\x7f"
    assert pack_u32(1) == b"\x00\x00\x00\x01"
    assert pack_u64(0x0102030405060708) == bytes(range(1, 9))
    assert pack_bytes(b"hi") == b"\x00\x00\x00\x02hi"
    assert pack_str("hi") == b"\x00\x00\x00\x02hi"


def test_pack_map_sorts_keys():
    a = pack_map({"b": "2", "a": "1"})
    b = pack_map({"a": "1", "b": "2"})
    assert a == b
    # Sorted order means "a" appears before "b" in the byte stream.
    assert a.index(b"a") < a.index(b"b")


def test_range_checks():
    with pytest.raises(ValueError):
        pack_u8(256)
    with pytest.raises(ValueError):
        pack_u32(1 << 32)
    with pytest.raises(ValueError):
        pack_u64(-1)


@given(st.integers(min_value=0, max_value=(1 << 64) - 1))
def test_u64_round_trip(value):
    reader = ByteReader(pack_u64(value))
    assert reader.read_u64() == value
    reader.expect_end()


@given(st.binary(max_size=512))
def test_bytes_round_trip(blob):
    reader = ByteReader(pack_bytes(blob))
    assert reader.read_bytes() == blob
    reader.expect_end()


@given(st.dictionaries(st.text(max_size=16), st.text(max_size=16), max_size=8))
def test_map_round_trip(mapping):
    reader = ByteReader(pack_map(mapping))
    assert reader.read_map() == mapping
    reader.expect_end()


def test_reader_rejects_truncation():
    payload = pack_bytes(b"hello world")
    for cut in range(len(payload)):
        reader = ByteReader(payload[:cut])
        with pytest.raises(DecodeError):
            reader.read_bytes()


def test_reader_rejects_trailing_garbage():
    reader = ByteReader(pack_u32(5) + b"extra")
    reader.read_u32()
    with pytest.raises(DecodeError):
        reader.expect_end()


def test_reader_rejects_invalid_utf8():
    reader = ByteReader(pack_bytes(b"\xff\xfe"))
    with pytest.raises(DecodeError):
        reader.read_str()
