"""RLP codec against the published test vectors, plus strictness checks."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from notarychain import rlp

# Vectors from the public specification of the encoding.
VECTORS = [
    (b"dog", "83646f67"),
    ([b"cat", b"dog"], "c88363617483646f67"),
    (b"", "80"),
    ([], "c0"),
    (b"\x0f", "0f"),
    (b"\x04\x00", "820400"),
    ([[], [[]], [[], [[]]]], "c7c0c1c0c3c0c1c0"),
    (b"Lorem ipsum dolor sit amet, consectetur adipisicing elit",
     "b8384c6f72656d20697073756d20646f6c6f722073697420616d65742c20636f6e7365637465747572206164697069736963696e6720656c6974"),
]


@pytest.mark.parametrize("item,encoded", VECTORS)
def test_published_vectors(item, encoded):
    assert rlp.encode(item).hex() == encoded
    assert rlp.decode(bytes.fromhex(encoded)) == item


def test_integer_helpers():
    assert rlp.encode_int(0) == b""
    assert rlp.encode_int(15) == b"\x0f"
    assert rlp.encode_int(1024) == b"\x04\x00"
    assert rlp.decode_int(b"") == 0
    assert rlp.decode_int(b"\x04\x00") == 1024
    with pytest.raises(rlp.RlpError):
        rlp.decode_int(b"\x00\x01")  # leading zero is non-canonical
    with pytest.raises(ValueError):
        rlp.encode_int(-1)


@pytest.mark.parametrize("raw", [
    b"\x81\x05",            # single low byte wrapped in a string header
    b"\xb8\x05hello",       # long form used for a 5-byte string
    b"\xb8\x37" + b"x" * 55,  # long form for a 55-byte string
    b"\x83do",              # truncated string
    b"\xc1\x81\x05",        # non-canonical item inside a list
    b"\x82\x04\x00\xff",    # trailing bytes
    b"\xb9\x00\x38" + b"x" * 56,  # length bytes with leading zero
    b"\xc2\x83dog",         # inner item overruns its list
    b"",                    # empty input
])
def test_strict_decode_rejections(raw):
    with pytest.raises(rlp.RlpError):
        rlp.decode(raw)


def test_encode_rejects_other_types():
    with pytest.raises(TypeError):
        rlp.encode("strings are ambiguous")  # type: ignore[arg-type]
    with pytest.raises(TypeError):
        rlp.encode(7)  # type: ignore[arg-type]


rlp_items = st.recursive(
    st.binary(max_size=70),
    lambda children: st.lists(children, max_size=6),
    max_leaves=25,
)


@given(rlp_items)
@settings(max_examples=300, deadline=None)
def test_round_trip_property(item):
    encoded = rlp.encode(item)
    assert rlp.decode(encoded) == item
    # Canonical form: re-encoding the decoded value is byte-identical.
    assert rlp.encode(rlp.decode(encoded)) == encoded


def test_long_list_boundary():
    # 56-byte payload forces the long-list form.
    items = [b"\x01" * 7] * 7  # 7 * 8 = 56 payload bytes
    encoded = rlp.encode(items)
    assert encoded[0] == 0xF8
    assert rlp.decode(encoded) == items
