"""Hashing and key helpers on top of the kernels and the curve module.

Boolean signature checks delegate to OpenSSL (via ``cryptography``) when it
is importable — chain validation verifies thousands of signatures and the
pure path is ~20x slower.  Recovery always uses the curve module, which is
the reference implementation and the fallback verifier.
"""

from __future__ import annotations

import os
import secrets
from functools import lru_cache

from . import secp256k1
from ._kernels import double_sha256, keccak256

try:  # pragma: no cover - exercised indirectly through VERIFY_BACKEND
    from cryptography.exceptions import InvalidSignature as _InvalidSignature
    from cryptography.hazmat.primitives.asymmetric import ec as _ec
    from cryptography.hazmat.primitives.asymmetric.utils import (
        Prehashed as _Prehashed,
        encode_dss_signature as _encode_dss,
    )
    from cryptography.hazmat.primitives.hashes import SHA256 as _SHA256
    _HAVE_OPENSSL = True
except ImportError:  # pragma: no cover
    _HAVE_OPENSSL = False

_FORCE_PURE = os.environ.get("NOTARYCHAIN_PURE_KERNELS", "") == "1"
VERIFY_BACKEND = "openssl" if _HAVE_OPENSSL and not _FORCE_PURE else "pure"

__all__ = [
    "double_sha256",
    "keccak256",
    "generate_private_key",
    "private_key_from_hex",
    "public_key_bytes",
    "eth_address",
    "address_from_public_key",
    "sign_digest",
    "verify_digest",
    "recover_public_key",
    "encode_signature",
    "decode_signature",
]

SIGNATURE_LEN = 65  # recid byte + r(32) + s(32)


def generate_private_key() -> int:
    while True:
        priv = secrets.randbelow(secp256k1.N)
        if priv:
            return priv


def private_key_from_hex(text: str) -> int:
    text = text.strip().removeprefix("0x")
    if len(text) != 64:
        raise secp256k1.InvalidKeyError("private key hex must be 64 chars")
    priv = int(text, 16)
    secp256k1.check_private_key(priv)
    return priv


def public_key_bytes(priv: int) -> bytes:
    return secp256k1.public_key_bytes(priv)


def address_from_public_key(pub: bytes) -> bytes:
    """20-byte Ethereum-format account address for a 64-byte public key."""
    if len(pub) != 64:
        raise secp256k1.InvalidKeyError("public key must be 64 bytes")
    return keccak256(pub)[12:]


def eth_address(priv: int) -> str:
    """Display form of the account address: 0x-prefixed lowercase hex."""
    return "0x" + address_from_public_key(public_key_bytes(priv)).hex()


def sign_digest(digest: bytes, priv: int) -> bytes:
    """Compact recoverable signature: recid || r || s, 65 bytes."""
    recid, r, s = secp256k1.sign_recoverable(digest, priv)
    return encode_signature(recid, r, s)


def encode_signature(recid: int, r: int, s: int) -> bytes:
    return bytes([recid]) + r.to_bytes(32, "big") + s.to_bytes(32, "big")


def decode_signature(sig: bytes) -> tuple[int, int, int]:
    if len(sig) != SIGNATURE_LEN:
        raise secp256k1.InvalidSignatureError("signature must be 65 bytes")
    if sig[0] > 3:
        raise secp256k1.InvalidSignatureError(f"recovery id out of range: {sig[0]}")
    return sig[0], int.from_bytes(sig[1:33], "big"), int.from_bytes(sig[33:], "big")


if _HAVE_OPENSSL:
    _ECDSA_SHA256 = _ec.ECDSA(_Prehashed(_SHA256()))

    @lru_cache(maxsize=1024)
    def _openssl_key(pub: bytes):
        x = int.from_bytes(pub[:32], "big")
        y = int.from_bytes(pub[32:], "big")
        return _ec.EllipticCurvePublicNumbers(
            x, y, _ec.SECP256K1()).public_key()


@lru_cache(maxsize=1024)
def _checked_point(pub: bytes) -> tuple[int, int]:
    return secp256k1.point_from_bytes(pub)


def verify_digest(digest: bytes, sig: bytes, pub: bytes) -> bool:
    """True iff sig carries a valid (r, s) over digest by the holder of pub.

    The leading recovery byte is validated for range but otherwise treated
    as a recovery hint, matching standard ECDSA verification.
    """
    expected = _checked_point(pub)  # raises on a malformed key
    try:
        _recid, r, s = decode_signature(sig)
    except secp256k1.InvalidSignatureError:
        return False
    if VERIFY_BACKEND == "openssl":
        if not (1 <= r < secp256k1.N and 1 <= s < secp256k1.N):
            return False
        try:
            _openssl_key(pub).verify(_encode_dss(r, s), digest, _ECDSA_SHA256)
            return True
        except _InvalidSignature:
            return False
    return secp256k1.verify(digest, r, s, expected)


def recover_public_key(digest: bytes, sig: bytes) -> bytes:
    recid, r, s = decode_signature(sig)
    x, y = secp256k1.recover(digest, recid, r, s)
    return x.to_bytes(32, "big") + y.to_bytes(32, "big")
