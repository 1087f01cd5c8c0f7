"""secp256k1 ECDSA with public-key recovery.

Signing is deterministic (RFC 6979 nonces, SHA-256 HMAC) so identical inputs
always produce identical signatures, and s is normalized to the low half of
the group order. Signatures carry a recovery id so the signer's public key
(and address) can be derived from the signature alone.

Point arithmetic uses Jacobian coordinates with a fixed-base window table for
the generator. The test suite cross-checks sign/verify against OpenSSL's
secp256k1 implementation.
"""

from __future__ import annotations

import hmac
import hashlib

# Field and group parameters
P = 2**256 - 2**32 - 977
N = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
GX = 0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798
GY = 0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8
B = 7

_HALF_N = N // 2

# Jacobian point = (X, Y, Z); affine = (X/Z^2, Y/Z^3). Z == 0 marks infinity.
_INFINITY = (0, 1, 0)


class InvalidKeyError(ValueError):
    """Private key scalar outside [1, N-1]."""


class InvalidSignatureError(ValueError):
    """Signature components out of range or recovery failed."""


def _jac_double(pt):
    x, y, z = pt
    if z == 0 or y == 0:
        return _INFINITY
    ysq = (y * y) % P
    s = (4 * x * ysq) % P
    m = (3 * x * x) % P  # a == 0 for this curve
    nx = (m * m - 2 * s) % P
    ny = (m * (s - nx) - 8 * ysq * ysq) % P
    nz = (2 * y * z) % P
    return (nx, ny, nz)


def _jac_add(p1, p2):
    if p1[2] == 0:
        return p2
    if p2[2] == 0:
        return p1
    x1, y1, z1 = p1
    x2, y2, z2 = p2
    z1sq = (z1 * z1) % P
    z2sq = (z2 * z2) % P
    u1 = (x1 * z2sq) % P
    u2 = (x2 * z1sq) % P
    s1 = (y1 * z2sq * z2) % P
    s2 = (y2 * z1sq * z1) % P
    h = (u2 - u1) % P
    r = (s2 - s1) % P
    if h == 0:
        if r == 0:
            return _jac_double(p1)
        return _INFINITY
    hsq = (h * h) % P
    hcu = (hsq * h) % P
    u1hsq = (u1 * hsq) % P
    nx = (r * r - hcu - 2 * u1hsq) % P
    ny = (r * (u1hsq - nx) - s1 * hcu) % P
    nz = (h * z1 * z2) % P
    return (nx, ny, nz)


def _to_affine(pt):
    x, y, z = pt
    if z == 0:
        return None
    zinv = pow(z, -1, P)
    zinv2 = (zinv * zinv) % P
    return ((x * zinv2) % P, (y * zinv2 * zinv) % P)


def _scalar_mult(k: int, affine) -> tuple:
    """k * point for an arbitrary affine point; returns jacobian."""
    acc = _INFINITY
    add = (affine[0], affine[1], 1)
    while k:
        if k & 1:
            acc = _jac_add(acc, add)
        add = _jac_double(add)
        k >>= 1
    return acc


def _build_base_table():
    """Fixed-base table: table[i][w-1] = (w << 4i) * G, 64 nibble windows."""
    table = []
    base = (GX, GY, 1)
    for _ in range(64):
        row = [base]
        for _ in range(14):
            row.append(_jac_add(row[-1], base))
        table.append(row)
        for _ in range(4):
            base = _jac_double(base)
    return table


_BASE_TABLE = _build_base_table()


def _base_mult(k: int) -> tuple:
    """k * G via the precomputed window table; returns jacobian."""
    acc = _INFINITY
    i = 0
    while k:
        nib = k & 0xF
        if nib:
            acc = _jac_add(acc, _BASE_TABLE[i][nib - 1])
        k >>= 4
        i += 1
    return acc


def check_private_key(priv: int) -> None:
    if not 1 <= priv < N:
        raise InvalidKeyError("private key scalar out of range")


def public_key(priv: int) -> tuple[int, int]:
    """Affine public point for a private scalar."""
    check_private_key(priv)
    return _to_affine(_base_mult(priv))


def public_key_bytes(priv: int) -> bytes:
    x, y = public_key(priv)
    return x.to_bytes(32, "big") + y.to_bytes(32, "big")


def point_from_bytes(pub: bytes) -> tuple[int, int]:
    if len(pub) != 64:
        raise InvalidKeyError("public key must be 64 bytes (x || y)")
    x = int.from_bytes(pub[:32], "big")
    y = int.from_bytes(pub[32:], "big")
    if x >= P or y >= P or (y * y - x * x * x - B) % P != 0:
        raise InvalidKeyError("point not on curve")
    return (x, y)


def _rfc6979_k(priv: int, digest: bytes):
    """Candidate nonces per RFC 6979 (SHA-256), yielded in order."""
    h1 = int.from_bytes(digest, "big") % N
    x_octets = priv.to_bytes(32, "big")
    h_octets = h1.to_bytes(32, "big")
    v = b"\x01" * 32
    k = b"\x00" * 32
    k = hmac.new(k, v + b"\x00" + x_octets + h_octets, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    k = hmac.new(k, v + b"\x01" + x_octets + h_octets, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    while True:
        v = hmac.new(k, v, hashlib.sha256).digest()
        candidate = int.from_bytes(v, "big")
        if 1 <= candidate < N:
            yield candidate
        k = hmac.new(k, v + b"\x00", hashlib.sha256).digest()
        v = hmac.new(k, v, hashlib.sha256).digest()


def sign_recoverable(digest: bytes, priv: int) -> tuple[int, int, int]:
    """Sign a 32-byte digest. Returns (recid, r, s) with s in the low half."""
    if len(digest) != 32:
        raise ValueError("digest must be 32 bytes")
    check_private_key(priv)
    z = int.from_bytes(digest, "big") % N
    for k in _rfc6979_k(priv, digest):
        point = _to_affine(_base_mult(k))
        r = point[0] % N
        if r == 0:
            continue
        s = (pow(k, -1, N) * (z + r * priv)) % N
        if s == 0:
            continue
        recid = (point[1] & 1) | (2 if point[0] >= N else 0)
        if s > _HALF_N:
            s = N - s
            recid ^= 1
        return (recid, r, s)


def verify(digest: bytes, r: int, s: int, pub: tuple[int, int]) -> bool:
    """Standard ECDSA verification (accepts high- or low-s)."""
    if not (1 <= r < N and 1 <= s < N):
        return False
    z = int.from_bytes(digest, "big") % N
    w = pow(s, -1, N)
    u1 = (z * w) % N
    u2 = (r * w) % N
    pt = _to_affine(_jac_add(_base_mult(u1), _scalar_mult(u2, pub)))
    if pt is None:
        return False
    return pt[0] % N == r


def recover(digest: bytes, recid: int, r: int, s: int) -> tuple[int, int]:
    """Recover the signing public key from a recoverable signature."""
    if not (1 <= r < N and 1 <= s < N):
        raise InvalidSignatureError("r or s out of range")
    if not 0 <= recid <= 3:
        raise InvalidSignatureError("recovery id out of range")
    x = r + N if recid >= 2 else r
    if x >= P:
        raise InvalidSignatureError("recovered x beyond field size")
    alpha = (pow(x, 3, P) + B) % P
    y = pow(alpha, (P + 1) // 4, P)  # P % 4 == 3
    if (y * y) % P != alpha:
        raise InvalidSignatureError("signature does not define a curve point")
    if (y & 1) != (recid & 1):
        y = P - y
    z = int.from_bytes(digest, "big") % N
    rinv = pow(r, -1, N)
    u1 = (-z * rinv) % N
    u2 = (s * rinv) % N
    pt = _to_affine(_jac_add(_base_mult(u1), _scalar_mult(u2, (x, y))))
    if pt is None:
        raise InvalidSignatureError("recovered point at infinity")
    return pt
