"""Pure-Python hash kernels.

Drop-in replacements for the compiled extension: a Keccak-256 sponge and the
proof-of-work nonce search. Selected automatically when the C module is not
built, or when NOTARYCHAIN_PURE_KERNELS is set.
"""

import hashlib

from ._tables import keccak_round_constants, keccak_rotation_offsets

_RC = keccak_round_constants()
_RHO = keccak_rotation_offsets()
_MASK = (1 << 64) - 1
_RATE = 136  # sponge rate in bytes for 256-bit output

KECCAK_DOMAIN = 0x01  # original Keccak padding; SHA3 uses 0x06


def double_sha256(data: bytes) -> bytes:
    return hashlib.sha256(hashlib.sha256(data).digest()).digest()


def _rotl(value: int, shift: int) -> int:
    if shift == 0:
        return value
    return ((value << shift) | (value >> (64 - shift))) & _MASK


def _keccak_f(state: list[int]) -> None:
    for rnd in range(24):
        # theta
        c = [state[x] ^ state[x + 5] ^ state[x + 10] ^ state[x + 15] ^ state[x + 20]
             for x in range(5)]
        for x in range(5):
            d = c[(x + 4) % 5] ^ _rotl(c[(x + 1) % 5], 1)
            for y in range(0, 25, 5):
                state[x + y] ^= d
        # rho + pi
        b = [0] * 25
        for x in range(5):
            for y in range(5):
                b[y + 5 * ((2 * x + 3 * y) % 5)] = _rotl(state[x + 5 * y], _RHO[x + 5 * y])
        # chi
        for x in range(5):
            for y in range(0, 25, 5):
                state[x + y] = b[x + y] ^ ((~b[(x + 1) % 5 + y]) & b[(x + 2) % 5 + y] & _MASK)
        # iota
        state[0] ^= _RC[rnd]


def keccak256(data: bytes, domain: int = KECCAK_DOMAIN) -> bytes:
    """Keccak-256 digest. domain=0x06 yields NIST SHA3-256 instead."""
    padded = bytearray(data)
    pad_len = _RATE - (len(padded) % _RATE)
    padded.extend(bytes(pad_len))
    padded[len(data)] ^= domain
    padded[-1] ^= 0x80
    state = [0] * 25
    for start in range(0, len(padded), _RATE):
        for i in range(_RATE // 8):
            state[i] ^= int.from_bytes(padded[start + 8 * i:start + 8 * i + 8], "little")
        _keccak_f(state)
    return b"".join(state[i].to_bytes(8, "little") for i in range(4))


def pow_search(header: bytes, nonce_offset: int, difficulty: int,
               start_nonce: int = 0, max_iter: int = 1 << 32):
    """Scan nonces until the double-SHA256 of the header has `difficulty`
    leading zero hex chars. Returns (nonce, digest) or None if exhausted.

    The nonce occupies header[nonce_offset:nonce_offset+8], big-endian.
    """
    buf = bytearray(header)
    zero_bytes, odd_nibble = divmod(difficulty, 2)
    prefix = bytes(zero_bytes)
    nonce = start_nonce
    sha256 = hashlib.sha256
    for _ in range(max_iter):
        buf[nonce_offset:nonce_offset + 8] = nonce.to_bytes(8, "big")
        digest = sha256(sha256(bytes(buf)).digest()).digest()
        if digest[:zero_bytes] == prefix and (not odd_nibble or digest[zero_bytes] < 0x10):
            return nonce, digest
        nonce = (nonce + 1) & _MASK
    return None
