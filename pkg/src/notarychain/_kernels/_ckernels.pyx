# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled hash kernels: Keccak-256 and the proof-of-work nonce search.

SHA-256 comes from OpenSSL's EVP interface; the Keccak permutation is
implemented here with constant tables generated in _tables.py (shared with
the pure-Python fallback).
"""

from libc.stdint cimport uint64_t, uint8_t
from libc.string cimport memcpy, memset

from ._tables import keccak_round_constants, keccak_rotation_offsets

cdef extern from "openssl/evp.h":
    ctypedef struct EVP_MD:
        pass
    const EVP_MD *EVP_sha256() nogil
    int EVP_Digest(const void *data, size_t count, unsigned char *md,
                   unsigned int *size, const EVP_MD *type, void *impl) nogil

cdef enum:
    RATE = 136

KECCAK_DOMAIN = 0x01

cdef uint64_t _RC[24]
cdef int _RHO[25]

_rc_py = keccak_round_constants()
_rho_py = keccak_rotation_offsets()
for _i in range(24):
    _RC[_i] = _rc_py[_i]
for _i in range(25):
    _RHO[_i] = _rho_py[_i]


cdef inline uint64_t _rotl(uint64_t v, int s) noexcept nogil:
    if s == 0:
        return v
    return (v << s) | (v >> (64 - s))


cdef void _keccak_f(uint64_t *a) noexcept nogil:
    cdef uint64_t b[25]
    cdef uint64_t c[5]
    cdef uint64_t d
    cdef int x, y, rnd
    for rnd in range(24):
        for x in range(5):
            c[x] = a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20]
        for x in range(5):
            d = c[(x + 4) % 5] ^ _rotl(c[(x + 1) % 5], 1)
            for y in range(0, 25, 5):
                a[x + y] ^= d
        for x in range(5):
            for y in range(5):
                b[y + 5 * ((2 * x + 3 * y) % 5)] = _rotl(a[x + 5 * y], _RHO[x + 5 * y])
        for x in range(5):
            for y in range(0, 25, 5):
                a[x + y] = b[x + y] ^ ((~b[(x + 1) % 5 + y]) & b[(x + 2) % 5 + y])
        a[0] ^= _RC[rnd]


cdef void _absorb_and_squeeze(const uint8_t *data, size_t n, int domain,
                              uint8_t *out32) noexcept nogil:
    cdef uint64_t state[25]
    cdef uint8_t block[RATE]
    cdef size_t off = 0
    cdef size_t take
    cdef int i
    memset(<void *>state, 0, sizeof(state))
    while n - off >= RATE:
        for i in range(RATE // 8):
            state[i] ^= (<const uint64_t *>(data + off))[i]
        _keccak_f(state)
        off += RATE
    take = n - off
    memset(block, 0, RATE)
    if take:
        memcpy(block, data + off, take)
    block[take] ^= <uint8_t>domain
    block[RATE - 1] ^= 0x80
    for i in range(RATE // 8):
        state[i] ^= (<uint64_t *>block)[i]
    _keccak_f(state)
    memcpy(out32, <void *>state, 32)


def keccak256(bytes data, int domain=0x01):
    """Keccak-256 digest. domain=0x06 yields NIST SHA3-256 instead."""
    cdef uint8_t out[32]
    cdef const uint8_t *buf = data
    cdef size_t n = len(data)
    with nogil:
        _absorb_and_squeeze(buf, n, domain, out)
    return bytes(out[:32])


def double_sha256(bytes data):
    cdef uint8_t first[32]
    cdef uint8_t second[32]
    cdef unsigned int md_len = 0
    EVP_Digest(<const void *><const uint8_t *>data, len(data), first, &md_len,
               EVP_sha256(), NULL)
    EVP_Digest(first, 32, second, &md_len, EVP_sha256(), NULL)
    return bytes(second[:32])


def pow_search(bytes header, size_t nonce_offset, int difficulty,
               start_nonce=0, max_iter=None):
    """Scan nonces until the double-SHA256 of the header has `difficulty`
    leading zero hex chars. Returns (nonce, digest) or None if exhausted.

    The nonce occupies header[nonce_offset:nonce_offset+8], big-endian.
    """
    cdef size_t n = len(header)
    if nonce_offset + 8 > n:
        raise ValueError("nonce field out of range")
    cdef bytearray work = bytearray(header)
    cdef uint8_t[::1] mv = work
    cdef uint8_t *buf = &mv[0]
    cdef uint8_t digest[32]
    cdef uint8_t first[32]
    cdef unsigned int md_len = 0
    cdef int zero_bytes = difficulty // 2
    cdef int odd = difficulty % 2
    cdef uint64_t nonce = start_nonce
    cdef uint64_t limit = (<uint64_t>1) << 32 if max_iter is None else <uint64_t>max_iter
    cdef uint64_t i
    cdef int j
    cdef bint ok
    cdef bint found = False
    cdef const EVP_MD *md = EVP_sha256()
    with nogil:
        for i in range(limit):
            for j in range(8):
                buf[nonce_offset + j] = <uint8_t>((nonce >> (8 * (7 - j))) & 0xFF)
            EVP_Digest(buf, n, first, &md_len, md, NULL)
            EVP_Digest(first, 32, digest, &md_len, md, NULL)
            ok = True
            for j in range(zero_bytes):
                if digest[j] != 0:
                    ok = False
                    break
            if ok and odd and digest[zero_bytes] >= 0x10:
                ok = False
            if ok:
                found = True
                break
            nonce += 1
    if found:
        return nonce, bytes(digest[:32])
    return None
