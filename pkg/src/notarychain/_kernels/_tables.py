"""Keccak-f[1600] constant tables, generated from the defining recurrences.

Both the C and pure-Python permutations consume these values, so a
transcription slip is impossible; correctness of the generators themselves is
pinned by the SHA3-256 cross-check in the test suite (the sponge with domain
byte 0x06 must reproduce hashlib.sha3_256 exactly).
"""


def keccak_round_constants() -> list[int]:
    """24 iota round constants, from the degree-8 LFSR in the Keccak spec."""
    constants = []
    lfsr = 1
    for _ in range(24):
        rc = 0
        for j in range(7):
            if lfsr & 1:
                rc |= 1 << ((1 << j) - 1)
            # x^8 + x^6 + x^5 + x^4 + 1 over GF(2)
            lfsr <<= 1
            if lfsr & 0x100:
                lfsr ^= 0x171
        constants.append(rc)
    return constants


def keccak_rotation_offsets() -> list[int]:
    """Rho step rotations, indexed lane = x + 5*y."""
    offsets = [0] * 25
    x, y = 1, 0
    for t in range(24):
        offsets[x + 5 * y] = ((t + 1) * (t + 2) // 2) % 64
        x, y = y, (2 * x + 3 * y) % 5
    return offsets
