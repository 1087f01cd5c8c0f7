"""Legacy-format public-chain transactions.

The anchor is a zero-value transfer from the notary wallet to itself whose
data field carries the 64 ASCII hex characters of the private chain's block
hash. Legacy format (signature v in {27, 28}, no chain id in the signing
payload) keeps the transaction verifiable with nothing but the curve and
Keccak — any third party can re-derive the sender and read the anchored
hash out of calldata forever.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .. import crypto, rlp, secp256k1
from .._kernels import keccak256

# Frontier/Homestead intrinsic gas schedule.
GAS_BASE_TX = 21_000
GAS_DATA_NONZERO = 68
GAS_DATA_ZERO = 4

ANCHOR_DATA_LEN = 64  # the block hash travels as ASCII hex, one byte per char


class TxFormatError(ValueError):
    """Raised when transaction bytes or fields do not meet the legacy format."""


@dataclass(frozen=True)
class EthereumTx:
    """Nine-field legacy transaction; r == s == 0 means unsigned."""
    nonce: int
    gas_price: int
    gas: int
    to: bytes  # 20 bytes, or empty for contract creation
    value: int
    data: bytes
    v: int = 0
    r: int = 0
    s: int = 0

    def _body(self) -> list[bytes]:
        return [rlp.encode_int(self.nonce), rlp.encode_int(self.gas_price),
                rlp.encode_int(self.gas), self.to, rlp.encode_int(self.value),
                self.data]

    def signing_hash(self, chain_id: int | None = None) -> bytes:
        """Keccak-256 of the six unsigned fields — what the wallet signs.
        With a chain id, the replay-protected payload (six fields plus
        chain_id, 0, 0) is hashed instead."""
        body = self._body()
        if chain_id is not None:
            body += [rlp.encode_int(chain_id), b"", b""]
        return keccak256(rlp.encode(body))

    def sign(self, priv: int, chain_id: int | None = None) -> "EthereumTx":
        """Default is the legacy format (v in {27, 28}); passing a chain id
        opts in to replay-protected signing (v = 35 + 2*chain_id + recid)."""
        recid, r, s = secp256k1.sign_recoverable(self.signing_hash(chain_id), priv)
        v = 27 + recid if chain_id is None else 35 + 2 * chain_id + recid
        return replace(self, v=v, r=r, s=s)

    def chain_id(self) -> int | None:
        """Chain id recovered from v, or None for legacy signatures."""
        return None if self.v in (27, 28) else (self.v - 35) // 2

    def encode_raw(self) -> bytes:
        """Wire form: RLP of the nine fields, ready for broadcast."""
        if not self.is_signed():
            raise TxFormatError("cannot serialize an unsigned transaction")
        return rlp.encode(self._body() + [rlp.encode_int(self.v),
                                          rlp.encode_int(self.r),
                                          rlp.encode_int(self.s)])

    def is_signed(self) -> bool:
        return self.r != 0 and self.s != 0

    def tx_hash(self) -> bytes:
        """Keccak-256 of the raw encoding: the id explorers display."""
        return keccak256(self.encode_raw())

    def tx_hash_hex(self) -> str:
        return "0x" + self.tx_hash().hex()

    def recover_sender(self) -> bytes:
        """20-byte address recovered from the signature."""
        cid = self.chain_id()
        recid = self.v - 27 if cid is None else self.v - 35 - 2 * cid
        if recid not in (0, 1):
            raise TxFormatError(f"signature v {self.v} has no valid recovery id")
        try:
            x, y = secp256k1.recover(self.signing_hash(cid), recid,
                                     self.r, self.s)
        except secp256k1.InvalidSignatureError as exc:
            raise TxFormatError(f"signature does not recover: {exc}") from exc
        pub = x.to_bytes(32, "big") + y.to_bytes(32, "big")
        return crypto.address_from_public_key(pub)


def decode_raw(raw: bytes) -> EthereumTx:
    """Strict parse of broadcast bytes back into a transaction."""
    try:
        fields = rlp.decode(raw)
    except rlp.RlpError as exc:
        raise TxFormatError(f"bad RLP: {exc}") from exc
    if not isinstance(fields, list) or len(fields) != 9:
        raise TxFormatError("legacy transaction must be a 9-item RLP list")
    if any(isinstance(f, list) for f in fields):
        raise TxFormatError("transaction fields must be byte strings")
    try:
        tx = EthereumTx(nonce=rlp.decode_int(fields[0]),
                        gas_price=rlp.decode_int(fields[1]),
                        gas=rlp.decode_int(fields[2]), to=fields[3],
                        value=rlp.decode_int(fields[4]), data=fields[5],
                        v=rlp.decode_int(fields[6]),
                        r=rlp.decode_int(fields[7]),
                        s=rlp.decode_int(fields[8]))
    except rlp.RlpError as exc:
        raise TxFormatError(str(exc)) from exc
    validate_tx(tx)
    return tx


def validate_tx(tx: EthereumTx) -> None:
    if len(tx.to) not in (0, 20):
        raise TxFormatError(f"to must be 20 bytes or empty, got {len(tx.to)}")
    if tx.v not in (27, 28) and tx.v < 35:
        raise TxFormatError(
            f"signature v must be 27/28 (legacy) or >= 35 (chain-id), got {tx.v}")
    if not (1 <= tx.r < secp256k1.N and 1 <= tx.s < secp256k1.N):
        raise TxFormatError("signature components out of range")
    if tx.gas < intrinsic_gas(tx.data):
        raise TxFormatError(
            f"gas limit {tx.gas} below intrinsic cost {intrinsic_gas(tx.data)}")


def intrinsic_gas(data: bytes) -> int:
    """Base transaction cost plus per-byte calldata cost."""
    nonzero = sum(1 for b in data if b)
    zero = len(data) - nonzero
    return GAS_BASE_TX + GAS_DATA_NONZERO * nonzero + GAS_DATA_ZERO * zero


def gas_with_margin(gas: int) -> int:
    """A 20% safety margin over an estimate, in integer arithmetic."""
    return gas + gas // 5


def build_anchor_transaction(blockhash_hex: str, *, nonce: int, gas_price: int,
                             wallet_address: bytes,
                             gas_limit: int | None = None) -> EthereumTx:
    """Unsigned anchor: zero-value self-send carrying the block hash as the
    ASCII bytes of its 64 hex characters. When no external gas estimate is
    supplied, the limit is the intrinsic cost plus a 20% margin."""
    if len(blockhash_hex) != ANCHOR_DATA_LEN or \
            any(c not in "0123456789abcdef" for c in blockhash_hex):
        raise TxFormatError(
            f"anchor payload must be 64 lowercase hex chars, got {blockhash_hex!r}")
    if len(wallet_address) != 20:
        raise TxFormatError("wallet address must be 20 bytes")
    data = blockhash_hex.encode("ascii")
    if gas_limit is None:
        gas_limit = gas_with_margin(intrinsic_gas(data))
    return EthereumTx(nonce=nonce, gas_price=gas_price, gas=gas_limit,
                      to=wallet_address, value=0, data=data)
