"""Wire messages exchanged between peers.

Every message is an envelope — kind, sender, kind-specific body — signed by
the sending node, using the same canonical byte codec as the ledger records.
Bodies are opaque byte strings at the envelope level so the signature covers
exactly what the handler will parse.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field

from .. import codec, crypto
from ..codec import ByteReader, DecodeError
from ..ledger.types import Block, LedgerTransaction

KIND_HELLO = "hello"
KIND_HELLO_ACK = "hello_ack"
KIND_TX_BROADCAST = "tx_broadcast"
KIND_BLOCK_BROADCAST = "block_broadcast"
KIND_GET_BLOCKS = "get_blocks"
KIND_BLOCKS_REPLY = "blocks_reply"

MESSAGE_KINDS = frozenset({
    KIND_HELLO, KIND_HELLO_ACK, KIND_TX_BROADCAST, KIND_BLOCK_BROADCAST,
    KIND_GET_BLOCKS, KIND_BLOCKS_REPLY,
})

CHALLENGE_LEN = 32

_ENVELOPE_SIGN_TAG = b"nmsg-sign\x00"


@dataclass
class Envelope:
    kind: str
    sender: str
    body: bytes
    signature: bytes = b""

    def signing_digest(self) -> bytes:
        payload = (codec.pack_str(self.kind) + codec.pack_str(self.sender)
                   + codec.pack_bytes(self.body))
        return crypto.double_sha256(_ENVELOPE_SIGN_TAG + payload)

    def sign(self, priv: int) -> "Envelope":
        self.signature = crypto.sign_digest(self.signing_digest(), priv)
        return self

    def verify(self, pubkey: bytes) -> bool:
        return crypto.verify_digest(self.signing_digest(), self.signature, pubkey)

    def encode(self) -> bytes:
        return (codec.pack_str(self.kind) + codec.pack_str(self.sender)
                + codec.pack_bytes(self.body) + codec.pack_bytes(self.signature))

    @classmethod
    def decode(cls, data: bytes) -> "Envelope":
        reader = ByteReader(data)
        kind = reader.read_str()
        sender = reader.read_str()
        body = reader.read_bytes()
        signature = reader.read_bytes()
        reader.expect_end()
        if kind not in MESSAGE_KINDS:
            raise DecodeError(f"unknown message kind {kind!r}")
        return cls(kind=kind, sender=sender, body=body, signature=signature)


# -- handshake bodies -------------------------------------------------------

def new_challenge() -> bytes:
    return secrets.token_bytes(CHALLENGE_LEN)


@dataclass
class Hello:
    """Dialer's opener: identifies itself and challenges the listener."""
    challenge: bytes

    def encode(self) -> bytes:
        return codec.pack_bytes(self.challenge)

    @classmethod
    def decode(cls, data: bytes) -> "Hello":
        reader = ByteReader(data)
        challenge = reader.read_bytes()
        reader.expect_end()
        if len(challenge) != CHALLENGE_LEN:
            raise DecodeError(f"challenge must be {CHALLENGE_LEN} bytes")
        return cls(challenge=challenge)


@dataclass
class HelloAck:
    """Echoes the received challenge (inside the signed body, proving key
    possession) and may carry a counter-challenge; empty echo closes the
    handshake."""
    echo: bytes
    challenge: bytes = b""

    def encode(self) -> bytes:
        return codec.pack_bytes(self.echo) + codec.pack_bytes(self.challenge)

    @classmethod
    def decode(cls, data: bytes) -> "HelloAck":
        reader = ByteReader(data)
        echo = reader.read_bytes()
        challenge = reader.read_bytes()
        reader.expect_end()
        return cls(echo=echo, challenge=challenge)


# -- replication bodies -----------------------------------------------------

@dataclass
class GetBlocks:
    """Request for every block at or above from_height."""
    from_height: int

    def encode(self) -> bytes:
        return codec.pack_u64(self.from_height)

    @classmethod
    def decode(cls, data: bytes) -> "GetBlocks":
        reader = ByteReader(data)
        height = reader.read_u64()
        reader.expect_end()
        return cls(from_height=height)


@dataclass
class BlocksReply:
    blocks: list[Block] = field(default_factory=list)
    tip_height: int = 0  # sender's tip, so the requester can page

    def encode(self) -> bytes:
        parts = [codec.pack_u64(self.tip_height),
                 codec.pack_u32(len(self.blocks))]
        parts.extend(codec.pack_bytes(b.canonical_bytes()) for b in self.blocks)
        return b"".join(parts)

    @classmethod
    def decode(cls, data: bytes) -> "BlocksReply":
        reader = ByteReader(data)
        tip_height = reader.read_u64()
        count = reader.read_u32()
        blocks = [Block.from_bytes(reader.read_bytes()) for _ in range(count)]
        reader.expect_end()
        return cls(blocks=blocks, tip_height=tip_height)


def encode_tx_body(tx: LedgerTransaction) -> bytes:
    return tx.canonical_bytes()


def decode_tx_body(data: bytes) -> LedgerTransaction:
    return LedgerTransaction.from_bytes(data)


def encode_block_body(block: Block) -> bytes:
    return block.canonical_bytes()


def decode_block_body(data: bytes) -> Block:
    return Block.from_bytes(data)
