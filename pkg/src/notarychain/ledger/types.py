"""Ledger record types and their canonical byte encodings.

All hashes here are double SHA-256 over the canonical encoding from
notarychain.codec. Field layouts are frozen in docs/wire-formats.md; changing
them changes every block hash.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .. import codec, crypto
from ..codec import ByteReader, DecodeError
from .errors import AssetFormatError

GENESIS_PREV_HASH = "0" * 64
ZERO_ROOT = "0" * 64

PERM_CONNECT = "connect"
PERM_SEND = "send"
PERM_RECEIVE = "receive"
PERM_MINE = "mine"
PERM_ADMIN = "admin"
ALL_PERMISSIONS = frozenset({PERM_CONNECT, PERM_SEND, PERM_RECEIVE, PERM_MINE, PERM_ADMIN})

KIND_ASSET_ISSUE = "asset_issue"
KIND_PERMISSION_SET = "permission_set"
KIND_NODE_EVENT = "node_event"
TX_KINDS = (KIND_ASSET_ISSUE, KIND_PERMISSION_SET, KIND_NODE_EVENT)

# Byte offset of the nonce value inside the canonical header encoding; the
# proof-of-work kernel rewrites these 8 bytes in place while searching.
HEADER_NONCE_OFFSET = 100

_MD5_RE = re.compile(r"^[0-9a-f]{32}$")
_SHA256_RE = re.compile(r"^[0-9a-f]{64}$")

_TX_SIGN_TAG = b"ntx-sign\x00"


def is_md5_hex(value: str) -> bool:
    return bool(_MD5_RE.match(value))


def is_sha256_hex(value: str) -> bool:
    return bool(_SHA256_RE.match(value))


@dataclass
class BlockHeader:
    height: int
    prev_hash: str  # 64 hex chars
    tx_root: str    # 64 hex chars, merkle root of the tx list
    timestamp: int  # unix seconds
    nonce: int      # 64-bit proof-of-work counter
    miner: str

    def canonical_bytes(self) -> bytes:
        return b"".join([
            codec.pack_bytes(codec.pack_u64(self.height)),
            codec.pack_bytes(bytes.fromhex(self.prev_hash)),
            codec.pack_bytes(bytes.fromhex(self.tx_root)),
            codec.pack_bytes(codec.pack_u64(self.timestamp)),
            codec.pack_bytes(codec.pack_u64(self.nonce)),
            codec.pack_str(self.miner),
        ])

    @classmethod
    def from_reader(cls, reader: ByteReader) -> "BlockHeader":
        height_raw = reader.read_bytes()
        prev = reader.read_bytes()
        root = reader.read_bytes()
        ts_raw = reader.read_bytes()
        nonce_raw = reader.read_bytes()
        miner = reader.read_str()
        if len(height_raw) != 8 or len(ts_raw) != 8 or len(nonce_raw) != 8:
            raise DecodeError("header integer fields must be 8 bytes")
        if len(prev) != 32 or len(root) != 32:
            raise DecodeError("header hash fields must be 32 bytes")
        return cls(
            height=int.from_bytes(height_raw, "big"),
            prev_hash=prev.hex(),
            tx_root=root.hex(),
            timestamp=int.from_bytes(ts_raw, "big"),
            nonce=int.from_bytes(nonce_raw, "big"),
            miner=miner,
        )


def compute_block_hash(header: BlockHeader) -> bytes:
    """Double SHA-256 of the canonical header encoding."""
    return crypto.double_sha256(header.canonical_bytes())


def merkle_root(tx_ids: list[bytes]) -> bytes:
    """Merkle root over 32-byte leaves: pairwise double SHA-256, odd level
    duplicates its last node. Empty list hashes to 32 zero bytes; a single
    leaf is its own root."""
    if not tx_ids:
        return bytes(32)
    level = list(tx_ids)
    while len(level) > 1:
        if len(level) % 2:
            level.append(level[-1])
        level = [crypto.double_sha256(level[i] + level[i + 1])
                 for i in range(0, len(level), 2)]
    return level[0]


@dataclass
class AssetRecord:
    md5_index: str
    sha256: str
    source_uri: str
    processed_ts: int  # epoch milliseconds
    metadata: dict[str, str] = field(default_factory=dict)
    parent_md5: str | None = None

    def validate(self) -> None:
        if not is_md5_hex(self.md5_index):
            raise AssetFormatError(
                f"md5_index must be exactly 32 lowercase hex chars, got {self.md5_index!r}")
        if not is_sha256_hex(self.sha256):
            raise AssetFormatError(
                f"sha256 must be exactly 64 lowercase hex chars, got {self.sha256!r}")
        if self.parent_md5 is not None and not is_md5_hex(self.parent_md5):
            raise AssetFormatError(
                f"parent_md5 must be exactly 32 lowercase hex chars, got {self.parent_md5!r}")
        if not self.source_uri:
            raise AssetFormatError("source_uri must be non-empty")
        if not 0 <= self.processed_ts < 1 << 64:
            raise AssetFormatError(
                f"processed_ts must be epoch milliseconds, got {self.processed_ts!r}")

    def canonical_bytes(self) -> bytes:
        return b"".join([
            codec.pack_str(self.md5_index),
            codec.pack_str(self.sha256),
            codec.pack_str(self.source_uri),
            codec.pack_u64(self.processed_ts),
            codec.pack_str(self.parent_md5 or ""),
            codec.pack_map(self.metadata),
        ])

    @classmethod
    def from_reader(cls, reader: ByteReader) -> "AssetRecord":
        md5 = reader.read_str()
        sha = reader.read_str()
        source = reader.read_str()
        ts = reader.read_u64()
        parent = reader.read_str()
        meta = reader.read_map()
        return cls(md5_index=md5, sha256=sha, source_uri=source,
                   processed_ts=ts, metadata=meta, parent_md5=parent or None)


@dataclass
class PermissionGrant:
    subject: str
    permissions: frozenset[str]
    granted: bool
    issuer: str

    def validate(self) -> None:
        unknown = self.permissions - ALL_PERMISSIONS
        if unknown:
            raise AssetFormatError(f"unknown permissions: {sorted(unknown)}")
        if not self.permissions:
            raise AssetFormatError("permission grant names no permissions")
        if not self.subject:
            raise AssetFormatError("permission grant names no subject")

    def canonical_bytes(self) -> bytes:
        parts = [codec.pack_str(self.subject), codec.pack_u32(len(self.permissions))]
        parts.extend(codec.pack_str(p) for p in sorted(self.permissions))
        parts.append(codec.pack_u8(1 if self.granted else 0))
        parts.append(codec.pack_str(self.issuer))
        return b"".join(parts)

    @classmethod
    def from_reader(cls, reader: ByteReader) -> "PermissionGrant":
        subject = reader.read_str()
        count = reader.read_u32()
        perms = frozenset(reader.read_str() for _ in range(count))
        granted = reader.read_u8() == 1
        issuer = reader.read_str()
        return cls(subject=subject, permissions=perms, granted=granted, issuer=issuer)


NODE_ADD = "add"
NODE_REMOVE = "remove"


@dataclass
class NodeEvent:
    action: str  # add | remove
    node: str
    pubkey: bytes = b""  # 64 bytes on add, empty on remove

    def validate(self) -> None:
        if self.action not in (NODE_ADD, NODE_REMOVE):
            raise AssetFormatError(f"unknown node event action {self.action!r}")
        if not self.node:
            raise AssetFormatError("node event names no node")
        if self.action == NODE_ADD and len(self.pubkey) != 64:
            raise AssetFormatError("node registration requires a 64-byte public key")

    def canonical_bytes(self) -> bytes:
        return b"".join([
            codec.pack_str(self.action),
            codec.pack_str(self.node),
            codec.pack_bytes(self.pubkey),
        ])

    @classmethod
    def from_reader(cls, reader: ByteReader) -> "NodeEvent":
        return cls(action=reader.read_str(), node=reader.read_str(),
                   pubkey=reader.read_bytes())


_PAYLOAD_TYPES = {
    KIND_ASSET_ISSUE: AssetRecord,
    KIND_PERMISSION_SET: PermissionGrant,
    KIND_NODE_EVENT: NodeEvent,
}


@dataclass
class LedgerTransaction:
    kind: str
    sender: str
    created_ms: int
    payload: AssetRecord | PermissionGrant | NodeEvent
    signature: bytes = b""
    _tx_id: str | None = field(default=None, repr=False, compare=False)

    def body_bytes(self) -> bytes:
        return b"".join([
            codec.pack_str(self.kind),
            codec.pack_str(self.sender),
            codec.pack_u64(self.created_ms),
            codec.pack_bytes(self.payload.canonical_bytes()),
        ])

    @property
    def tx_id(self) -> str:
        # the id covers the signature bytes too, so the merkle root (and
        # through it the anchored blockhash) commits to every stored byte
        if self._tx_id is None:
            self._tx_id = crypto.double_sha256(self.canonical_bytes()).hex()
        return self._tx_id

    def tx_id_bytes(self) -> bytes:
        return bytes.fromhex(self.tx_id)

    def signing_digest(self) -> bytes:
        return crypto.double_sha256(_TX_SIGN_TAG + self.body_bytes())

    def sign(self, priv: int) -> "LedgerTransaction":
        self.signature = crypto.sign_digest(self.signing_digest(), priv)
        self._tx_id = None  # id depends on the signature just attached
        return self

    def canonical_bytes(self) -> bytes:
        return codec.pack_bytes(self.body_bytes()) + codec.pack_bytes(self.signature)

    @classmethod
    def from_bytes(cls, data: bytes) -> "LedgerTransaction":
        reader = ByteReader(data)
        tx = cls.from_reader(reader)
        reader.expect_end()
        return tx

    @classmethod
    def from_reader(cls, reader: ByteReader) -> "LedgerTransaction":
        body = reader.read_bytes()
        signature = reader.read_bytes()
        body_reader = ByteReader(body)
        kind = body_reader.read_str()
        sender = body_reader.read_str()
        created = body_reader.read_u64()
        payload_raw = body_reader.read_bytes()
        body_reader.expect_end()
        payload_type = _PAYLOAD_TYPES.get(kind)
        if payload_type is None:
            raise DecodeError(f"unknown transaction kind {kind!r}")
        payload_reader = ByteReader(payload_raw)
        payload = payload_type.from_reader(payload_reader)
        payload_reader.expect_end()
        return cls(kind=kind, sender=sender, created_ms=created,
                   payload=payload, signature=signature)


@dataclass
class Block:
    header: BlockHeader
    txs: list[LedgerTransaction]
    _hash: bytes | None = field(default=None, repr=False, compare=False)

    def block_hash(self) -> bytes:
        if self._hash is None:
            self._hash = compute_block_hash(self.header)
        return self._hash

    @property
    def hash_hex(self) -> str:
        return self.block_hash().hex()

    @property
    def height(self) -> int:
        return self.header.height

    def canonical_bytes(self) -> bytes:
        parts = [codec.pack_bytes(self.header.canonical_bytes()),
                 codec.pack_u32(len(self.txs))]
        parts.extend(codec.pack_bytes(tx.canonical_bytes()) for tx in self.txs)
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Block":
        reader = ByteReader(data)
        header_raw = reader.read_bytes()
        header_reader = ByteReader(header_raw)
        header = BlockHeader.from_reader(header_reader)
        header_reader.expect_end()
        count = reader.read_u32()
        txs = [LedgerTransaction.from_bytes(reader.read_bytes()) for _ in range(count)]
        reader.expect_end()
        return cls(header=header, txs=txs)
