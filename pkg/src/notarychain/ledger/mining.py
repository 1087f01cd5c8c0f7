"""Block production: proof-of-work search and genesis construction."""

from __future__ import annotations

import time

from .._kernels import pow_search
from ..identity import NodeIdentity
from .errors import DuplicateAssetError, InvalidBlockError
from .types import (
    ALL_PERMISSIONS,
    Block,
    BlockHeader,
    GENESIS_PREV_HASH,
    HEADER_NONCE_OFFSET,
    KIND_ASSET_ISSUE,
    LedgerTransaction,
    NODE_ADD,
    NodeEvent,
    PermissionGrant,
    compute_block_hash,
    merkle_root,
)


def meets_difficulty(digest: bytes, difficulty: int) -> bool:
    """True iff the digest has at least `difficulty` leading zero hex chars."""
    zero_bytes, odd = divmod(difficulty, 2)
    if digest[:zero_bytes] != bytes(zero_bytes):
        return False
    return not odd or digest[zero_bytes] < 0x10


def mine_block(pending: list[LedgerTransaction], parent: BlockHeader,
               difficulty: int, *, miner: str,
               timestamp: int | None = None, start_nonce: int = 0) -> Block:
    """Assemble and mine the next block on top of `parent`.

    Transactions are included in the given order. A pending set carrying two
    issues of the same md5 index is rejected, naming the offending tx; the
    remaining validity rules are enforced at append time.
    """
    seen_md5: set[str] = set()
    for tx in pending:
        if tx.kind != KIND_ASSET_ISSUE:
            continue
        md5 = tx.payload.md5_index
        if md5 in seen_md5:
            raise DuplicateAssetError(md5, tx.tx_id)
        seen_md5.add(md5)

    now = int(time.time()) if timestamp is None else timestamp
    header = BlockHeader(
        height=parent.height + 1,
        prev_hash=compute_block_hash(parent).hex(),
        tx_root=merkle_root([tx.tx_id_bytes() for tx in pending]).hex(),
        timestamp=max(now, parent.timestamp),
        nonce=start_nonce,
        miner=miner,
    )
    return _mine_header(header, list(pending), difficulty, start_nonce)


def create_genesis(master: NodeIdentity, difficulty: int, *,
                   timestamp: int | None = None,
                   extra_txs: list[LedgerTransaction] | None = None) -> Block:
    """Genesis block: registers the master's key and grants it every
    permission. extra_txs lets a deployment pre-register client nodes."""
    now = int(time.time()) if timestamp is None else timestamp
    txs = [
        LedgerTransaction(
            kind="node_event", sender=master.name, created_ms=now * 1000,
            payload=NodeEvent(action=NODE_ADD, node=master.name,
                              pubkey=master.public_key),
        ).sign(master.private_key),
        LedgerTransaction(
            kind="permission_set", sender=master.name, created_ms=now * 1000,
            payload=PermissionGrant(subject=master.name,
                                    permissions=ALL_PERMISSIONS,
                                    granted=True, issuer=master.name),
        ).sign(master.private_key),
    ]
    txs.extend(extra_txs or [])
    header = BlockHeader(
        height=0, prev_hash=GENESIS_PREV_HASH,
        tx_root=merkle_root([tx.tx_id_bytes() for tx in txs]).hex(),
        timestamp=now, nonce=0, miner=master.name,
    )
    return _mine_header(header, txs, difficulty, 0)


def _mine_header(header: BlockHeader, txs: list[LedgerTransaction],
                 difficulty: int, start_nonce: int) -> Block:
    found = pow_search(header.canonical_bytes(), HEADER_NONCE_OFFSET,
                       difficulty, start_nonce)
    if found is None:
        raise InvalidBlockError("proof-of-work search exhausted the nonce space")
    header.nonce, digest = found
    return Block(header=header, txs=txs, _hash=digest)
