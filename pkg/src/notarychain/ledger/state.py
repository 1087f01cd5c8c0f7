"""Chain state: a pure fold over the block list.

ChainState instances are immutable; appending a block produces a new state.
Readers therefore always see a consistent snapshot, and rebuilding from the
raw block list reproduces the derived indexes exactly.

Permission and key changes take effect at the next block: transactions inside
block N are checked against the tables as of block N-1, while asset issuance
(uniqueness, lineage) is checked against a view that evolves in transaction
order within the block.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from types import MappingProxyType

from .. import crypto
from .errors import (
    DuplicateAssetError,
    InsufficientDepthError,
    InvalidBlockError,
    InvalidProofError,
    InvalidTransactionError,
    AssetFormatError,
    PermissionDeniedError,
    StaleParentError,
)
from .types import (
    ALL_PERMISSIONS,
    AssetRecord,
    Block,
    GENESIS_PREV_HASH,
    KIND_ASSET_ISSUE,
    KIND_NODE_EVENT,
    KIND_PERMISSION_SET,
    LedgerTransaction,
    NODE_ADD,
    NODE_REMOVE,
    NodeEvent,
    PERM_ADMIN,
    PERM_MINE,
    PERM_SEND,
    PermissionGrant,
    is_md5_hex,
    merkle_root,
)
from .mining import meets_difficulty

REQUIRED_PERMISSION = {
    KIND_ASSET_ISSUE: PERM_SEND,
    KIND_PERMISSION_SET: PERM_ADMIN,
    KIND_NODE_EVENT: PERM_ADMIN,
}

# An asset is reported to queries only once its block is buried at least this
# deep below the tip.
ASSET_REPORT_DEPTH = 1


@lru_cache(maxsize=1 << 16)
def _signature_ok(digest: bytes, signature: bytes, pubkey: bytes) -> bool:
    # Verification is the hot cost of replaying a chain; identical
    # (digest, sig, key) triples recur on every revalidation.
    return crypto.verify_digest(digest, signature, pubkey)


@dataclass(frozen=True)
class AssetEntry:
    record: AssetRecord
    tx_id: str
    height: int
    block_time: int  # unix seconds of the containing block


@dataclass(frozen=True)
class AssetView:
    """query_asset result: the record plus its chain placement."""
    record: AssetRecord
    issue_tx_id: str
    block_hash: str
    block_time: int
    height: int


class ChainState:
    """Derived state of a validated block list."""

    __slots__ = ("difficulty", "blocks", "hashes", "asset_index",
                 "permission_table", "node_keys", "tx_index")

    def __init__(self, difficulty, blocks, hashes, asset_index,
                 permission_table, node_keys, tx_index):
        self.difficulty = difficulty
        self.blocks = blocks
        self.hashes = hashes
        self.asset_index = MappingProxyType(asset_index)
        self.permission_table = MappingProxyType(permission_table)
        self.node_keys = MappingProxyType(node_keys)
        self.tx_index = MappingProxyType(tx_index)

    # -- constructors ------------------------------------------------------

    @classmethod
    def genesis(cls, block: Block, difficulty: int) -> "ChainState":
        header = block.header
        if header.height != 0:
            raise InvalidBlockError(f"genesis height must be 0, got {header.height}")
        if header.prev_hash != GENESIS_PREV_HASH:
            raise InvalidBlockError("genesis prev_hash must be all zeros")
        digest = block.block_hash()
        if not meets_difficulty(digest, difficulty):
            raise InvalidProofError("genesis proof of work below difficulty target")
        if header.tx_root != merkle_root([tx.tx_id_bytes() for tx in block.txs]).hex():
            raise InvalidBlockError("genesis tx_root does not match transactions")
        if not block.txs:
            raise InvalidBlockError("genesis must register the master node")
        first = block.txs[0]
        if first.kind != KIND_NODE_EVENT or first.payload.action != NODE_ADD \
                or first.payload.node != header.miner:
            raise InvalidBlockError(
                "genesis must open with the master node's key registration")

        # Bootstrap: the miner (master) acts with full permissions; its key
        # comes from the registration inside this very block.
        node_keys: dict[str, bytes] = {}
        perms: dict[str, frozenset] = {header.miner: ALL_PERMISSIONS}
        assets: dict[str, AssetEntry] = {}
        tx_index: dict[str, tuple[int, int]] = {}
        for pos, tx in enumerate(block.txs):
            if tx.sender != header.miner:
                raise InvalidTransactionError(
                    f"genesis transaction from {tx.sender!r}, expected master", tx.tx_id)
            if pos == 0:
                # Key known only after reading the payload; verify against it.
                _check_tx(tx, {header.miner: first.payload.pubkey}, perms, assets=assets)
            else:
                _check_tx(tx, node_keys, perms, assets=assets)
            _apply_tx(tx, header, node_keys, perms, assets, tx_index, pos)
        if not ALL_PERMISSIONS <= perms.get(header.miner, frozenset()):
            raise InvalidBlockError("genesis must grant the master node all permissions")
        return cls(difficulty=difficulty, blocks=(block,), hashes=(digest.hex(),),
                   asset_index=assets, permission_table=perms,
                   node_keys=node_keys, tx_index=tx_index)

    @classmethod
    def from_blocks(cls, blocks: list[Block], difficulty: int) -> "ChainState":
        """Replay a full block list from genesis; raises on any invalid block."""
        if not blocks:
            raise InvalidBlockError("empty chain")
        state = cls.genesis(blocks[0], difficulty)
        for block in blocks[1:]:
            state = state.append(block)
        return state

    # -- append ------------------------------------------------------------

    def append(self, block: Block) -> "ChainState":
        """Validate and apply one block on top of this state; all-or-nothing."""
        header = block.header
        parent = self.blocks[-1].header
        if header.prev_hash != self.hashes[-1]:
            raise StaleParentError(
                f"block {header.height} does not extend tip {self.hashes[-1][:16]}")
        if header.height != parent.height + 1:
            raise InvalidBlockError(
                f"height {header.height} after parent {parent.height}")
        if header.timestamp < parent.timestamp:
            raise InvalidBlockError(
                f"timestamp {header.timestamp} earlier than parent {parent.timestamp}")
        digest = block.block_hash()
        if not meets_difficulty(digest, self.difficulty):
            raise InvalidProofError(
                f"block {header.height} proof of work below difficulty target")
        if header.tx_root != merkle_root([tx.tx_id_bytes() for tx in block.txs]).hex():
            raise InvalidBlockError(f"block {header.height} tx_root mismatch")
        miner_perms = self.permission_table.get(header.miner, frozenset())
        if PERM_MINE not in miner_perms:
            raise PermissionDeniedError(header.miner, PERM_MINE)

        node_keys = dict(self.node_keys)
        perms = dict(self.permission_table)
        assets = dict(self.asset_index)
        tx_index = dict(self.tx_index)
        snapshot_keys = self.node_keys
        snapshot_perms = self.permission_table
        for pos, tx in enumerate(block.txs):
            _check_tx(tx, snapshot_keys, snapshot_perms, assets=assets)
            _apply_tx(tx, header, node_keys, perms, assets, tx_index, pos)
        return ChainState(difficulty=self.difficulty,
                          blocks=self.blocks + (block,),
                          hashes=self.hashes + (digest.hex(),),
                          asset_index=assets, permission_table=perms,
                          node_keys=node_keys, tx_index=tx_index)

    # -- queries -----------------------------------------------------------

    @property
    def tip(self) -> Block:
        return self.blocks[-1]

    @property
    def tip_hash(self) -> str:
        return self.hashes[-1]

    @property
    def height(self) -> int:
        return self.blocks[-1].header.height

    def permissions_of(self, node: str) -> frozenset:
        return self.permission_table.get(node, frozenset())

    def key_of(self, node: str) -> bytes | None:
        return self.node_keys.get(node)

    def get_asset(self, md5_index: str) -> AssetEntry | None:
        return self.asset_index.get(md5_index)

    def block_at(self, height: int) -> Block | None:
        if 0 <= height <= self.height:
            return self.blocks[height]
        return None

    def hash_at(self, height: int) -> str | None:
        if 0 <= height <= self.height:
            return self.hashes[height]
        return None

    def find_block_by_hash(self, hash_hex: str) -> Block | None:
        try:
            idx = self.hashes.index(hash_hex)
        except ValueError:
            return None
        return self.blocks[idx]

    def find_tx(self, tx_id: str) -> tuple[LedgerTransaction, int] | None:
        """Returns (tx, height) or None."""
        loc = self.tx_index.get(tx_id)
        if loc is None:
            return None
        height, pos = loc
        return self.blocks[height].txs[pos], height


def query_asset(state: ChainState, md5_index: str,
                min_depth: int = ASSET_REPORT_DEPTH) -> AssetView | None:
    """Confirmed-asset lookup. Returns None when the index is unknown or the
    containing block is not yet buried min_depth below the tip."""
    if not is_md5_hex(md5_index):
        raise AssetFormatError(
            f"md5 index must be exactly 32 lowercase hex chars, got {md5_index!r}")
    entry = state.get_asset(md5_index)
    if entry is None:
        return None
    if state.height - entry.height < min_depth:
        return None
    return AssetView(record=entry.record, issue_tx_id=entry.tx_id,
                     block_hash=state.hashes[entry.height],
                     block_time=entry.block_time, height=entry.height)


def latest_confirmed_blockhash(state: ChainState, confirm_depth: int) -> tuple[str, int]:
    """Hash and height of the block confirm_depth behind the tip."""
    if len(state.blocks) <= confirm_depth:
        raise InsufficientDepthError(
            f"chain has {len(state.blocks)} blocks, need more than {confirm_depth}")
    height = state.height - confirm_depth
    return state.hashes[height], height


# -- shared tx machinery ---------------------------------------------------

def _check_tx(tx: LedgerTransaction, keys, perms, assets=None) -> None:
    tx.payload.validate()
    required = REQUIRED_PERMISSION[tx.kind]
    pubkey = keys.get(tx.sender)
    if pubkey is None:
        raise InvalidTransactionError(f"unknown sender {tx.sender!r}", tx.tx_id)
    if not _signature_ok(tx.signing_digest(), tx.signature, pubkey):
        raise InvalidTransactionError(f"bad signature from {tx.sender!r}", tx.tx_id)
    if required not in perms.get(tx.sender, frozenset()):
        raise PermissionDeniedError(tx.sender, required, tx.tx_id)
    if tx.kind == KIND_ASSET_ISSUE and assets is not None:
        record = tx.payload
        if record.md5_index in assets:
            raise DuplicateAssetError(record.md5_index, tx.tx_id)
        if record.parent_md5 is not None and record.parent_md5 not in assets:
            raise InvalidTransactionError(
                f"parent asset {record.parent_md5} not on chain", tx.tx_id)
    elif tx.kind == KIND_PERMISSION_SET:
        if tx.payload.issuer != tx.sender:
            raise InvalidTransactionError(
                "grant issuer does not match transaction sender", tx.tx_id)


def _apply_tx(tx, header, node_keys, perms, assets, tx_index, pos) -> None:
    if tx.tx_id in tx_index:
        raise InvalidTransactionError(f"duplicate transaction {tx.tx_id[:16]}", tx.tx_id)
    tx_index[tx.tx_id] = (header.height, pos)
    if tx.kind == KIND_ASSET_ISSUE:
        record = tx.payload
        assets[record.md5_index] = AssetEntry(record=record, tx_id=tx.tx_id,
                                              height=header.height,
                                              block_time=header.timestamp)
    elif tx.kind == KIND_PERMISSION_SET:
        grant: PermissionGrant = tx.payload
        current = perms.get(grant.subject, frozenset())
        if grant.granted:
            perms[grant.subject] = current | grant.permissions
        else:
            perms[grant.subject] = current - grant.permissions
    elif tx.kind == KIND_NODE_EVENT:
        event: NodeEvent = tx.payload
        if event.action == NODE_ADD:
            if event.node in node_keys:
                raise InvalidTransactionError(
                    f"node {event.node!r} already registered", tx.tx_id)
            node_keys[event.node] = event.pubkey
        elif event.action == NODE_REMOVE:
            if event.node not in node_keys:
                raise InvalidTransactionError(
                    f"node {event.node!r} not registered", tx.tx_id)
            del node_keys[event.node]
            perms.pop(event.node, None)
