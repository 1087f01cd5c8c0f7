"""Append-only permissioned ledger: blocks, transactions, chain state."""

from .types import (
    ALL_PERMISSIONS,
    AssetRecord,
    Block,
    BlockHeader,
    GENESIS_PREV_HASH,
    LedgerTransaction,
    NodeEvent,
    PermissionGrant,
    compute_block_hash,
    merkle_root,
)
from .errors import (
    AssetFormatError,
    DuplicateAssetError,
    InsufficientDepthError,
    InvalidBlockError,
    InvalidProofError,
    InvalidTransactionError,
    LedgerError,
    PermissionDeniedError,
    StaleParentError,
)
from .txbuild import issue_asset_tx, set_permission_tx, node_event_tx
from .state import AssetView, ChainState, latest_confirmed_blockhash, query_asset
from .mining import create_genesis, mine_block
from .validate import ValidationReport, validate_chain
from .pool import PendingPool
from .store import BlockLog

__all__ = [
    "ALL_PERMISSIONS",
    "AssetFormatError",
    "AssetRecord",
    "AssetView",
    "Block",
    "BlockHeader",
    "BlockLog",
    "ChainState",
    "DuplicateAssetError",
    "GENESIS_PREV_HASH",
    "InsufficientDepthError",
    "InvalidBlockError",
    "InvalidProofError",
    "InvalidTransactionError",
    "LedgerError",
    "LedgerTransaction",
    "NodeEvent",
    "PendingPool",
    "PermissionDeniedError",
    "PermissionGrant",
    "StaleParentError",
    "ValidationReport",
    "compute_block_hash",
    "create_genesis",
    "issue_asset_tx",
    "latest_confirmed_blockhash",
    "merkle_root",
    "mine_block",
    "node_event_tx",
    "query_asset",
    "set_permission_tx",
    "validate_chain",
]
