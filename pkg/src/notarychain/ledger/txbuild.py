"""Construction of signed ledger transactions.

Builders check preconditions against the provided chain state (and pending
pool, where relevant) before signing. The same rules are re-checked when a
block is appended, so a stale builder view can never corrupt the chain.
"""

from __future__ import annotations

import time

from ..identity import NodeIdentity
from .errors import DuplicateAssetError, PermissionDeniedError
from .types import (
    AssetRecord,
    KIND_ASSET_ISSUE,
    KIND_NODE_EVENT,
    KIND_PERMISSION_SET,
    LedgerTransaction,
    NodeEvent,
    PermissionGrant,
    PERM_ADMIN,
    PERM_SEND,
)


def _now_ms() -> int:
    return int(time.time() * 1000)


def issue_asset_tx(asset: AssetRecord, issuer: NodeIdentity, *,
                   state=None, pool=None, now_ms: int | None = None) -> LedgerTransaction:
    """Signed asset-issue transaction, ready for broadcast.

    Raises AssetFormatError for malformed fields, PermissionDeniedError if the
    issuer lacks send permission, DuplicateAssetError if the md5 index is
    already confirmed or pending.
    """
    asset.validate()
    if state is not None:
        if PERM_SEND not in state.permissions_of(issuer.name):
            raise PermissionDeniedError(issuer.name, PERM_SEND)
        if state.get_asset(asset.md5_index) is not None:
            raise DuplicateAssetError(asset.md5_index)
    if pool is not None and pool.has_md5(asset.md5_index):
        raise DuplicateAssetError(asset.md5_index)
    tx = LedgerTransaction(kind=KIND_ASSET_ISSUE, sender=issuer.name,
                           created_ms=now_ms if now_ms is not None else _now_ms(),
                           payload=asset)
    return tx.sign(issuer.private_key)


def set_permission_tx(grant: PermissionGrant, issuer: NodeIdentity, *,
                      state=None, now_ms: int | None = None) -> LedgerTransaction:
    """Signed permission grant/revoke. The issuer must hold admin."""
    grant.validate()
    if grant.issuer != issuer.name:
        raise PermissionDeniedError(issuer.name, PERM_ADMIN)
    if state is not None and PERM_ADMIN not in state.permissions_of(issuer.name):
        raise PermissionDeniedError(issuer.name, PERM_ADMIN)
    tx = LedgerTransaction(kind=KIND_PERMISSION_SET, sender=issuer.name,
                           created_ms=now_ms if now_ms is not None else _now_ms(),
                           payload=grant)
    return tx.sign(issuer.private_key)


def node_event_tx(event: NodeEvent, issuer: NodeIdentity, *,
                  state=None, now_ms: int | None = None) -> LedgerTransaction:
    """Signed node add/remove event. The issuer must hold admin."""
    event.validate()
    if state is not None and PERM_ADMIN not in state.permissions_of(issuer.name):
        raise PermissionDeniedError(issuer.name, PERM_ADMIN)
    tx = LedgerTransaction(kind=KIND_NODE_EVENT, sender=issuer.name,
                           created_ms=now_ms if now_ms is not None else _now_ms(),
                           payload=event)
    return tx.sign(issuer.private_key)
