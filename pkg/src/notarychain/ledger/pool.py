"""Pending transaction pool.

Admission re-runs the same checks a block append would apply, against the
chain state the caller passes in, so the pool only ever holds transactions
that could be mined right now.
"""

from __future__ import annotations

import threading

from .errors import DuplicateAssetError, InvalidTransactionError, PermissionDeniedError
from .state import ChainState, REQUIRED_PERMISSION, _signature_ok
from .types import KIND_ASSET_ISSUE, LedgerTransaction


class PendingPool:
    def __init__(self):
        self._lock = threading.RLock()
        self._txs: dict[str, LedgerTransaction] = {}
        self._md5s: set[str] = set()

    def __len__(self) -> int:
        return len(self._txs)

    def __contains__(self, tx_id: str) -> bool:
        return tx_id in self._txs

    def has_md5(self, md5_index: str) -> bool:
        return md5_index in self._md5s

    def add(self, tx: LedgerTransaction, state: ChainState) -> bool:
        """Validate and admit. Returns False when the tx is already pooled;
        raises InvalidTransactionError subclasses on anything inadmissible."""
        with self._lock:
            if tx.tx_id in self._txs:
                return False
            tx.payload.validate()
            pubkey = state.key_of(tx.sender)
            if pubkey is None:
                raise InvalidTransactionError(f"unknown sender {tx.sender!r}", tx.tx_id)
            if not _signature_ok(tx.signing_digest(), tx.signature, pubkey):
                raise InvalidTransactionError(f"bad signature from {tx.sender!r}", tx.tx_id)
            required = REQUIRED_PERMISSION[tx.kind]
            if required not in state.permissions_of(tx.sender):
                raise PermissionDeniedError(tx.sender, required, tx.tx_id)
            if tx.kind == KIND_ASSET_ISSUE:
                md5 = tx.payload.md5_index
                if md5 in self._md5s or state.get_asset(md5) is not None:
                    raise DuplicateAssetError(md5, tx.tx_id)
                parent = tx.payload.parent_md5
                if parent is not None and state.get_asset(parent) is None:
                    raise InvalidTransactionError(
                        f"parent asset {parent} not on chain", tx.tx_id)
                self._md5s.add(md5)
            self._txs[tx.tx_id] = tx
            return True

    def snapshot(self) -> list[LedgerTransaction]:
        with self._lock:
            return list(self._txs.values())

    def drop_confirmed(self, state: ChainState) -> None:
        """Remove transactions that are now on chain (or whose md5 is)."""
        with self._lock:
            stale = []
            for tx_id, tx in self._txs.items():
                if state.find_tx(tx_id) is not None:
                    stale.append(tx_id)
                elif tx.kind == KIND_ASSET_ISSUE and \
                        state.get_asset(tx.payload.md5_index) is not None:
                    stale.append(tx_id)
            for tx_id in stale:
                tx = self._txs.pop(tx_id)
                if tx.kind == KIND_ASSET_ISSUE:
                    self._md5s.discard(tx.payload.md5_index)

    def readmit(self, txs: list[LedgerTransaction], state: ChainState) -> int:
        """Return orphaned transactions (for example from a losing fork
        branch) to the pool; silently skips any that are no longer valid."""
        count = 0
        for tx in txs:
            if state.find_tx(tx.tx_id) is not None:
                continue
            try:
                if self.add(tx, state):
                    count += 1
            except InvalidTransactionError:
                continue
        return count
