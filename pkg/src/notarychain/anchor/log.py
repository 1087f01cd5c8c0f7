"""Durable anchor history and failed-attempt audit trail.

SQLite in WAL mode: append-only rows, indexed by time and by private chain
height (the verification path asks "earliest anchor covering height H").
The only permitted mutation is the status upgrade submitted → confirmed /
failed, which mirrors what the public chain reports.
"""

from __future__ import annotations

import sqlite3
import threading
import time
from dataclasses import dataclass
from pathlib import Path

STATUS_SUBMITTED = "submitted"
STATUS_CONFIRMED = "confirmed"
STATUS_FAILED = "failed"

_SCHEMA = """
CREATE TABLE IF NOT EXISTS anchors (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    anchored_at INTEGER NOT NULL,
    private_blockhash TEXT NOT NULL,
    private_height INTEGER NOT NULL,
    eth_tx_hash TEXT NOT NULL,
    wallet_address TEXT NOT NULL,
    backend TEXT NOT NULL,
    status TEXT NOT NULL,
    nonce INTEGER NOT NULL,
    gas_price INTEGER NOT NULL,
    gas_limit INTEGER NOT NULL,
    raw_tx TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_anchors_time ON anchors(anchored_at);
CREATE INDEX IF NOT EXISTS idx_anchors_height ON anchors(private_height);
CREATE TABLE IF NOT EXISTS audit_log (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    at INTEGER NOT NULL,
    event TEXT NOT NULL,
    detail TEXT NOT NULL
);
"""


@dataclass(frozen=True)
class AnchorRecord:
    """One private→public synchronization event."""
    id: int
    anchored_at: int  # unix seconds
    private_blockhash: str
    private_height: int
    eth_tx_hash: str
    wallet_address: str  # 0x hex
    backend: str
    status: str
    nonce: int
    gas_price: int
    gas_limit: int
    raw_tx: str  # hex of the broadcast bytes — the full audit record


def _row_to_record(row: sqlite3.Row) -> AnchorRecord:
    return AnchorRecord(**{key: row[key] for key in row.keys()})


class AnchorLog:
    def __init__(self, path: str | Path):
        self._lock = threading.RLock()
        self._db = sqlite3.connect(str(path), check_same_thread=False)
        self._db.row_factory = sqlite3.Row
        with self._lock, self._db:
            self._db.execute("PRAGMA journal_mode=WAL")
            self._db.executescript(_SCHEMA)

    def close(self) -> None:
        self._db.close()

    # -- anchors -----------------------------------------------------------

    def record_anchor(self, *, private_blockhash: str, private_height: int,
                      eth_tx_hash: str, wallet_address: str, backend: str,
                      nonce: int, gas_price: int, gas_limit: int, raw_tx: str,
                      status: str = STATUS_SUBMITTED,
                      anchored_at: int | None = None) -> AnchorRecord:
        at = int(time.time()) if anchored_at is None else anchored_at
        with self._lock, self._db:
            cursor = self._db.execute(
                "INSERT INTO anchors (anchored_at, private_blockhash,"
                " private_height, eth_tx_hash, wallet_address, backend, status,"
                " nonce, gas_price, gas_limit, raw_tx)"
                " VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
                (at, private_blockhash, private_height, eth_tx_hash,
                 wallet_address, backend, status, nonce, gas_price, gas_limit,
                 raw_tx))
            return self.get(cursor.lastrowid)

    def get(self, anchor_id: int) -> AnchorRecord | None:
        with self._lock:
            row = self._db.execute("SELECT * FROM anchors WHERE id = ?",
                                   (anchor_id,)).fetchone()
        return _row_to_record(row) if row else None

    def update_status(self, anchor_id: int, status: str) -> None:
        if status not in (STATUS_SUBMITTED, STATUS_CONFIRMED, STATUS_FAILED):
            raise ValueError(f"unknown anchor status {status!r}")
        with self._lock, self._db:
            self._db.execute("UPDATE anchors SET status = ? WHERE id = ?",
                             (status, anchor_id))

    def latest(self) -> AnchorRecord | None:
        with self._lock:
            row = self._db.execute(
                "SELECT * FROM anchors ORDER BY id DESC LIMIT 1").fetchone()
        return _row_to_record(row) if row else None

    def history(self, limit: int = 50,
                before_id: int | None = None) -> list[AnchorRecord]:
        """Newest first; pass the last seen id to page further back."""
        query = "SELECT * FROM anchors"
        params: tuple = ()
        if before_id is not None:
            query += " WHERE id < ?"
            params = (before_id,)
        query += " ORDER BY id DESC LIMIT ?"
        with self._lock:
            rows = self._db.execute(query, params + (limit,)).fetchall()
        return [_row_to_record(row) for row in rows]

    def covering(self, private_height: int) -> AnchorRecord | None:
        """Earliest non-failed anchor whose snapshot includes the given
        private-chain height."""
        with self._lock:
            row = self._db.execute(
                "SELECT * FROM anchors WHERE private_height >= ? AND status != ?"
                " ORDER BY id ASC LIMIT 1",
                (private_height, STATUS_FAILED)).fetchone()
        return _row_to_record(row) if row else None

    def count(self) -> int:
        with self._lock:
            return self._db.execute("SELECT COUNT(*) FROM anchors").fetchone()[0]

    # -- audit trail -------------------------------------------------------

    def audit(self, event: str, detail: str, at: int | None = None) -> None:
        with self._lock, self._db:
            self._db.execute(
                "INSERT INTO audit_log (at, event, detail) VALUES (?, ?, ?)",
                (int(time.time()) if at is None else at, event, detail))

    def audit_tail(self, limit: int = 50) -> list[tuple[int, str, str]]:
        """Newest first: (at, event, detail) triples."""
        with self._lock:
            rows = self._db.execute(
                "SELECT at, event, detail FROM audit_log ORDER BY id DESC"
                " LIMIT ?", (limit,)).fetchall()
        return [(row["at"], row["event"], row["detail"]) for row in rows]
