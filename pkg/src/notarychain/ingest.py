"""File-ingestion pipeline: hash files (md5 + SHA-256), build the dotted-key
submission message, and POST it to the asset API with retry and an
append-only journal.

Discovery is deliberately simple — a one-shot directory scan and a polling
watch mode — because the pipeline's whole job is hash-and-POST; content
transfer and storage live elsewhere.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import httpx

log = logging.getLogger("notarychain.ingest")

CHUNK_SIZE = 1024 * 1024  # streaming bound: memory use is one chunk

TASK_PENDING = "pending"
TASK_SUBMITTED = "submitted"
TASK_ACCEPTED = "accepted"
TASK_ACCEPTED_DUPLICATE = "accepted_duplicate"
TASK_FAILED = "failed"

TERMINAL_STATES = frozenset(
    {TASK_ACCEPTED, TASK_ACCEPTED_DUPLICATE, TASK_FAILED})
DEFAULT_SOURCE_PREFIX = "network.notarychain/ingest"


@dataclass
class RetryPolicy:
    """Exponential backoff: 1 s, 2 s, 4 s ... capped, bounded attempts."""
    initial: float = 1.0
    factor: float = 2.0
    cap: float = 60.0
    max_attempts: int = 8

    def delay(self, attempt: int) -> float:
        return min(self.cap, self.initial * self.factor ** (attempt - 1))


@dataclass
class IngestTask:
    path: str
    source_uri: str
    parent_md5: str | None = None
    attempts: int = 0
    state: str = TASK_PENDING
    md5: str | None = None
    sha256: str | None = None
    byte_count: int | None = None
    tx_id: str | None = None
    detail: str | None = None

    @property
    def done(self) -> bool:
        return self.state in TERMINAL_STATES

    @property
    def accepted(self) -> bool:
        return self.state in (TASK_ACCEPTED, TASK_ACCEPTED_DUPLICATE)


def hash_file(path: str | Path,
              chunk_size: int = CHUNK_SIZE) -> tuple[str, str, int]:
    """(md5, sha256, byte_count) computed in one streaming pass."""
    md5 = hashlib.md5()
    sha256 = hashlib.sha256()
    total = 0
    with open(path, "rb") as fh:
        while True:
            chunk = fh.read(chunk_size)
            if not chunk:
                break
            md5.update(chunk)
            sha256.update(chunk)
            total += len(chunk)
    return md5.hexdigest(), sha256.hexdigest(), total


def source_uri_for(path: str | Path,
                   prefix: str = DEFAULT_SOURCE_PREFIX) -> str:
    """'<network-name>/<connector><absolute-path>' origin string."""
    return prefix.rstrip("/") + str(Path(path).resolve())


def build_ingest_message(task: IngestTask, hashes: tuple[str, str, int],
                         now_ms: int | None = None) -> dict:
    """Submission body with the dotted key names; timestamp in epoch
    milliseconds (13 digits for present-day clocks)."""
    md5, sha256, _count = hashes
    message = {
        "hash.md5": md5,
        "hash.sha256": sha256,
        "processed.ts": int(time.time() * 1000) if now_ms is None else now_ms,
        "source.uri": task.source_uri,
    }
    if task.parent_md5 is not None:
        message["parent.md5"] = task.parent_md5
    return message


class IngestJournal:
    """Append-only JSONL audit trail, one line per task state transition."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def record(self, task: IngestTask) -> None:
        entry = {"ts_ms": int(time.time() * 1000), "path": task.path,
                 "state": task.state, "attempts": task.attempts}
        if task.md5:
            entry["md5"] = task.md5
        if task.tx_id:
            entry["tx_id"] = task.tx_id
        if task.detail:
            entry["detail"] = task.detail
        line = json.dumps(entry, sort_keys=True)
        with self._lock, open(self.path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")

    @classmethod
    def replay(cls, path: str | Path) -> list[dict]:
        entries = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    entries.append(json.loads(line))
        return entries

    @classmethod
    def final_states(cls, path: str | Path) -> dict[str, str]:
        """Last recorded state per file path — the lost-task audit check."""
        finals: dict[str, str] = {}
        for entry in cls.replay(path):
            finals[entry["path"]] = entry["state"]
        return finals


class _NullJournal:
    def record(self, task: IngestTask) -> None:
        pass


def _transition(task: IngestTask, journal, state: str, **changes) -> IngestTask:
    task = replace(task, state=state, **changes)
    journal.record(task)
    return task


def ingest_path(task: IngestTask, api_url: str = "", *,
                client: httpx.Client | None = None,
                journal: IngestJournal | None = None,
                retry: RetryPolicy | None = None,
                sleep=time.sleep) -> IngestTask:
    """Hash → build → POST, retrying transient failures with backoff.

    Terminal states: accepted (201), accepted_duplicate (409 — the asset is
    already notarized, which satisfies the caller's goal and is reported
    distinctly), failed (other 4xx, unreadable file, or retries exhausted).
    """
    journal = journal or _NullJournal()
    retry = retry or RetryPolicy()
    journal.record(task)

    try:
        hashes = hash_file(task.path)
    except OSError as exc:
        return _transition(task, journal, TASK_FAILED, detail=str(exc))
    task = replace(task, md5=hashes[0], sha256=hashes[1],
                   byte_count=hashes[2])

    owns_client = client is None
    if owns_client:
        client = httpx.Client(base_url=api_url, timeout=10.0)
    try:
        while task.attempts < retry.max_attempts:
            task = _transition(task, journal, TASK_SUBMITTED,
                               attempts=task.attempts + 1)
            try:
                response = client.post(
                    "/assets", json=build_ingest_message(task, hashes))
            except httpx.HTTPError as exc:
                detail = f"transport: {exc}"
                response = None
            else:
                if response.status_code == 201:
                    return _transition(task, journal, TASK_ACCEPTED,
                                       tx_id=response.json().get("txId"))
                if response.status_code == 409:
                    return _transition(task, journal,
                                       TASK_ACCEPTED_DUPLICATE,
                                       detail="already notarized")
                detail = f"HTTP {response.status_code}: {response.text[:200]}"
            transient = response is None or response.status_code >= 500 \
                or response.status_code == 429
            if not transient:
                return _transition(task, journal, TASK_FAILED, detail=detail)
            if task.attempts >= retry.max_attempts:
                break
            delay = retry.delay(task.attempts)
            log.warning("ingest %s attempt %d failed (%s); retrying in %.1fs",
                        task.path, task.attempts, detail, delay)
            sleep(delay)
        return _transition(task, journal, TASK_FAILED,
                           detail=f"retries exhausted: {detail}")
    finally:
        if owns_client:
            client.close()


def register_derived_asset(parent_md5: str, derived_path: str | Path,
                           api_url: str = "", *,
                           source_prefix: str = DEFAULT_SOURCE_PREFIX,
                           **kwargs) -> IngestTask:
    """Notarize a file produced from an existing asset; the new record's
    lineage points at parent_md5."""
    task = IngestTask(path=str(derived_path),
                      source_uri=source_uri_for(derived_path, source_prefix),
                      parent_md5=parent_md5)
    return ingest_path(task, api_url, **kwargs)


def _discover(root: Path) -> list[Path]:
    return sorted(p for p in root.rglob("*") if p.is_file())


def scan_directory(root: str | Path, api_url: str = "", *,
                   source_prefix: str = DEFAULT_SOURCE_PREFIX,
                   parallelism: int = 4, parent_md5: str | None = None,
                   **kwargs) -> list[IngestTask]:
    """One-shot ingest of every file under root; bounded concurrency."""
    root = Path(root)
    tasks = [IngestTask(path=str(p),
                        source_uri=source_uri_for(p, source_prefix),
                        parent_md5=parent_md5)
             for p in _discover(root)]
    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        return list(pool.map(
            lambda t: ingest_path(t, api_url, **kwargs), tasks))


class DirectoryWatcher:
    """Polling watcher: each cycle ingests files not seen before. No
    filesystem-event dependency; a poll interval of a few seconds is well
    within the pipeline's latency budget."""

    def __init__(self, root: str | Path, api_url: str = "", *,
                 source_prefix: str = DEFAULT_SOURCE_PREFIX,
                 parallelism: int = 4, **kwargs):
        self.root = Path(root)
        self.api_url = api_url
        self.source_prefix = source_prefix
        self.parallelism = parallelism
        self.kwargs = kwargs
        self.seen: set[str] = set()
        self.results: list[IngestTask] = []

    def cycle(self) -> list[IngestTask]:
        """Ingest everything new; returns this cycle's tasks."""
        fresh = [p for p in _discover(self.root) if str(p) not in self.seen]
        self.seen.update(str(p) for p in fresh)
        if not fresh:
            return []
        tasks = [IngestTask(path=str(p),
                            source_uri=source_uri_for(p, self.source_prefix))
                 for p in fresh]
        with ThreadPoolExecutor(max_workers=max(1, self.parallelism)) as pool:
            done = list(pool.map(
                lambda t: ingest_path(t, self.api_url, **self.kwargs), tasks))
        self.results.extend(done)
        return done

    def run(self, interval: float = 2.0,
            stop: threading.Event | None = None) -> list[IngestTask]:
        stop = stop or threading.Event()
        while not stop.is_set():
            self.cycle()
            stop.wait(interval)
        return self.results


def all_accepted(tasks: list[IngestTask]) -> bool:
    """Exit-code predicate: True only when every task landed."""
    return all(t.accepted for t in tasks)
