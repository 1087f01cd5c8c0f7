"""Peer node: admission-gated sessions, broadcast, sync, fork resolution.

All chain mutation funnels through one lock (the ledger's single-writer
contract); each peer connection gets its own reader thread. Replication is
pull-assisted push: blocks are broadcast, and a receiver that cannot attach
a block asks the sender for everything above its own tip, falling back to a
full-chain comparison when the histories have diverged.
"""

from __future__ import annotations

import logging
import socket
import threading
from dataclasses import dataclass, field
from typing import Sequence

import queue

from ..codec import DecodeError
from ..identity import NodeIdentity
from ..ledger import (
    BlockLog,
    ChainState,
    PendingPool,
    mine_block,
    validate_chain,
)
from ..ledger.errors import (
    InvalidBlockError,
    LedgerError,
    StaleParentError,
)
from ..ledger.types import Block, KIND_ASSET_ISSUE, LedgerTransaction, PERM_CONNECT
from . import messages
from .messages import Envelope
from .transport import TcpTransport, TransportClosed, TransportTimeout

log = logging.getLogger("notarychain.network")

SESSION_HANDSHAKING = "handshaking"
SESSION_ACTIVE = "active"
SESSION_REJECTED = "rejected"
SESSION_CLOSED = "closed"

SYNC_BATCH = 500  # blocks per get_blocks reply


class HandshakeError(Exception):
    """Admission failed: unknown identity, bad signature, or no connect
    permission."""


class IncompatibleNetworkError(Exception):
    """Chains do not share a genesis block."""


@dataclass
class PeerSession:
    peer_id: str
    remote_address: str
    permissions: frozenset
    state: str
    transport: object
    flagged: str | None = None
    _replies: "queue.Queue[bytes]" = field(default_factory=queue.Queue,
                                           repr=False)
    _request_lock: threading.Lock = field(default_factory=threading.Lock,
                                          repr=False)
    _sync_running: threading.Lock = field(default_factory=threading.Lock,
                                          repr=False)


@dataclass
class DeliveryReport:
    """Per-peer outcome of one broadcast."""
    delivered: dict[str, bool] = field(default_factory=dict)
    errors: dict[str, str] = field(default_factory=dict)

    @property
    def ok_count(self) -> int:
        return sum(1 for ok in self.delivered.values() if ok)

    def all_ok(self) -> bool:
        return all(self.delivered.values()) if self.delivered else True


@dataclass
class ForkDecision:
    chain: list[Block]
    adopted: bool  # True when the remote branch replaced the local one
    orphaned_txs: list[LedgerTransaction]


def resolve_fork(local: Sequence[Block], remote: Sequence[Block],
                 difficulty: int) -> ForkDecision:
    """Longest valid chain wins; ties keep the incumbent local chain. The
    losing branch's asset transactions that the winner lacks are handed back
    for re-mining."""
    if not local or not remote:
        raise InvalidBlockError("cannot resolve against an empty chain")
    if local[0].hash_hex != remote[0].hash_hex:
        raise IncompatibleNetworkError(
            "remote chain grows from a different genesis")
    report = validate_chain(list(remote), difficulty)
    if not report:
        raise InvalidBlockError(f"remote chain invalid: {report.reason}")
    adopted = len(remote) > len(local)
    winner = list(remote) if adopted else list(local)
    loser = local if adopted else remote
    winner_ids = {tx.tx_id for block in winner for tx in block.txs}
    orphaned = [tx for block in loser for tx in block.txs
                if tx.kind == KIND_ASSET_ISSUE and tx.tx_id not in winner_ids]
    return ForkDecision(chain=winner, adopted=adopted, orphaned_txs=orphaned)


class Node:
    """One participant: identity, chain state, pending pool, peer set."""

    def __init__(self, identity: NodeIdentity, state: ChainState, *,
                 block_log: BlockLog | None = None,
                 peer_timeout: float = 2.0, sync_timeout: float = 10.0):
        self.identity = identity
        self._lock = threading.RLock()
        self._state = state
        self.pool = PendingPool()
        self.block_log = block_log
        self.peer_timeout = peer_timeout
        self.sync_timeout = sync_timeout
        self.sessions: dict[str, PeerSession] = {}
        self._sessions_lock = threading.Lock()
        self.violations: list[tuple[str, str]] = []
        self._server_sock: socket.socket | None = None
        self._closing = threading.Event()

    # -- state access ------------------------------------------------------

    @property
    def state(self) -> ChainState:
        with self._lock:
            return self._state

    @property
    def name(self) -> str:
        return self.identity.name

    def active_sessions(self) -> list[PeerSession]:
        with self._sessions_lock:
            return [s for s in self.sessions.values()
                    if s.state == SESSION_ACTIVE]

    def _flag(self, session: PeerSession, reason: str) -> None:
        log.warning("%s: flagging peer %s: %s", self.name, session.peer_id,
                    reason)
        session.flagged = reason
        self.violations.append((session.peer_id, reason))

    # -- handshake ---------------------------------------------------------

    def connect(self, transport) -> PeerSession:
        """Dial-side handshake; on success the session reader starts."""
        challenge = messages.new_challenge()
        hello = Envelope(kind=messages.KIND_HELLO, sender=self.name,
                         body=messages.Hello(challenge).encode())
        hello.sign(self.identity.private_key)
        transport.send(hello.encode(), timeout=self.peer_timeout)

        envelope = self._read_handshake(transport)
        if envelope.kind != messages.KIND_HELLO_ACK:
            transport.close()
            raise HandshakeError(f"expected hello_ack, got {envelope.kind}")
        ack = messages.HelloAck.decode(envelope.body)
        session = self._admit(envelope, transport)
        if ack.echo != challenge:
            transport.close()
            raise HandshakeError("listener did not echo our challenge")

        reply = Envelope(kind=messages.KIND_HELLO_ACK, sender=self.name,
                         body=messages.HelloAck(echo=ack.challenge).encode())
        reply.sign(self.identity.private_key)
        transport.send(reply.encode(), timeout=self.peer_timeout)
        self._activate(session)
        return session

    def accept(self, transport) -> PeerSession:
        """Listen-side handshake; on success the session reader starts."""
        envelope = self._read_handshake(transport)
        if envelope.kind != messages.KIND_HELLO:
            transport.close()
            raise HandshakeError(f"expected hello, got {envelope.kind}")
        hello = messages.Hello.decode(envelope.body)
        session = self._admit(envelope, transport)

        counter = messages.new_challenge()
        ack = Envelope(kind=messages.KIND_HELLO_ACK, sender=self.name,
                       body=messages.HelloAck(echo=hello.challenge,
                                              challenge=counter).encode())
        ack.sign(self.identity.private_key)
        transport.send(ack.encode(), timeout=self.peer_timeout)

        final = self._read_handshake(transport)
        if final.kind != messages.KIND_HELLO_ACK \
                or final.sender != session.peer_id:
            transport.close()
            raise HandshakeError("handshake did not complete")
        self._verify_envelope_key(final, transport)
        if messages.HelloAck.decode(final.body).echo != counter:
            transport.close()
            raise HandshakeError("dialer did not echo our challenge")
        self._activate(session)
        return session

    def _read_handshake(self, transport) -> Envelope:
        try:
            raw = transport.recv(timeout=self.sync_timeout)
            return Envelope.decode(raw)
        except (TransportClosed, TransportTimeout, DecodeError) as exc:
            transport.close()
            raise HandshakeError(f"handshake failed: {exc}") from exc

    def _verify_envelope_key(self, envelope: Envelope, transport) -> None:
        pubkey = self.state.key_of(envelope.sender)
        if pubkey is None:
            transport.close()
            raise HandshakeError(f"unknown identity {envelope.sender!r}")
        if not envelope.verify(pubkey):
            transport.close()
            raise HandshakeError(f"bad signature from {envelope.sender!r}")

    def _admit(self, envelope: Envelope, transport) -> PeerSession:
        """Shared admission: registered key, valid signature, connect
        permission held on the current chain."""
        self._verify_envelope_key(envelope, transport)
        perms = self.state.permissions_of(envelope.sender)
        if PERM_CONNECT not in perms:
            transport.close()
            self.violations.append(
                (envelope.sender, "connect permission missing"))
            raise HandshakeError(
                f"{envelope.sender!r} lacks connect permission")
        return PeerSession(peer_id=envelope.sender,
                           remote_address=getattr(transport, "remote_address",
                                                  "?"),
                           permissions=perms, state=SESSION_HANDSHAKING,
                           transport=transport)

    def _activate(self, session: PeerSession) -> None:
        session.state = SESSION_ACTIVE
        with self._sessions_lock:
            old = self.sessions.get(session.peer_id)
            if old is not None and old.state == SESSION_ACTIVE:
                old.transport.close()
                old.state = SESSION_CLOSED
            self.sessions[session.peer_id] = session
        threading.Thread(target=self._reader_loop, args=(session,),
                         name=f"{self.name}-reader-{session.peer_id}",
                         daemon=True).start()

    # -- TCP listener ------------------------------------------------------

    def serve(self, host: str = "127.0.0.1", port: int = 0) -> tuple[str, int]:
        """Start the accept loop; returns the bound address."""
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind((host, port))
        sock.listen()
        self._server_sock = sock
        threading.Thread(target=self._accept_loop, name=f"{self.name}-accept",
                         daemon=True).start()
        return sock.getsockname()

    def _accept_loop(self) -> None:
        assert self._server_sock is not None
        while not self._closing.is_set():
            try:
                conn, _ = self._server_sock.accept()
            except OSError:
                return
            threading.Thread(target=self._accept_one, args=(conn,),
                             daemon=True).start()

    def _accept_one(self, conn: socket.socket) -> None:
        try:
            self.accept(TcpTransport(conn))
        except HandshakeError as exc:
            log.info("%s: rejected inbound connection: %s", self.name, exc)

    def dial(self, host: str, port: int) -> PeerSession:
        return self.connect(TcpTransport.connect(host, port,
                                                 timeout=self.peer_timeout))

    def close(self) -> None:
        self._closing.set()
        if self._server_sock is not None:
            try:
                self._server_sock.close()
            except OSError:
                pass
        with self._sessions_lock:
            sessions = list(self.sessions.values())
        for session in sessions:
            session.transport.close()
            session.state = SESSION_CLOSED

    # -- broadcast ---------------------------------------------------------

    def _signed_envelope(self, kind: str, body: bytes) -> bytes:
        envelope = Envelope(kind=kind, sender=self.name, body=body)
        envelope.sign(self.identity.private_key)
        return envelope.encode()

    def _broadcast(self, kind: str, body: bytes) -> DeliveryReport:
        frame = self._signed_envelope(kind, body)
        report = DeliveryReport()
        for session in self.active_sessions():
            try:
                session.transport.send(frame, timeout=self.peer_timeout)
                report.delivered[session.peer_id] = True
            except (TransportClosed, TransportTimeout) as exc:
                report.delivered[session.peer_id] = False
                report.errors[session.peer_id] = str(exc)
                if isinstance(exc, TransportClosed):
                    session.state = SESSION_CLOSED
        return report

    def propagate_tx(self, tx: LedgerTransaction) -> DeliveryReport:
        return self._broadcast(messages.KIND_TX_BROADCAST,
                               messages.encode_tx_body(tx))

    def propagate_block(self, block: Block) -> DeliveryReport:
        return self._broadcast(messages.KIND_BLOCK_BROADCAST,
                               messages.encode_block_body(block))

    # -- local operations --------------------------------------------------

    def submit_tx(self, tx: LedgerTransaction, *,
                  propagate: bool = True) -> DeliveryReport:
        """Admit a locally created transaction and broadcast it."""
        with self._lock:
            self.pool.add(tx, self._state)
        return self.propagate_tx(tx) if propagate else DeliveryReport()

    def mine_pending(self, *, timestamp: int | None = None,
                     propagate: bool = True) -> Block | None:
        """Mine every pending transaction into one block and append it."""
        with self._lock:
            pending = self.pool.snapshot()
            block = mine_block(pending, self._state.tip.header,
                               self._state.difficulty, miner=self.name,
                               timestamp=timestamp)
            self._apply_block(block)
        if propagate:
            self.propagate_block(block)
        return block

    def _apply_block(self, block: Block) -> None:
        # Caller holds the lock.
        self._state = self._state.append(block)
        if self.block_log is not None:
            self.block_log.append(block)
        self.pool.drop_confirmed(self._state)

    def receive_block(self, block: Block, session: PeerSession | None = None) -> bool:
        """Attach a block arriving from the network; returns True if the tip
        advanced. A block that does not attach triggers a pull from the
        sending peer."""
        with self._lock:
            if self._state.find_block_by_hash(block.hash_hex) is not None:
                return False  # already have it
            try:
                self._apply_block(block)
                return True
            except StaleParentError:
                pass  # gap or fork: resolved by pulling from the peer
            except LedgerError as exc:
                if session is not None:
                    self._flag(session, f"invalid block: {exc}")
                return False
        if session is not None:
            self._start_sync(session)
        return False

    def receive_tx(self, tx: LedgerTransaction,
                   session: PeerSession | None = None) -> bool:
        try:
            with self._lock:
                return self.pool.add(tx, self._state)
        except LedgerError as exc:
            if session is not None:
                self._flag(session, f"rejected tx: {exc}")
            return False

    # -- sync and fork resolution ------------------------------------------

    def _request_blocks(self, session: PeerSession,
                        from_height: int) -> messages.BlocksReply:
        with session._request_lock:
            while True:  # drop stale replies from a timed-out earlier request
                try:
                    session._replies.get_nowait()
                except queue.Empty:
                    break
            frame = self._signed_envelope(
                messages.KIND_GET_BLOCKS,
                messages.GetBlocks(from_height).encode())
            session.transport.send(frame, timeout=self.peer_timeout)
            body = session._replies.get(timeout=self.sync_timeout)
            return messages.BlocksReply.decode(body)

    def sync_with_peer(self, session: PeerSession) -> int:
        """Pull blocks above the local tip; returns how many were applied.
        Diverged histories fall back to whole-chain comparison."""
        applied = 0
        while True:
            start = self.state.height + 1
            try:
                reply = self._request_blocks(session, start)
            except (TransportClosed, TransportTimeout, queue.Empty) as exc:
                log.info("%s: sync with %s aborted: %s", self.name,
                         session.peer_id, exc)
                return applied
            if not reply.blocks:
                return applied
            for block in reply.blocks:
                # the chain lock must be released before any further network
                # wait: the reader thread that delivers replies also takes it
                try:
                    with self._lock:
                        self._apply_block(block)
                    applied += 1
                except StaleParentError:
                    return applied + self._sync_fork(session)
                except (LedgerError, DecodeError) as exc:
                    self._flag(session, f"invalid block during sync: {exc}")
                    return applied
            if reply.tip_height <= self.state.height:
                return applied

    def _sync_fork(self, session: PeerSession) -> int:
        """Fetch the peer's whole chain and apply the fork rule."""
        blocks: list[Block] = []
        while True:
            try:
                reply = self._request_blocks(session, len(blocks))
            except (TransportClosed, TransportTimeout, queue.Empty):
                return 0
            blocks.extend(reply.blocks)
            if not reply.blocks or len(blocks) > reply.tip_height:
                break
        if not blocks:
            return 0
        try:
            return self._consider_chain(blocks)
        except (IncompatibleNetworkError, InvalidBlockError) as exc:
            self._flag(session, f"fork resolution failed: {exc}")
            return 0

    def _consider_chain(self, remote: list[Block]) -> int:
        """Apply the fork rule against a full remote chain; returns the tip
        height delta when the remote branch is adopted."""
        with self._lock:
            local = list(self._state.blocks)
            decision = resolve_fork(local, remote, self._state.difficulty)
            if not decision.adopted:
                return 0
            before = self._state.height
            self._state = ChainState.from_blocks(decision.chain,
                                                 self._state.difficulty)
            if self.block_log is not None:
                self.block_log.rewrite(decision.chain)
            self.pool.drop_confirmed(self._state)
            self.pool.readmit(decision.orphaned_txs, self._state)
            return self._state.height - before

    def _start_sync(self, session: PeerSession) -> None:
        """Run sync on its own thread — the session reader must stay free to
        deliver the blocks_reply messages the sync consumes."""
        if not session._sync_running.acquire(blocking=False):
            return
        def _run():
            try:
                self.sync_with_peer(session)
            finally:
                session._sync_running.release()
        threading.Thread(target=_run, name=f"{self.name}-sync",
                         daemon=True).start()

    # -- reader / dispatch -------------------------------------------------

    def _reader_loop(self, session: PeerSession) -> None:
        while session.state == SESSION_ACTIVE and not self._closing.is_set():
            try:
                raw = session.transport.recv(timeout=None)
            except TransportClosed:
                break
            except TransportTimeout:
                continue
            try:
                envelope = Envelope.decode(raw)
                self._dispatch(session, envelope)
            except DecodeError as exc:
                self._flag(session, f"undecodable message: {exc}")
                break
        if session.state == SESSION_ACTIVE:
            session.state = SESSION_CLOSED

    def _dispatch(self, session: PeerSession, envelope: Envelope) -> None:
        if envelope.sender != session.peer_id:
            self._flag(session, f"message claims sender {envelope.sender!r}")
            return
        pubkey = self.state.key_of(envelope.sender)
        if pubkey is None or not envelope.verify(pubkey):
            self._flag(session, "message signature invalid")
            return

        kind = envelope.kind
        if kind == messages.KIND_TX_BROADCAST:
            try:
                tx = messages.decode_tx_body(envelope.body)
            except DecodeError as exc:
                self._flag(session, f"bad tx payload: {exc}")
                return
            self.receive_tx(tx, session)
        elif kind == messages.KIND_BLOCK_BROADCAST:
            try:
                block = messages.decode_block_body(envelope.body)
            except DecodeError as exc:
                self._flag(session, f"bad block payload: {exc}")
                return
            self.receive_block(block, session)
        elif kind == messages.KIND_GET_BLOCKS:
            request = messages.GetBlocks.decode(envelope.body)
            state = self.state
            chunk = list(state.blocks[request.from_height:
                                      request.from_height + SYNC_BATCH])
            reply = messages.BlocksReply(blocks=chunk, tip_height=state.height)
            frame = self._signed_envelope(messages.KIND_BLOCKS_REPLY,
                                          reply.encode())
            try:
                session.transport.send(frame, timeout=self.peer_timeout)
            except (TransportClosed, TransportTimeout):
                session.state = SESSION_CLOSED
        elif kind == messages.KIND_BLOCKS_REPLY:
            session._replies.put(envelope.body)
        else:  # hello/hello_ack after activation
            self._flag(session, f"unexpected {kind} on active session")
