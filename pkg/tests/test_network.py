"""Peer networking: envelopes, transports, handshake admission, replication,
sync and fork resolution. Loopback transports keep everything in-process and
deterministic; one test exercises the real TCP path end to end."""

from __future__ import annotations

import socket
import threading
import time

import pytest

from conftest import make_asset
from notarychain.codec import DecodeError
from notarychain.identity import NodeIdentity
from notarychain.ledger import ChainState, create_genesis, mine_block
from notarychain.ledger.txbuild import (
    issue_asset_tx,
    node_event_tx,
    set_permission_tx,
)
from notarychain.ledger.types import (
    NODE_ADD,
    NODE_REMOVE,
    PERM_CONNECT,
    PERM_MINE,
    PERM_SEND,
    NodeEvent,
    PermissionGrant,
)
from notarychain.network import (
    SESSION_ACTIVE,
    BlocksReply,
    Envelope,
    GetBlocks,
    HandshakeError,
    Hello,
    HelloAck,
    IncompatibleNetworkError,
    LoopbackTransport,
    Node,
    TcpTransport,
    TransportClosed,
    TransportTimeout,
    new_challenge,
    resolve_fork,
)
from notarychain.network import messages
from notarychain.ledger.errors import InvalidBlockError

DIFF = 1  # cheap proofs keep multi-block scenarios fast

DEFAULT_PERMS = frozenset({PERM_CONNECT, PERM_SEND, PERM_MINE})


def build_net(names, perms_map=None):
    """Fresh network: a master identity plus one pre-registered node per
    name, every node starting from the same genesis."""
    master = NodeIdentity.generate("master")
    idents = {name: NodeIdentity.generate(name) for name in names}
    extra = []
    for name in names:
        perms = DEFAULT_PERMS if perms_map is None \
            else perms_map.get(name, DEFAULT_PERMS)
        extra.append(node_event_tx(
            NodeEvent(action=NODE_ADD, node=name,
                      pubkey=idents[name].public_key), master))
        if perms:
            extra.append(set_permission_tx(
                PermissionGrant(subject=name, permissions=perms,
                                granted=True, issuer=master.name), master))
    genesis = create_genesis(master, DIFF, extra_txs=extra)
    nodes = {name: Node(idents[name], ChainState.genesis(genesis, DIFF))
             for name in names}
    return master, idents, nodes


def link(a: Node, b: Node, timeout: float = 5.0) -> dict:
    """Run the a→b handshake over a loopback pair; returns whatever each
    side produced (session or HandshakeError)."""
    ta, tb = LoopbackTransport.create_pair(a.name, b.name)
    out: dict = {}

    def listen():
        try:
            out["b"] = b.accept(tb)
        except HandshakeError as exc:
            out["b_err"] = exc

    th = threading.Thread(target=listen, daemon=True)
    th.start()
    try:
        out["a"] = a.connect(ta)
    except HandshakeError as exc:
        out["a_err"] = exc
    th.join(timeout)
    assert not th.is_alive(), "listener side of handshake hung"
    return out


def mesh(nodes: dict) -> dict:
    """Fully connect every node pair."""
    sessions = {}
    names = sorted(nodes)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            out = link(nodes[a], nodes[b])
            assert "a" in out and "b" in out, f"link {a}->{b} failed: {out}"
            sessions[(a, b)] = out["a"]
            sessions[(b, a)] = out["b"]
    return sessions


def wait_until(pred, timeout: float = 5.0, interval: float = 0.01) -> bool:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        if pred():
            return True
        time.sleep(interval)
    return pred()


def chain_bytes(node: Node) -> bytes:
    return b"".join(messages.encode_block_body(b) for b in node.state.blocks)


# -- envelope and message bodies --------------------------------------------


def test_envelope_round_trip_and_signature():
    ident = NodeIdentity.generate("n1")
    env = Envelope(kind="tx_broadcast", sender="n1", body=b"payload")
    env.sign(ident.private_key)
    decoded = Envelope.decode(env.encode())
    assert decoded == env
    assert decoded.verify(ident.public_key)


@pytest.mark.parametrize("twiddle", [
    lambda e: setattr(e, "body", e.body + b"x"),
    lambda e: setattr(e, "kind", "block_broadcast"),
    lambda e: setattr(e, "sender", "n2"),
    lambda e: setattr(e, "signature", e.signature[:-1]
                      + bytes([e.signature[-1] ^ 1])),
])
def test_envelope_tamper_breaks_signature(twiddle):
    ident = NodeIdentity.generate("n1")
    env = Envelope(kind="tx_broadcast", sender="n1", body=b"payload")
    env.sign(ident.private_key)
    twiddle(env)
    assert not env.verify(ident.public_key)


def test_envelope_rejects_unknown_kind():
    env = Envelope(kind="tx_broadcast", sender="n1", body=b"")
    raw = env.encode().replace(b"tx_broadcast", b"tx_whatever!")
    with pytest.raises(DecodeError):
        Envelope.decode(raw)


def test_hello_bodies_round_trip():
    challenge = new_challenge()
    assert len(challenge) == 32
    assert Hello.decode(Hello(challenge).encode()).challenge == challenge
    ack = HelloAck(echo=challenge, challenge=new_challenge())
    back = HelloAck.decode(ack.encode())
    assert (back.echo, back.challenge) == (ack.echo, ack.challenge)
    with pytest.raises(DecodeError):
        Hello.decode(Hello(b"short").encode())


def test_block_request_bodies_round_trip(chain):
    req = GetBlocks.decode(GetBlocks(7).encode())
    assert req.from_height == 7
    reply = BlocksReply(blocks=list(chain.blocks), tip_height=chain.height)
    back = BlocksReply.decode(reply.encode())
    assert back.tip_height == chain.height
    assert [b.hash_hex for b in back.blocks] == \
        [b.hash_hex for b in chain.blocks]


# -- transports --------------------------------------------------------------


def test_loopback_pair_carries_frames_both_ways():
    a, b = LoopbackTransport.create_pair()
    a.send(b"ping")
    b.send(b"pong")
    assert b.recv(timeout=1) == b"ping"
    assert a.recv(timeout=1) == b"pong"


def test_loopback_close_semantics():
    a, b = LoopbackTransport.create_pair()
    a.close()
    with pytest.raises(TransportClosed):
        b.recv(timeout=1)  # woken by the EOF sentinel
    with pytest.raises(TransportClosed):
        b.send(b"into the void")
    with pytest.raises(TransportClosed):
        a.recv(timeout=1)


def test_loopback_recv_timeout():
    a, _b = LoopbackTransport.create_pair()
    with pytest.raises(TransportTimeout):
        a.recv(timeout=0.05)


def test_tcp_framing_round_trip():
    left, right = socket.socketpair()
    ta, tb = TcpTransport(left), TcpTransport(right)
    big = bytes(range(256)) * 1024  # larger than the kernel socket buffer
    sender = threading.Thread(target=lambda: (ta.send(big), ta.send(b"")),
                              daemon=True)
    sender.start()
    assert tb.recv(timeout=2) == big
    assert tb.recv(timeout=2) == b""
    sender.join(timeout=2)
    assert not sender.is_alive()
    ta.close()
    with pytest.raises(TransportClosed):
        tb.recv(timeout=2)


def test_tcp_rejects_oversized_frame_header():
    left, right = socket.socketpair()
    left.sendall((200 * 1024 * 1024).to_bytes(4, "big"))
    with pytest.raises(TransportClosed):
        TcpTransport(right).recv(timeout=2)


# -- handshake admission -----------------------------------------------------


def test_handshake_activates_both_sides():
    _, _, nodes = build_net(["a", "b"])
    out = link(nodes["a"], nodes["b"])
    sa, sb = out["a"], out["b"]
    assert sa.state == SESSION_ACTIVE and sb.state == SESSION_ACTIVE
    assert sa.peer_id == "b" and sb.peer_id == "a"
    assert PERM_CONNECT in sa.permissions
    assert nodes["a"].sessions["b"] is sa
    assert nodes["b"].sessions["a"] is sb


def test_handshake_rejects_unregistered_identity():
    _, _, nodes = build_net(["a", "b"])
    stranger = Node(NodeIdentity.generate("mallory"), nodes["a"].state)
    out = link(stranger, nodes["b"])
    assert isinstance(out.get("b_err"), HandshakeError)
    assert "a" not in out  # dialer sees the closed transport and fails too
    assert nodes["b"].sessions == {}


def test_handshake_rejects_missing_connect_permission():
    _, _, nodes = build_net(
        ["a", "b"], perms_map={"a": frozenset({PERM_SEND})})
    out = link(nodes["a"], nodes["b"])
    assert isinstance(out.get("b_err"), HandshakeError)
    assert "connect" in str(out["b_err"])
    assert ("a", "connect permission missing") in nodes["b"].violations


def test_handshake_rejects_revoked_peer():
    """A node whose connect permission was revoked on-chain cannot rejoin."""
    master, _, nodes = build_net(["a", "b"])
    out = link(nodes["a"], nodes["b"])
    assert out["a"].state == SESSION_ACTIVE
    out["a"].transport.close()

    revoke = set_permission_tx(
        PermissionGrant(subject="a", permissions=frozenset({PERM_CONNECT}),
                        granted=False, issuer=master.name), master)
    for node in nodes.values():
        block = mine_block([revoke], node.state.tip.header, DIFF,
                           miner=master.name)
        node.receive_block(block)

    out2 = link(nodes["a"], nodes["b"])
    assert isinstance(out2.get("b_err"), HandshakeError)


def test_handshake_refuses_wrong_message_kind():
    _, _, nodes = build_net(["a", "b"])
    ta, tb = LoopbackTransport.create_pair()
    ident = nodes["a"].identity
    env = Envelope(kind="get_blocks", sender="a",
                   body=GetBlocks(0).encode()).sign(ident.private_key)
    ta.send(env.encode())
    with pytest.raises(HandshakeError):
        nodes["b"].accept(tb)


# -- replication -------------------------------------------------------------


def test_tx_broadcast_reaches_all_peers():
    _, idents, nodes = build_net(["a", "b", "c"])
    mesh(nodes)
    tx = issue_asset_tx(make_asset(1), idents["a"])
    report = nodes["a"].submit_tx(tx)
    assert report.delivered == {"b": True, "c": True}
    assert report.all_ok()
    assert wait_until(lambda: tx.tx_id in nodes["b"].pool
                      and tx.tx_id in nodes["c"].pool)


def test_mined_block_reaches_all_peers():
    _, idents, nodes = build_net(["a", "b", "c"])
    mesh(nodes)
    nodes["a"].submit_tx(issue_asset_tx(make_asset(2), idents["a"]))
    block = nodes["a"].mine_pending()
    assert block is not None
    assert wait_until(
        lambda: all(n.state.tip.hash_hex == block.hash_hex
                    for n in nodes.values()))
    assert all(len(n.pool) == 0 for n in nodes.values())


def test_delivery_report_records_per_peer_failure():
    """One dead peer must not stop delivery to the others."""
    _, idents, nodes = build_net(["a", "b", "c"])
    mesh(nodes)

    class DeadTransport:
        remote_address = "gone"

        def send(self, payload, timeout=None):
            raise TransportTimeout("peer wedged")

        def close(self):
            pass

    nodes["a"].sessions["b"].transport = DeadTransport()
    report = nodes["a"].propagate_tx(issue_asset_tx(make_asset(3),
                                                    idents["a"]))
    assert report.delivered == {"b": False, "c": True}
    assert "wedged" in report.errors["b"]
    assert not report.all_ok() and report.ok_count == 1
    # a timeout is transient: the session is not torn down
    assert nodes["a"].sessions["b"].state == SESSION_ACTIVE


def test_message_from_deregistered_peer_is_flagged():
    """Removing a node's key invalidates its live session messages."""
    master, idents, nodes = build_net(["a", "b"])
    mesh(nodes)
    removal = node_event_tx(NodeEvent(action=NODE_REMOVE, node="a"), master)
    block = mine_block([removal], nodes["b"].state.tip.header, DIFF,
                       miner=master.name)
    nodes["b"].receive_block(block)

    tx = issue_asset_tx(make_asset(4), idents["a"])
    nodes["a"].propagate_tx(tx)
    assert wait_until(
        lambda: any(peer == "a" and "signature" in why
                    for peer, why in nodes["b"].violations))
    assert tx.tx_id not in nodes["b"].pool


def test_invalid_tx_from_peer_is_flagged_not_fatal():
    """A peer pushing an unsendable tx gets flagged; the session survives."""
    _, idents, nodes = build_net(
        ["a", "b"], perms_map={"a": frozenset({PERM_CONNECT})})
    out = link(nodes["a"], nodes["b"])
    tx = issue_asset_tx(make_asset(5), idents["a"])  # a lacks send
    nodes["a"].propagate_tx(tx)
    assert wait_until(lambda: any(p == "a" for p, _ in nodes["b"].violations))
    assert tx.tx_id not in nodes["b"].pool
    assert out["b"].state == SESSION_ACTIVE


def test_invalid_block_flags_peer_and_leaves_state_alone():
    _, idents, nodes = build_net(["a", "b"])
    out = link(nodes["a"], nodes["b"])
    tip_before = nodes["b"].state.tip.hash_hex

    tx = issue_asset_tx(make_asset(6), idents["a"])
    block = mine_block([tx], nodes["a"].state.tip.header, DIFF, miner="a")
    block.txs[0].payload.sha256 = "e" * 64  # corrupt after sealing
    block._hash = None
    changed = nodes["b"].receive_block(block, out["b"])
    assert changed is False
    assert nodes["b"].state.tip.hash_hex == tip_before
    assert any("invalid block" in why for _, why in nodes["b"].violations)


# -- sync --------------------------------------------------------------------


def test_sync_pulls_missing_blocks():
    _, idents, nodes = build_net(["a", "b"])
    for i in range(4):
        nodes["a"].submit_tx(issue_asset_tx(make_asset(10 + i), idents["a"]),
                             propagate=False)
        nodes["a"].mine_pending(propagate=False)
    out = link(nodes["a"], nodes["b"])
    applied = nodes["b"].sync_with_peer(out["b"])
    assert applied == 4
    assert nodes["b"].state.tip.hash_hex == nodes["a"].state.tip.hash_hex


def test_sync_pages_through_batches(monkeypatch):
    from notarychain.network import node as node_mod
    monkeypatch.setattr(node_mod, "SYNC_BATCH", 2)
    _, idents, nodes = build_net(["a", "b"])
    for i in range(5):
        nodes["a"].submit_tx(issue_asset_tx(make_asset(20 + i), idents["a"]),
                             propagate=False)
        nodes["a"].mine_pending(propagate=False)
    out = link(nodes["a"], nodes["b"])
    assert nodes["b"].sync_with_peer(out["b"]) == 5
    assert nodes["b"].state.height == nodes["a"].state.height


def test_block_broadcast_triggers_catch_up_sync():
    """A receiver that cannot attach a broadcast block pulls the gap."""
    _, idents, nodes = build_net(["a", "b"])
    mesh(nodes)
    for i in range(3):
        nodes["a"].submit_tx(issue_asset_tx(make_asset(30 + i), idents["a"]),
                             propagate=False)
        nodes["a"].mine_pending(propagate=False)  # b never hears of these
    nodes["a"].submit_tx(issue_asset_tx(make_asset(33), idents["a"]),
                         propagate=False)
    nodes["a"].mine_pending()  # broadcast: four blocks ahead of b
    assert wait_until(
        lambda: nodes["b"].state.tip.hash_hex == nodes["a"].state.tip.hash_hex)
    assert chain_bytes(nodes["a"]) == chain_bytes(nodes["b"])


# -- fork resolution ---------------------------------------------------------


def _extend(state: ChainState, ident: NodeIdentity, indexes) -> ChainState:
    for i in indexes:
        tx = issue_asset_tx(make_asset(i), ident)
        state = state.append(mine_block([tx], state.tip.header, DIFF,
                                        miner=ident.name))
    return state


def test_resolve_fork_longer_chain_wins():
    _, idents, nodes = build_net(["a", "b"])
    base = nodes["a"].state
    local = _extend(base, idents["a"], [41])
    remote = _extend(base, idents["b"], [42, 43])
    decision = resolve_fork(list(local.blocks), list(remote.blocks), DIFF)
    assert decision.adopted
    assert decision.chain[-1].hash_hex == remote.tip.hash_hex
    orphan_md5s = {tx.payload.md5_index for tx in decision.orphaned_txs}
    assert orphan_md5s == {make_asset(41).md5_index}


def test_resolve_fork_tie_keeps_local():
    _, idents, nodes = build_net(["a", "b"])
    base = nodes["a"].state
    local = _extend(base, idents["a"], [44])
    remote = _extend(base, idents["b"], [45])
    decision = resolve_fork(list(local.blocks), list(remote.blocks), DIFF)
    assert not decision.adopted
    assert decision.chain[-1].hash_hex == local.tip.hash_hex
    assert {tx.payload.md5_index for tx in decision.orphaned_txs} == \
        {make_asset(45).md5_index}


def test_resolve_fork_shared_txs_are_not_orphaned():
    _, idents, nodes = build_net(["a", "b"])
    base = nodes["a"].state
    shared = issue_asset_tx(make_asset(46), idents["a"])
    local = base.append(mine_block([shared], base.tip.header, DIFF, miner="a"))
    remote = base.append(mine_block([shared], base.tip.header, DIFF,
                                    miner="b", start_nonce=7_000_000))
    remote = _extend(remote, idents["b"], [47])
    decision = resolve_fork(list(local.blocks), list(remote.blocks), DIFF)
    assert decision.adopted
    assert decision.orphaned_txs == []  # the winner carries the same asset


def test_resolve_fork_rejects_foreign_genesis():
    _, idents, nodes = build_net(["a", "b"])
    _, _, other = build_net(["x"])
    with pytest.raises(IncompatibleNetworkError):
        resolve_fork(list(nodes["a"].state.blocks),
                     list(other["x"].state.blocks), DIFF)


def test_resolve_fork_rejects_invalid_remote():
    _, idents, nodes = build_net(["a", "b"])
    base = nodes["a"].state
    remote = _extend(base, idents["b"], [48, 49])
    blocks = list(remote.blocks)
    blocks[-1].txs[0].payload.sha256 = "d" * 64
    blocks[-1]._hash = None
    with pytest.raises(InvalidBlockError):
        resolve_fork(list(base.blocks), blocks, DIFF)


def test_network_fork_converges_and_requeues_orphans():
    """Two nodes mine disjoint branches offline; on contact the shorter side
    adopts the longer branch and requeues its own displaced asset."""
    _, idents, nodes = build_net(["a", "b"])
    for i in (51, 52):
        nodes["a"].submit_tx(issue_asset_tx(make_asset(i), idents["a"]),
                             propagate=False)
        nodes["a"].mine_pending(propagate=False)
    nodes["b"].submit_tx(issue_asset_tx(make_asset(53), idents["b"]),
                         propagate=False)
    nodes["b"].mine_pending(propagate=False)

    mesh(nodes)
    nodes["a"].propagate_block(nodes["a"].state.tip)
    assert wait_until(
        lambda: nodes["b"].state.tip.hash_hex == nodes["a"].state.tip.hash_hex)
    assert wait_until(lambda: nodes["b"].pool.has_md5(make_asset(53).md5_index))

    # the requeued asset gets mined and the network converges byte for byte
    nodes["b"].mine_pending()
    assert wait_until(lambda: chain_bytes(nodes["a"]) == chain_bytes(nodes["b"]))
    assert nodes["a"].state.get_asset(make_asset(53).md5_index) is not None


def test_tie_break_keeps_first_seen_branch():
    """Equal-length branches: each side keeps its own chain (first seen)."""
    _, idents, nodes = build_net(["a", "b"])
    nodes["a"].submit_tx(issue_asset_tx(make_asset(54), idents["a"]),
                         propagate=False)
    a_tip = nodes["a"].mine_pending(propagate=False)
    nodes["b"].submit_tx(issue_asset_tx(make_asset(55), idents["b"]),
                         propagate=False)
    b_tip = nodes["b"].mine_pending(propagate=False)

    out = link(nodes["a"], nodes["b"])
    nodes["a"].propagate_block(nodes["a"].state.tip)
    nodes["b"].propagate_block(nodes["b"].state.tip)
    time.sleep(0.3)  # let both syncs settle
    assert nodes["a"].state.tip.hash_hex == a_tip.hash_hex
    assert nodes["b"].state.tip.hash_hex == b_tip.hash_hex
    assert out["a"].state == SESSION_ACTIVE


# -- TCP integration ---------------------------------------------------------


def test_tcp_end_to_end_replication():
    _, idents, nodes = build_net(["a", "b"])
    try:
        host, port = nodes["a"].serve("127.0.0.1", 0)
        session = nodes["b"].dial(host, port)
        assert session.state == SESSION_ACTIVE
        assert wait_until(lambda: "b" in nodes["a"].sessions)

        tx = issue_asset_tx(make_asset(60), idents["b"])
        nodes["b"].submit_tx(tx)
        assert wait_until(lambda: tx.tx_id in nodes["a"].pool)

        block = nodes["a"].mine_pending()
        assert wait_until(
            lambda: nodes["b"].state.tip.hash_hex == block.hash_hex)
        assert chain_bytes(nodes["a"]) == chain_bytes(nodes["b"])
    finally:
        for n in nodes.values():
            n.close()
