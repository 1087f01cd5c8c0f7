"""Ledger state machine: genesis rules, append validation, permissions,
asset uniqueness and lineage, depth-gated queries."""

from __future__ import annotations

import pytest

from notarychain.identity import NodeIdentity
from notarychain.ledger import (
    ChainState,
    create_genesis,
    issue_asset_tx,
    latest_confirmed_blockhash,
    mine_block,
    node_event_tx,
    query_asset,
    set_permission_tx,
)
from notarychain.ledger.errors import (
    AssetFormatError,
    DuplicateAssetError,
    InsufficientDepthError,
    InvalidBlockError,
    InvalidProofError,
    InvalidTransactionError,
    PermissionDeniedError,
    StaleParentError,
)
from notarychain.ledger.types import (
    AssetRecord,
    Block,
    LedgerTransaction,
    NODE_ADD,
    NODE_REMOVE,
    NodeEvent,
    PERM_CONNECT,
    PERM_SEND,
    PermissionGrant,
)

from conftest import DIFFICULTY, make_asset


def _mine_on(state: ChainState, txs, *, miner="master", ts_offset=60) -> Block:
    return mine_block(txs, state.tip.header, DIFFICULTY, miner=miner,
                      timestamp=state.tip.header.timestamp + ts_offset)


# -- transaction round trips ------------------------------------------------

def test_transaction_round_trip(master):
    tx = issue_asset_tx(make_asset(7), master, now_ms=1_700_000_000_000)
    raw = tx.canonical_bytes()
    back = LedgerTransaction.from_bytes(raw)
    assert back == tx
    assert back.tx_id == tx.tx_id
    assert back.canonical_bytes() == raw


def test_block_round_trip(chain):
    block = chain.tip
    back = Block.from_bytes(block.canonical_bytes())
    assert back.hash_hex == block.hash_hex
    assert back.canonical_bytes() == block.canonical_bytes()


def test_asset_record_validation():
    good = make_asset(1)
    good.validate()
    cases = [
        dict(md5_index="short"),
        dict(md5_index="G" * 32),
        dict(sha256="ff"),
        dict(processed_ts=-5),
        dict(parent_md5="xyz"),
        dict(source_uri=""),
    ]
    for overrides in cases:
        fields = dict(md5_index=good.md5_index, sha256=good.sha256,
                      source_uri=good.source_uri, processed_ts=good.processed_ts,
                      parent_md5=None)
        fields.update(overrides)
        with pytest.raises(AssetFormatError):
            AssetRecord(**fields).validate()


# -- genesis rules ----------------------------------------------------------

def test_genesis_grants_master_everything(master):
    block = create_genesis(master, DIFFICULTY, timestamp=1_700_000_000)
    state = ChainState.genesis(block, DIFFICULTY)
    assert state.height == 0
    assert state.permissions_of("master") == frozenset(
        {"connect", "send", "receive", "mine", "admin"})
    assert state.key_of("master") == master.public_key


def test_genesis_rejects_wrong_height(master):
    block = create_genesis(master, DIFFICULTY, timestamp=1_700_000_000)
    impostor = mine_block([], block.header, DIFFICULTY, miner="master",
                          timestamp=1_700_000_060)
    with pytest.raises(InvalidBlockError):
        ChainState.genesis(impostor, DIFFICULTY)


def test_genesis_requires_master_registration(master):
    # A genesis whose first transaction is not the miner's key registration
    # must be rejected even if mined correctly.
    from notarychain.ledger.mining import _mine_header
    from notarychain.ledger.types import BlockHeader, GENESIS_PREV_HASH, merkle_root
    grant = LedgerTransaction(
        kind="permission_set", sender=master.name, created_ms=0,
        payload=PermissionGrant(subject=master.name,
                                permissions=frozenset({PERM_SEND}),
                                granted=True, issuer=master.name),
    ).sign(master.private_key)
    header = BlockHeader(height=0, prev_hash=GENESIS_PREV_HASH,
                         tx_root=merkle_root([grant.tx_id_bytes()]).hex(),
                         timestamp=1_700_000_000, nonce=0, miner=master.name)
    block = _mine_header(header, [grant], DIFFICULTY, 0)
    with pytest.raises(InvalidBlockError):
        ChainState.genesis(block, DIFFICULTY)


# -- append validation ------------------------------------------------------

def test_append_rejects_stale_parent(chain, master):
    fork_parent = chain.blocks[1].header
    orphan = mine_block([], fork_parent, DIFFICULTY, miner="master",
                        timestamp=fork_parent.timestamp + 1)
    with pytest.raises(StaleParentError):
        chain.append(orphan)


def test_mine_block_clamps_clock_skew(chain):
    # A miner whose clock runs behind must still produce monotone timestamps.
    block = _mine_on(chain, [], ts_offset=-120)
    assert block.header.timestamp == chain.tip.header.timestamp


def test_append_rejects_timestamp_regression(chain):
    block = _mine_on(chain, [])
    block.header.timestamp = chain.tip.header.timestamp - 1
    with pytest.raises(InvalidBlockError):
        chain.append(block)


def test_append_rejects_bad_proof(chain):
    from notarychain.ledger.mining import meets_difficulty
    from notarychain.ledger.types import compute_block_hash
    block = _mine_on(chain, [])
    while True:  # find a nearby nonce that genuinely fails the target
        block.header.nonce += 1
        block._hash = None
        if not meets_difficulty(compute_block_hash(block.header), DIFFICULTY):
            break
    with pytest.raises(InvalidProofError):
        chain.append(block)


def test_append_rejects_unlisted_miner(chain, alice):
    block = mine_block([], chain.tip.header, DIFFICULTY, miner="alice",
                       timestamp=chain.tip.header.timestamp + 1)
    with pytest.raises(PermissionDeniedError):
        chain.append(block)


def test_append_rejects_duplicate_md5_across_blocks(chain, master):
    # Asset 1 was confirmed at height 1; reissuing it later must fail.
    dup = issue_asset_tx(make_asset(1), master)  # no state => builder allows
    block = _mine_on(chain, [dup])
    with pytest.raises(DuplicateAssetError):
        chain.append(block)


def test_append_rejects_unknown_parent_lineage(chain, master):
    orphan_child = make_asset(99, parent="f" * 32)
    tx = issue_asset_tx(orphan_child, master)
    block = _mine_on(chain, [tx])
    with pytest.raises(InvalidTransactionError):
        chain.append(block)


def test_parent_in_same_block_is_valid(chain, master):
    parent = make_asset(50)
    child = make_asset(51, parent=parent.md5_index)
    txs = [issue_asset_tx(parent, master), issue_asset_tx(child, master)]
    state = chain.append(_mine_on(chain, txs))
    assert state.get_asset(child.md5_index).record.parent_md5 == parent.md5_index


def test_append_rejects_tampered_signature(chain, master):
    tx = issue_asset_tx(make_asset(60), master)
    bad_sig = bytearray(tx.signature)
    bad_sig[10] ^= 0x01
    forged = LedgerTransaction(kind=tx.kind, sender=tx.sender,
                               created_ms=tx.created_ms, payload=tx.payload,
                               signature=bytes(bad_sig))
    block = _mine_on(chain, [forged])
    with pytest.raises(InvalidTransactionError):
        chain.append(block)


def test_append_rejects_unknown_sender(chain, alice):
    tx = issue_asset_tx(make_asset(61), alice)  # alice never registered
    block = _mine_on(chain, [tx])
    with pytest.raises(InvalidTransactionError):
        chain.append(block)


# -- permission lifecycle ---------------------------------------------------

def _register_alice(state: ChainState, master, alice, perms) -> ChainState:
    txs = [
        node_event_tx(NodeEvent(NODE_ADD, "alice", alice.public_key), master,
                      state=state),
        set_permission_tx(PermissionGrant("alice", frozenset(perms), True,
                                          "master"), master, state=state),
    ]
    return state.append(_mine_on(state, txs))


def test_grant_takes_effect_next_block(chain, master, alice):
    state = _register_alice(chain, master, alice, {PERM_SEND})
    assert state.permissions_of("alice") == frozenset({PERM_SEND})
    tx = issue_asset_tx(make_asset(70), alice, state=state)
    state = state.append(_mine_on(state, [tx]))
    assert state.get_asset(make_asset(70).md5_index) is not None


def test_same_block_grant_does_not_authorize(chain, master, alice):
    # Registration + grant + use within one block: the use must fail because
    # transactions are checked against the parent state's tables.
    txs = [
        node_event_tx(NodeEvent(NODE_ADD, "alice", alice.public_key), master,
                      state=chain),
        set_permission_tx(PermissionGrant("alice", frozenset({PERM_SEND}), True,
                                          "master"), master, state=chain),
        issue_asset_tx(make_asset(71), alice),
    ]
    with pytest.raises(InvalidTransactionError):
        chain.append(_mine_on(chain, txs))


def test_revocation_blocks_further_issues(chain, master, alice):
    state = _register_alice(chain, master, alice, {PERM_SEND})
    revoke = set_permission_tx(
        PermissionGrant("alice", frozenset({PERM_SEND}), False, "master"),
        master, state=state)
    state = state.append(_mine_on(state, [revoke]))
    assert PERM_SEND not in state.permissions_of("alice")
    tx = issue_asset_tx(make_asset(72), alice)  # builder unaware of state
    with pytest.raises(PermissionDeniedError):
        state.append(_mine_on(state, [tx]))


def test_builder_refuses_without_send_permission(chain, alice):
    with pytest.raises(PermissionDeniedError):
        issue_asset_tx(make_asset(73), alice, state=chain)


def test_builder_refuses_duplicate(chain, master):
    with pytest.raises(DuplicateAssetError):
        issue_asset_tx(make_asset(1), master, state=chain)


def test_grant_issuer_must_match_sender(chain, master, alice):
    state = _register_alice(chain, master, alice, {PERM_SEND})
    # Alice signs a grant claiming master issued it.
    forged = LedgerTransaction(
        kind="permission_set", sender="alice", created_ms=0,
        payload=PermissionGrant("alice", frozenset({PERM_CONNECT}), True,
                                "master"),
    ).sign(alice.private_key)
    with pytest.raises((InvalidTransactionError, PermissionDeniedError)):
        state.append(_mine_on(state, [forged]))


def test_node_remove_clears_permissions(chain, master, alice):
    state = _register_alice(chain, master, alice, {PERM_SEND, PERM_CONNECT})
    remove = node_event_tx(NodeEvent(NODE_REMOVE, "alice", alice.public_key),
                           master, state=state)
    state = state.append(_mine_on(state, [remove]))
    assert state.key_of("alice") is None
    assert state.permissions_of("alice") == frozenset()


# -- queries ----------------------------------------------------------------

def test_query_rejects_malformed_md5(chain):
    for bad in ("", "xyz", "A" * 32, "0" * 31, "0" * 33):
        with pytest.raises(AssetFormatError):
            query_asset(chain, bad)


def test_query_depth_gating(chain, master):
    asset = make_asset(80)
    state = chain.append(_mine_on(chain, [issue_asset_tx(asset, master)]))
    # Tip block: not yet reportable at the default depth of 1.
    assert query_asset(state, asset.md5_index) is None
    assert query_asset(state, asset.md5_index, min_depth=0) is not None
    state = state.append(_mine_on(state, []))
    view = query_asset(state, asset.md5_index)
    assert view is not None
    assert view.record == asset
    assert view.block_hash == state.hashes[view.height]


def test_query_unknown_returns_none(chain):
    assert query_asset(chain, "d" * 32) is None


def test_latest_confirmed_blockhash(chain):
    hash_hex, height = latest_confirmed_blockhash(chain, 2)
    assert height == chain.height - 2
    assert hash_hex == chain.hashes[height]
    with pytest.raises(InsufficientDepthError):
        latest_confirmed_blockhash(chain, chain.height + 1)


def test_find_helpers(chain):
    block = chain.blocks[2]
    assert chain.find_block_by_hash(block.hash_hex) is block
    assert chain.find_block_by_hash("e" * 64) is None
    assert chain.block_at(2) is block
    assert chain.block_at(99) is None
    assert chain.hash_at(2) == block.hash_hex
    tx = block.txs[0]
    found = chain.find_tx(tx.tx_id)
    assert found == (tx, 2)
    assert chain.find_tx("0" * 64) is None


def test_fold_purity(chain):
    rebuilt = ChainState.from_blocks(list(chain.blocks), DIFFICULTY)
    assert rebuilt.hashes == chain.hashes
    assert dict(rebuilt.asset_index) == dict(chain.asset_index)
    assert dict(rebuilt.permission_table) == dict(chain.permission_table)
    assert dict(rebuilt.node_keys) == dict(chain.node_keys)
