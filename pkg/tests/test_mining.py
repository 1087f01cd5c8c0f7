"""Block assembly and proof-of-work policy."""

from __future__ import annotations

import pytest

from notarychain.ledger import ChainState, create_genesis, issue_asset_tx, mine_block
from notarychain.ledger.errors import DuplicateAssetError
from notarychain.ledger.mining import meets_difficulty
from notarychain.ledger.types import HEADER_NONCE_OFFSET

from conftest import DIFFICULTY, make_asset


def test_meets_difficulty_counts_hex_chars():
    assert meets_difficulty(b"\x00\xff" + bytes(30), 2)
    assert not meets_difficulty(b"\x01" + bytes(31), 2)
    # Odd difficulty: 3 means one zero byte plus a high nibble of zero.
    assert meets_difficulty(b"\x00\x0f" + bytes(30), 3)
    assert not meets_difficulty(b"\x00\x10" + bytes(30), 3)
    assert meets_difficulty(bytes(32), 64)
    assert meets_difficulty(b"\xff" + bytes(31), 0)


def test_mined_block_hash_honours_difficulty(chain):
    block = mine_block([], chain.tip.header, DIFFICULTY, miner="master",
                       timestamp=chain.tip.header.timestamp + 1)
    assert block.hash_hex.startswith("0" * DIFFICULTY)
    assert meets_difficulty(block.block_hash(), DIFFICULTY)


def test_nonce_sits_at_documented_offset(chain):
    block = chain.tip
    raw_header = block.header.canonical_bytes()
    embedded = int.from_bytes(
        raw_header[HEADER_NONCE_OFFSET:HEADER_NONCE_OFFSET + 8], "big")
    assert embedded == block.header.nonce


def test_mine_rejects_duplicate_md5_in_pending_set(chain, master):
    asset = make_asset(90)
    tx_a = issue_asset_tx(asset, master, now_ms=1)
    tx_b = issue_asset_tx(asset, master, now_ms=2)  # distinct tx, same index
    assert tx_a.tx_id != tx_b.tx_id
    with pytest.raises(DuplicateAssetError) as err:
        mine_block([tx_a, tx_b], chain.tip.header, DIFFICULTY, miner="master")
    assert err.value.tx_id == tx_b.tx_id  # the later duplicate is named


def test_genesis_is_self_contained(master):
    block = create_genesis(master, DIFFICULTY, timestamp=1_600_000_000)
    assert block.header.height == 0
    assert block.header.prev_hash == "0" * 64
    assert block.hash_hex.startswith("0" * DIFFICULTY)
    state = ChainState.genesis(block, DIFFICULTY)
    assert state.height == 0


def test_genesis_accepts_preregistered_nodes(master, alice):
    from notarychain.ledger.types import (
        LedgerTransaction, NODE_ADD, NodeEvent, PERM_SEND, PermissionGrant)
    extra = [
        LedgerTransaction(kind="node_event", sender="master", created_ms=0,
                          payload=NodeEvent(NODE_ADD, "alice", alice.public_key),
                          ).sign(master.private_key),
        LedgerTransaction(kind="permission_set", sender="master", created_ms=0,
                          payload=PermissionGrant("alice", frozenset({PERM_SEND}),
                                                  True, "master"),
                          ).sign(master.private_key),
    ]
    block = create_genesis(master, DIFFICULTY, timestamp=1_600_000_000,
                           extra_txs=extra)
    state = ChainState.genesis(block, DIFFICULTY)
    assert state.key_of("alice") == alice.public_key
    assert state.permissions_of("alice") == frozenset({PERM_SEND})


def test_mining_difficulty_zero_accepts_first_nonce(chain):
    block = mine_block([], chain.tip.header, 0, miner="master",
                       timestamp=chain.tip.header.timestamp + 1, start_nonce=7)
    assert block.header.nonce == 7
