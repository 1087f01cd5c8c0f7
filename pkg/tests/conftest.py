"""Shared fixtures: deterministic identities and a small pre-mined chain."""

from __future__ import annotations

import pytest

from notarychain.identity import NodeIdentity
from notarychain.ledger import ChainState, create_genesis, issue_asset_tx, mine_block
from notarychain.ledger.types import AssetRecord

DIFFICULTY = 2

# Fixed keys so failures reproduce byte-for-byte across runs.
MASTER_PRIV = 0x4C0883A69102937D6231471B5DBB6204FE512961708279FEB1BE6AE5538DA033
ALICE_PRIV = 0x6FE541E90E054E74DD6A7A2746B9C1CF888AE3A9F600594A3F38553DD9CDC394

# Filled by the acceptance suite; echoed after the run so each top-level
# criterion shows one PASS/FAIL line even under output capture.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def master() -> NodeIdentity:
    return NodeIdentity("master", MASTER_PRIV)


@pytest.fixture(scope="session")
def alice() -> NodeIdentity:
    return NodeIdentity("alice", ALICE_PRIV)


def make_asset(i: int, parent: str | None = None) -> AssetRecord:
    """Distinct, well-formed asset record for index ``i``."""
    return AssetRecord(
        md5_index=f"{i:032x}",
        sha256=f"{i:064x}",
        source_uri=f"ingest.local/files/sample-{i}.dat",
        processed_ts=1519316242073 + i,
        parent_md5=parent,
    )


@pytest.fixture()
def chain(master: NodeIdentity):
    """Genesis plus three asset-bearing blocks; returns (state, identities)."""
    genesis = create_genesis(master, DIFFICULTY, timestamp=1_700_000_000)
    state = ChainState.genesis(genesis, DIFFICULTY)
    for height in range(1, 4):
        tx = issue_asset_tx(make_asset(height), master, state=state)
        block = mine_block([tx], state.tip.header, DIFFICULTY, miner="master",
                           timestamp=1_700_000_000 + 60 * height)
        state = state.append(block)
    return state
