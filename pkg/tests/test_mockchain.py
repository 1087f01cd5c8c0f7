"""Mock public chain semantics, in-process and through the JSON-RPC facade."""

from __future__ import annotations

import pytest

from notarychain import crypto
from notarychain.anchor import (
    HttpRpcBackend,
    MockPublicChain,
    TxRejectedError,
    build_anchor_transaction,
    intrinsic_gas,
    rpc_app,
)

PRIV = 0x7C0FFEE7C0FFEE7C0FFEE7C0FFEE7C0FFEE7C0FFEE7C0FFEE7C0FFEE7C0FFEE7
ADDR = bytes.fromhex(crypto.eth_address(PRIV)[2:])
GWEI = 10 ** 9


def _anchor_tx(nonce: int, blockhash: str = "ab" * 32, priv: int = PRIV,
               gas_price: int = 4 * GWEI):
    addr = bytes.fromhex(crypto.eth_address(priv)[2:])
    return build_anchor_transaction(blockhash, nonce=nonce,
                                    gas_price=gas_price,
                                    wallet_address=addr).sign(priv)


@pytest.fixture()
def funded_chain() -> MockPublicChain:
    chain = MockPublicChain()
    chain.fund(ADDR, 10 ** 18)
    return chain


def test_submit_and_mine(funded_chain):
    chain = funded_chain
    signed = _anchor_tx(0)
    tx_hash = chain.send_raw_transaction(signed.encode_raw())
    assert tx_hash == signed.tx_hash_hex()
    assert chain.get_receipt(tx_hash) is None  # pending
    head = chain.step()
    assert head == 1
    receipt = chain.get_receipt(tx_hash)
    assert receipt is not None and receipt.ok
    assert receipt.block_height == 1
    # Gas actually used (intrinsic), not the limit, is debited.
    fee = intrinsic_gas(signed.data) * signed.gas_price
    assert chain.get_balance(ADDR) == 10 ** 18 - fee
    assert chain.get_nonce(ADDR) == 1


def test_rejects_garbage_and_forged(funded_chain):
    with pytest.raises(TxRejectedError):
        funded_chain.send_raw_transaction(b"\xde\xad\xbe\xef")
    # Tampered signature: recovers to some other (unfunded) address.
    signed = _anchor_tx(0)
    from dataclasses import replace
    forged = replace(signed, r=signed.r ^ 1)
    with pytest.raises(TxRejectedError):
        funded_chain.send_raw_transaction(forged.encode_raw())


def test_rejects_nonce_reuse_and_too_low(funded_chain):
    chain = funded_chain
    chain.send_raw_transaction(_anchor_tx(0).encode_raw())
    with pytest.raises(TxRejectedError):  # same nonce still pending
        chain.send_raw_transaction(_anchor_tx(0, blockhash="cd" * 32).encode_raw())
    chain.step()
    with pytest.raises(TxRejectedError):  # nonce already mined
        chain.send_raw_transaction(_anchor_tx(0, blockhash="ef" * 32).encode_raw())


def test_duplicate_submission_rejected(funded_chain):
    raw = _anchor_tx(0).encode_raw()
    funded_chain.send_raw_transaction(raw)
    with pytest.raises(TxRejectedError):
        funded_chain.send_raw_transaction(raw)


def test_nonce_gap_waits(funded_chain):
    chain = funded_chain
    gap = _anchor_tx(5)
    tx_hash = chain.send_raw_transaction(gap.encode_raw())
    chain.step()
    assert chain.get_receipt(tx_hash) is None  # still queued
    # Fill the gap; everything becomes includable in one block.
    hashes = [chain.send_raw_transaction(_anchor_tx(n, blockhash=f"{n:064x}")
                                         .encode_raw()) for n in range(5)]
    chain.step()
    for h in hashes + [tx_hash]:
        receipt = chain.get_receipt(h)
        assert receipt is not None and receipt.ok
    assert chain.get_nonce(ADDR) == 6


def test_pending_aware_nonce(funded_chain):
    chain = funded_chain
    assert chain.get_nonce(ADDR) == 0
    chain.send_raw_transaction(_anchor_tx(0).encode_raw())
    assert chain.get_nonce(ADDR) == 1
    chain.send_raw_transaction(_anchor_tx(1, blockhash="cd" * 32).encode_raw())
    assert chain.get_nonce(ADDR) == 2


def test_insufficient_upfront_rejected():
    chain = MockPublicChain()
    chain.fund(ADDR, 1000)  # far below gas_limit * gas_price
    with pytest.raises(TxRejectedError):
        chain.send_raw_transaction(_anchor_tx(0).encode_raw())


def test_drained_at_inclusion_gets_failure_receipt():
    chain = MockPublicChain()
    signed_a = _anchor_tx(0)
    signed_b = _anchor_tx(1, blockhash="cd" * 32)
    # Admission compares each tx's upfront cost against the current balance,
    # so funding exactly one upfront cost admits both — but executing A
    # drains the account below B's cost, which must then fail at inclusion.
    upfront = signed_a.gas * signed_a.gas_price
    chain.fund(ADDR, upfront)
    a_hash = chain.send_raw_transaction(signed_a.encode_raw())
    b_hash = chain.send_raw_transaction(signed_b.encode_raw())
    chain.step()
    assert chain.get_receipt(a_hash).ok
    receipt_b = chain.get_receipt(b_hash)
    assert receipt_b is not None and not receipt_b.ok  # dropped, failure receipt
    assert chain.get_nonce(ADDR) == 2  # nonce still consumed


def test_payload_survives_round_trip(funded_chain):
    blockhash = "0123456789abcdef" * 4
    signed = _anchor_tx(0, blockhash=blockhash)
    tx_hash = funded_chain.send_raw_transaction(signed.encode_raw())
    stored = funded_chain.get_transaction(tx_hash)
    assert stored.data.decode("ascii") == blockhash


# -- JSON-RPC facade --------------------------------------------------------

@pytest.fixture()
def rpc_backend(funded_chain):
    # TestClient is an httpx.Client that speaks ASGI in-process, so the real
    # HTTP client code path runs without sockets.
    from fastapi.testclient import TestClient
    client = TestClient(rpc_app(funded_chain), base_url="http://rpc.test")
    backend = HttpRpcBackend("http://rpc.test/", name="facade", client=client)
    yield funded_chain, backend
    client.close()


def test_rpc_facade_full_verb_set(rpc_backend):
    chain, backend = rpc_backend
    assert backend.get_nonce(ADDR) == 0
    assert backend.get_balance(ADDR) == 10 ** 18
    assert backend.gas_price() == 4 * GWEI
    assert backend.head_height() == 0
    signed = _anchor_tx(0)
    assert backend.estimate_gas(signed) is None  # mock declines to estimate
    tx_hash = backend.send_raw_transaction(signed.encode_raw())
    assert backend.get_receipt(tx_hash) is None
    chain.step(3)
    receipt = backend.get_receipt(tx_hash)
    assert receipt.ok and receipt.block_height == 1
    assert backend.head_height() == 3


def test_rpc_facade_rejection_is_tx_rejected(rpc_backend):
    _, backend = rpc_backend
    with pytest.raises(TxRejectedError):
        backend.send_raw_transaction(b"\x00\x01\x02")


def test_rpc_facade_unknown_method_is_connection_error(rpc_backend):
    from notarychain.anchor import BackendConnectionError
    _, backend = rpc_backend
    with pytest.raises(BackendConnectionError):
        backend._call("eth_bogusMethod", [])


def test_connection_error_when_unreachable():
    from notarychain.anchor import BackendConnectionError
    backend = HttpRpcBackend("http://127.0.0.1:1/", name="dead", timeout=0.2)
    with pytest.raises(BackendConnectionError):
        backend.head_height()
    backend.close()
