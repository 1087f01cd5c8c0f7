"""In-process stand-in for the public chain.

Enforces the same admission rules a real node applies — strict decoding,
sender recovery, nonce ordering, intrinsic gas, upfront balance — so the
submission path is exercised honestly. Mining is explicit: ``step()``
includes every currently includable pending transaction in one new block,
debits gas, advances nonces and writes receipts.

A JSON-RPC facade (``rpc_app``) exposes the standard node verb set over
HTTP so the external-endpoint client can be tested against the mock.
"""

from __future__ import annotations

import threading

from .backends import Receipt, TxRejectedError
from .ethtx import EthereumTx, TxFormatError, decode_raw, intrinsic_gas


class MockPublicChain:
    def __init__(self, *, name: str = "mock", gas_price_wei: int = 4_000_000_000,
                 offer_gas_estimate: bool = False):
        self.name = name
        self._gas_price = gas_price_wei
        # When False the node declines to estimate, forcing clients onto the
        # intrinsic-plus-margin formula.
        self._offer_gas_estimate = offer_gas_estimate
        self._lock = threading.RLock()
        self._balances: dict[bytes, int] = {}
        self._next_nonce: dict[bytes, int] = {}  # next nonce to be mined
        self._pending: list[tuple[bytes, EthereumTx, str]] = []  # sender, tx, hash
        self._txs: dict[str, EthereumTx] = {}
        self._senders: dict[str, bytes] = {}
        self._receipts: dict[str, Receipt] = {}
        self._height = 0

    # -- test/admin controls ----------------------------------------------

    def fund(self, address: bytes, wei: int) -> None:
        with self._lock:
            self._balances[address] = self._balances.get(address, 0) + wei

    def step(self, blocks: int = 1) -> int:
        """Mine; returns the new head height."""
        with self._lock:
            for _ in range(blocks):
                self._height += 1
                self._include_ready()
            return self._height

    def get_transaction(self, tx_hash: str) -> EthereumTx | None:
        """Accepted transaction by hash — lets verifiers decode the payload."""
        with self._lock:
            return self._txs.get(tx_hash)

    def _include_ready(self) -> None:
        # Keep sweeping the pending list so consecutive nonces from one
        # sender land in the same block, like a real miner would.
        progressed = True
        while progressed:
            progressed = False
            for entry in list(self._pending):
                sender, tx, tx_hash = entry
                if tx.nonce != self._next_nonce.get(sender, 0):
                    continue
                self._pending.remove(entry)
                self._next_nonce[sender] = tx.nonce + 1
                fee = intrinsic_gas(tx.data) * tx.gas_price
                cost = fee + tx.value
                balance = self._balances.get(sender, 0)
                if balance < cost:
                    # Balance may have been drained since admission (earlier
                    # tx in this very block): dropped with a failure receipt.
                    self._receipts[tx_hash] = Receipt(tx_hash, self._height, False)
                    progressed = True
                    continue
                self._balances[sender] = balance - cost
                if tx.to:
                    self._balances[tx.to] = self._balances.get(tx.to, 0) + tx.value
                self._receipts[tx_hash] = Receipt(tx_hash, self._height, True)
                progressed = True

    # -- backend contract --------------------------------------------------

    def get_nonce(self, address: bytes) -> int:
        with self._lock:
            nonce = self._next_nonce.get(address, 0)
            pending = [tx.nonce for sender, tx, _ in self._pending
                       if sender == address]
            # Pending-aware: count consecutively queued transactions.
            while nonce in pending:
                nonce += 1
            return nonce

    def get_balance(self, address: bytes) -> int:
        with self._lock:
            return self._balances.get(address, 0)

    def estimate_gas(self, tx: EthereumTx) -> int | None:
        if not self._offer_gas_estimate:
            return None
        return intrinsic_gas(tx.data)

    def gas_price(self) -> int | None:
        return self._gas_price

    def send_raw_transaction(self, raw: bytes) -> str:
        try:
            tx = decode_raw(raw)
        except TxFormatError as exc:
            raise TxRejectedError(f"invalid transaction: {exc}") from exc
        try:
            sender = tx.recover_sender()
        except TxFormatError as exc:
            raise TxRejectedError(f"unrecoverable signature: {exc}") from exc
        tx_hash = tx.tx_hash_hex()
        with self._lock:
            if tx_hash in self._txs:
                raise TxRejectedError("known transaction")
            floor = self._next_nonce.get(sender, 0)
            if tx.nonce < floor:
                raise TxRejectedError(
                    f"nonce too low: got {tx.nonce}, expected >= {floor}")
            if any(s == sender and t.nonce == tx.nonce
                   for s, t, _ in self._pending):
                raise TxRejectedError(f"replacement transaction for nonce"
                                      f" {tx.nonce} not supported")
            upfront = tx.gas * tx.gas_price + tx.value
            if self._balances.get(sender, 0) < upfront:
                raise TxRejectedError(
                    f"insufficient funds: balance {self._balances.get(sender, 0)},"
                    f" upfront cost {upfront}")
            self._pending.append((sender, tx, tx_hash))
            self._txs[tx_hash] = tx
            self._senders[tx_hash] = sender
            return tx_hash

    def get_receipt(self, tx_hash: str) -> Receipt | None:
        with self._lock:
            return self._receipts.get(tx_hash)

    def head_height(self) -> int:
        with self._lock:
            return self._height


def rpc_app(chain: MockPublicChain):
    """FastAPI facade translating JSON-RPC calls onto a MockPublicChain."""
    from fastapi import Body, FastAPI

    app = FastAPI(title="mock public chain", docs_url=None, redoc_url=None)

    def _addr(hex_str: str) -> bytes:
        return bytes.fromhex(hex_str.removeprefix("0x"))

    handlers = {
        "eth_getTransactionCount":
            lambda p: hex(chain.get_nonce(_addr(p[0]))),
        "eth_getBalance":
            lambda p: hex(chain.get_balance(_addr(p[0]))),
        "eth_gasPrice":
            lambda p: hex(chain.gas_price()),
        "eth_blockNumber":
            lambda p: hex(chain.head_height()),
        "eth_sendRawTransaction":
            lambda p: chain.send_raw_transaction(bytes.fromhex(
                p[0].removeprefix("0x"))),
    }

    def _estimate(params) -> str | None:
        call = params[0] if params else {}
        data = bytes.fromhex(str(call.get("data", "0x")).removeprefix("0x"))
        probe = EthereumTx(nonce=0, gas_price=0, gas=0, to=b"\x00" * 20,
                           value=0, data=data)
        estimate = chain.estimate_gas(probe)
        return hex(estimate) if estimate is not None else None

    def _receipt(params) -> dict | None:
        receipt = chain.get_receipt(params[0])
        if receipt is None:
            return None
        return {"transactionHash": receipt.tx_hash,
                "blockNumber": hex(receipt.block_height),
                "status": "0x1" if receipt.ok else "0x0"}

    handlers["eth_estimateGas"] = _estimate
    handlers["eth_getTransactionReceipt"] = _receipt

    @app.post("/")
    def rpc(request: dict = Body(...)):
        request_id = request.get("id")
        method = request.get("method", "")
        handler = handlers.get(method)
        if handler is None:
            return {"jsonrpc": "2.0", "id": request_id,
                    "error": {"code": -32601, "message": f"unknown method {method}"}}
        try:
            result = handler(request.get("params", []))
        except TxRejectedError as exc:
            return {"jsonrpc": "2.0", "id": request_id,
                    "error": {"code": -32000, "message": str(exc)}}
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            return {"jsonrpc": "2.0", "id": request_id,
                    "error": {"code": -32602, "message": f"bad params: {exc}"}}
        return {"jsonrpc": "2.0", "id": request_id, "result": result}

    return app
