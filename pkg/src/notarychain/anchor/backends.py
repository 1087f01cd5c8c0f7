"""Public-chain access: the backend contract and an HTTP JSON-RPC client.

Three interchangeable implementations exist: a local node client and an
external HTTP endpoint are both ``HttpRpcBackend`` instances (only the URL
differs), and tests use the in-process mock. Connection failures and chain
rejections are distinct error types because they demand different reactions:
a connection error may be retried against a fallback endpoint, a rejection
must never be (it can indicate a signing bug).
"""

from __future__ import annotations

from typing import Protocol

import httpx

from .ethtx import EthereumTx


class BackendConnectionError(Exception):
    """Endpoint unreachable or protocol-level failure; fallback is allowed."""


class TxRejectedError(Exception):
    """The chain refused the transaction; never retried elsewhere."""


class Receipt:
    """Inclusion proof for a transaction: block height plus success flag."""

    __slots__ = ("tx_hash", "block_height", "ok")

    def __init__(self, tx_hash: str, block_height: int, ok: bool):
        self.tx_hash = tx_hash
        self.block_height = block_height
        self.ok = ok

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        state = "ok" if self.ok else "failed"
        return f"Receipt({self.tx_hash[:10]}… @{self.block_height} {state})"


class PublicChainBackend(Protocol):
    """What the anchor service needs from any chain endpoint."""

    name: str

    def get_nonce(self, address: bytes) -> int:
        """Next usable nonce, counting the endpoint's pending transactions."""

    def get_balance(self, address: bytes) -> int: ...

    def estimate_gas(self, tx: EthereumTx) -> int | None:
        """Endpoint's gas estimate, or None when it offers none."""

    def gas_price(self) -> int | None:
        """Endpoint's suggested gas price in wei, or None."""

    def send_raw_transaction(self, raw: bytes) -> str:
        """Broadcast; returns the 0x-prefixed transaction hash."""

    def get_receipt(self, tx_hash: str) -> Receipt | None:
        """Receipt once included, None while pending or unknown."""

    def head_height(self) -> int: ...


def _hex_quantity(value: int) -> str:
    return hex(value)


class HttpRpcBackend:
    """JSON-RPC client speaking the standard Ethereum node verb set."""

    def __init__(self, url: str, name: str | None = None, *,
                 timeout: float = 10.0, client: httpx.Client | None = None):
        self.url = url
        self.name = name or url
        self._client = client or httpx.Client(timeout=timeout)
        self._id = 0

    def close(self) -> None:
        self._client.close()

    def _call(self, method: str, params: list):
        self._id += 1
        try:
            response = self._client.post(self.url, json={
                "jsonrpc": "2.0", "id": self._id,
                "method": method, "params": params,
            })
            response.raise_for_status()
            body = response.json()
        except (httpx.HTTPError, ValueError) as exc:
            raise BackendConnectionError(f"{self.name}: {method}: {exc}") from exc
        if "error" in body and body["error"]:
            message = body["error"].get("message", str(body["error"]))
            if method == "eth_sendRawTransaction":
                raise TxRejectedError(f"{self.name}: {message}")
            raise BackendConnectionError(f"{self.name}: {method}: {message}")
        return body.get("result")

    # -- backend contract --------------------------------------------------

    def get_nonce(self, address: bytes) -> int:
        result = self._call("eth_getTransactionCount",
                            ["0x" + address.hex(), "pending"])
        return int(result, 16)

    def get_balance(self, address: bytes) -> int:
        result = self._call("eth_getBalance", ["0x" + address.hex(), "latest"])
        return int(result, 16)

    def estimate_gas(self, tx: EthereumTx) -> int | None:
        params = {"from": "0x" + tx.to.hex(), "to": "0x" + tx.to.hex(),
                  "value": _hex_quantity(tx.value),
                  "data": "0x" + tx.data.hex()}
        result = self._call("eth_estimateGas", [params])
        return int(result, 16) if result else None

    def gas_price(self) -> int | None:
        result = self._call("eth_gasPrice", [])
        return int(result, 16) if result else None

    def send_raw_transaction(self, raw: bytes) -> str:
        result = self._call("eth_sendRawTransaction", ["0x" + raw.hex()])
        if not result:
            raise TxRejectedError(f"{self.name}: no transaction hash returned")
        return result

    def get_receipt(self, tx_hash: str) -> Receipt | None:
        result = self._call("eth_getTransactionReceipt", [tx_hash])
        if result is None:
            return None
        return Receipt(tx_hash=result["transactionHash"],
                       block_height=int(result["blockNumber"], 16),
                       ok=int(result["status"], 16) == 1)

    def head_height(self) -> int:
        return int(self._call("eth_blockNumber", []), 16)
