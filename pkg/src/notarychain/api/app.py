"""HTTP service: asset submission, retrospective verification, chain status,
anchor history, and an explorer for local blocks and transactions.

Submission and manual anchoring are restricted to a CIDR allowlist checked
against the socket peer only — forwarding headers are deliberately ignored,
since anyone can write them. Read endpoints are open.
"""

from __future__ import annotations

import ipaddress
import json
import logging
import re
import time

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from ..anchor import AnchorService, AnchorRecord
from ..anchor.log import STATUS_CONFIRMED, STATUS_FAILED
from ..ledger import query_asset
from ..ledger.errors import (
    AssetFormatError,
    DuplicateAssetError,
    LedgerError,
    PermissionDeniedError,
)
from ..ledger.txbuild import issue_asset_tx
from ..ledger.types import (
    KIND_ASSET_ISSUE,
    KIND_NODE_EVENT,
    KIND_PERMISSION_SET,
    Block,
    LedgerTransaction,
)
from ..network import Node
from .schemas import IngestMessage, rfc1123

access_log = logging.getLogger("notarychain.api.access")

_HEIGHT_RE = re.compile(r"^\d{1,12}$")
_HASH64_RE = re.compile(r"^[0-9a-f]{64}$")

ETH_CONFIRMED = "Confirmed"
ETH_PENDING = "Pending"
ETH_NOT_ANCHORED = "NotAnchored"


class SourceGate:
    """CIDR allowlist over the transport peer address."""

    def __init__(self, cidrs):
        self.networks = [ipaddress.ip_network(c) for c in cidrs]

    def permits(self, host: str | None) -> bool:
        if not host:
            return False
        try:
            addr = ipaddress.ip_address(host)
        except ValueError:
            return False
        return any(addr in net for net in self.networks)


def _error(status: int, message: str, **extra) -> JSONResponse:
    return JSONResponse({"error": message, **extra}, status_code=status)


def _tx_document(tx: LedgerTransaction, height: int, block_hash: str) -> dict:
    doc = {"txId": tx.tx_id, "kind": tx.kind, "sender": tx.sender,
           "createdMs": tx.created_ms, "blockHeight": height,
           "blockHash": block_hash}
    p = tx.payload
    if tx.kind == KIND_ASSET_ISSUE:
        doc["payload"] = {"md5": p.md5_index, "sha256": p.sha256,
                          "sourceUri": p.source_uri,
                          "processedTs": p.processed_ts,
                          "parentMd5": p.parent_md5}
    elif tx.kind == KIND_PERMISSION_SET:
        doc["payload"] = {"subject": p.subject,
                          "permissions": sorted(p.permissions),
                          "granted": p.granted, "issuer": p.issuer}
    elif tx.kind == KIND_NODE_EVENT:
        doc["payload"] = {"action": p.action, "node": p.node,
                          "pubkey": p.pubkey.hex()}
    return doc


def _block_document(block: Block) -> dict:
    h = block.header
    return {"height": h.height, "hash": block.hash_hex,
            "prevHash": h.prev_hash, "timestamp": h.timestamp,
            "miner": h.miner, "nonce": h.nonce, "txRoot": h.tx_root,
            "txIds": [tx.tx_id for tx in block.txs]}


def _anchor_document(record: AnchorRecord, explorer_template: str) -> dict:
    return {"id": record.id, "anchoredAt": record.anchored_at,
            "privateHeight": record.private_height,
            "privateBlockhash": record.private_blockhash,
            "ethTxHash": record.eth_tx_hash, "wallet": record.wallet_address,
            "backend": record.backend, "status": record.status,
            "explorerUrl": explorer_template.format(tx_hash=record.eth_tx_hash)}


def create_app(node: Node, anchor_service: AnchorService | None = None, *,
               allowlist=("127.0.0.1/32",), page_limit: int = 100) -> FastAPI:
    """Wire the service around a running node. The anchor service is optional:
    without one, every asset reports NotAnchored and status omits wallet data.
    """
    app = FastAPI(title="notarychain", docs_url=None, redoc_url=None)
    gate = SourceGate(allowlist)

    def client_host(request: Request) -> str | None:
        # socket peer only; X-Forwarded-For and friends are spoofable
        return request.client.host if request.client else None

    @app.middleware("http")
    async def log_requests(request: Request, call_next):
        started = time.time()
        response = await call_next(request)
        access_log.info("%s %s %s -> %d (%.1fms)",
                        client_host(request) or "-", request.method,
                        request.url.path, response.status_code,
                        (time.time() - started) * 1000)
        return response

    @app.exception_handler(RequestValidationError)
    async def invalid_request(request: Request, exc: RequestValidationError):
        first = exc.errors()[0]
        field = ".".join(str(part) for part in first["loc"]
                         if part not in ("query", "path", "body"))
        return _error(400, f"invalid {field}: {first['msg']}", field=field)

    # -- submission --------------------------------------------------------

    @app.post("/assets", status_code=201)
    async def submit_asset(request: Request):
        if not gate.permits(client_host(request)):
            return _error(403, "source address not authorized")
        try:
            payload = await request.json()
        except json.JSONDecodeError:
            return _error(400, "body is not valid JSON")
        try:
            message = IngestMessage.model_validate(payload)
        except ValueError as exc:
            errors = getattr(exc, "errors", lambda: [])()
            if errors:
                field = ".".join(str(p) for p in errors[0]["loc"])
                return _error(400, f"invalid {field}: {errors[0]['msg']}",
                              field=field)
            return _error(400, str(exc))
        try:
            tx = issue_asset_tx(message.to_asset_record(), node.identity,
                                state=node.state, pool=node.pool)
            node.submit_tx(tx)
        except DuplicateAssetError:
            return _error(409, f"asset {message.md5} already recorded")
        except PermissionDeniedError:
            return _error(503, "this node is not authorized to issue assets")
        except LedgerError as exc:  # e.g. a parent reference not on chain
            return _error(400, str(exc))
        return JSONResponse({"md5": message.md5, "txId": tx.tx_id},
                            status_code=201)

    # -- verification ------------------------------------------------------

    def _eth_fields(height: int) -> dict:
        """Anchor coverage for an asset included at the given height."""
        fields = {"ethStatus": ETH_NOT_ANCHORED, "confirmations": "0"}
        if anchor_service is None:
            return fields
        for _ in range(5):  # a covering anchor may be found failed on probe
            record = anchor_service.log.covering(height)
            if record is None:
                return fields
            status = anchor_service.anchor_status(record)
            if status.status == STATUS_FAILED:
                continue  # log upgraded; look for the next covering anchor
            fields["ethStatus"] = (ETH_CONFIRMED
                                   if status.status == STATUS_CONFIRMED
                                   else ETH_PENDING)
            fields["ethTxId"] = record.eth_tx_hash
            fields["confirmations"] = str(status.confirmations)
            fields["validated"] = rfc1123(record.anchored_at)
            return fields
        return fields

    @app.get("/assets/{md5}")
    def verify_asset(md5: str):
        try:
            view = query_asset(node.state, md5)
        except AssetFormatError as exc:
            return _error(400, str(exc))
        if view is None:
            return _error(404, f"no asset with md5 {md5}")
        doc = {
            "asset": view.record.md5_index,
            "issueTxId": view.issue_tx_id,
            "issued": rfc1123(view.block_time),
            "multiChainHash": view.block_hash,
            "sha256": view.record.sha256,
            "source": view.record.source_uri,
        }
        doc.update(_eth_fields(view.height))
        return JSONResponse(dict(sorted(doc.items())))

    # -- status ------------------------------------------------------------

    @app.get("/status")
    def chain_status():
        state = node.state
        doc: dict = {
            "privateHeight": state.height,
            "privateTipHash": state.tip.hash_hex,
            "difficulty": state.difficulty,
            "peers": len(node.active_sessions()),
            "pendingTxs": len(node.pool),
            "publicBackend": None,
            "wallet": None,
            "lastAnchor": None,
            "stale": False,
        }
        if anchor_service is None:
            return doc
        summary = anchor_service.public_summary()
        reachable = summary["reachable"]
        doc["stale"] = not reachable
        doc["publicBackend"] = {"name": summary["backend"],
                                "headHeight": summary.get("head_height"),
                                "stale": not reachable}
        wallet = {"address": summary["wallet"]}
        if reachable:
            wallet.update(balanceWei=summary["balance_wei"],
                          balanceUsd=summary["balance_usd"],
                          estimatedAnchorCostWei=summary[
                              "estimated_anchor_cost_wei"],
                          anchorAffordable=summary["anchor_affordable"])
        doc["wallet"] = wallet
        last = summary.get("last_anchor")
        if last is not None:
            doc["lastAnchor"] = {"privateHeight": last["private_height"],
                                 "privateBlockhash": last["private_blockhash"],
                                 "ethTxHash": last["eth_tx_hash"],
                                 "status": last["status"],
                                 "anchoredAt": last["anchored_at"]}
        return doc

    # -- anchor history and manual trigger ---------------------------------

    @app.get("/anchors")
    def anchor_history(limit: int = Query(default=20, ge=1),
                       before: int | None = Query(default=None, ge=1)):
        if limit > page_limit:
            return _error(400, f"limit must be at most {page_limit}",
                          field="limit")
        if anchor_service is None:
            return {"anchors": [], "nextBefore": None}
        records = anchor_service.log.history(limit=limit, before_id=before)
        template = anchor_service.explorer_template
        return {"anchors": [_anchor_document(r, template) for r in records],
                "nextBefore": records[-1].id if len(records) == limit else None}

    @app.post("/anchors/trigger", status_code=201)
    async def trigger_anchor(request: Request):
        if not gate.permits(client_host(request)):
            return _error(403, "source address not authorized")
        if anchor_service is None:
            return _error(503, "anchoring is not configured")
        backend_name = None
        try:
            body = await request.json()
            if isinstance(body, dict):
                backend_name = body.get("backend")
        except json.JSONDecodeError:
            pass  # empty body is fine: use the default backend order
        try:
            outcome = anchor_service.submit_anchor(node.state,
                                                   backend_name=backend_name)
        except ValueError as exc:  # unknown backend selector
            return _error(400, str(exc))
        if outcome.ok:
            return JSONResponse(
                {"anchor": _anchor_document(
                    outcome.record, anchor_service.explorer_template),
                 "backend": outcome.backend}, status_code=201)
        if outcome.refused:
            return _error(409, outcome.reason or "anchor refused")
        return _error(502, outcome.reason or "anchor submission failed")

    # -- explorer ----------------------------------------------------------

    @app.get("/explorer/{selector}")
    def explorer(selector: str):
        state = node.state
        if selector == "latest":
            return _block_document(state.tip)
        if _HEIGHT_RE.fullmatch(selector):
            block = state.block_at(int(selector))
            if block is not None:
                return _block_document(block)
            return _error(404, f"no block at height {selector}")
        if _HASH64_RE.fullmatch(selector):
            block = state.find_block_by_hash(selector)
            if block is not None:
                return _block_document(block)
            found = state.find_tx(selector)
            if found is not None:
                tx, height = found
                return _tx_document(tx, height, state.hash_at(height))
            return _error(404, "no block or transaction with that hash")
        return _error(404, "selector is not a height, block hash, or tx id")

    return app
