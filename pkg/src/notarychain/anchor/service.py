"""Anchor orchestration: pick the confirmed private-chain hash, build and
sign the public transaction, check affordability, broadcast with endpoint
fallback, and keep the durable anchor history in sync with chain reality.

Submissions are serialized through one lock (scheduler and manual triggers
both land here); status polling is read-only and runs concurrently.
"""

from __future__ import annotations

import logging
import os
import threading
from dataclasses import dataclass
from datetime import datetime, time as dtime, timedelta, timezone

from .. import crypto
from ..ledger import ChainState, latest_confirmed_blockhash
from ..ledger.errors import InsufficientDepthError
from . import ethtx
from .backends import BackendConnectionError, PublicChainBackend, TxRejectedError
from .log import (
    STATUS_CONFIRMED,
    STATUS_FAILED,
    STATUS_SUBMITTED,
    AnchorLog,
    AnchorRecord,
)

log = logging.getLogger("notarychain.anchor")

WALLET_KEY_ENV = "NOTARYCHAIN_WALLET_KEY"
DEFAULT_CONFIRM_DEPTH = 6
DEFAULT_GAS_PRICE_WEI = 4_000_000_000
DEFAULT_EXPLORER_TEMPLATE = "https://etherscan.io/tx/{tx_hash}"

WEI_PER_ETH = 10 ** 18


class WalletKeyError(Exception):
    """Wallet key absent from the environment or not a valid scalar."""


class AnchorWallet:
    """Signing wallet whose key arrives hex-encoded in an environment
    variable and never leaves this object (no disk, no logs, no repr)."""

    def __init__(self, env_var: str = WALLET_KEY_ENV):
        raw = os.environ.get(env_var)
        if not raw:
            raise WalletKeyError(
                f"wallet key environment variable {env_var} is not set")
        try:
            self.__priv = crypto.private_key_from_hex(raw)
        except ValueError as exc:
            raise WalletKeyError(f"{env_var} does not hold a valid key: {exc}") \
                from exc
        self.address: bytes = bytes.fromhex(crypto.eth_address(self.__priv)[2:])

    @property
    def address_hex(self) -> str:
        return "0x" + self.address.hex()

    def sign_tx(self, tx: ethtx.EthereumTx,
                chain_id: int | None = None) -> ethtx.EthereumTx:
        return tx.sign(self.__priv, chain_id)

    def __repr__(self) -> str:
        return f"AnchorWallet({self.address_hex})"


@dataclass(frozen=True)
class CostCheck:
    cost_wei: int
    balance_wei: int
    gas_limit: int
    gas_price: int
    affordable: bool


@dataclass(frozen=True)
class AnchorOutcome:
    """Result object for a submission attempt; refusals are not errors."""
    ok: bool
    refused: bool = False
    reason: str | None = None
    record: AnchorRecord | None = None
    backend: str | None = None


@dataclass(frozen=True)
class AnchorStatus:
    record: AnchorRecord
    status: str
    confirmations: int
    explorer_url: str
    stale: bool  # True when the backend was unreachable and values are cached


class AnchorService:
    def __init__(self, anchor_log: AnchorLog,
                 backends: list[PublicChainBackend], wallet: AnchorWallet, *,
                 confirm_depth: int = DEFAULT_CONFIRM_DEPTH,
                 default_gas_price: int = DEFAULT_GAS_PRICE_WEI,
                 fire_time_utc: dtime = dtime(hour=2, minute=0),
                 usd_per_eth: float = 600.0,
                 explorer_template: str = DEFAULT_EXPLORER_TEMPLATE,
                 chain_id: int | None = None):
        if not backends:
            raise ValueError("at least one public-chain backend is required")
        self.log = anchor_log
        self.backends = list(backends)
        self.wallet = wallet
        self.confirm_depth = confirm_depth
        self.default_gas_price = default_gas_price
        self.fire_time_utc = fire_time_utc
        self.usd_per_eth = usd_per_eth
        self.explorer_template = explorer_template
        self.chain_id = chain_id
        self._submit_lock = threading.Lock()

    # -- building blocks ---------------------------------------------------

    def _backend_named(self, name: str | None) -> list[PublicChainBackend]:
        """Submission order: an explicit selection pins that endpoint, the
        default walks the configured fallback order."""
        if name is None:
            return self.backends
        for backend in self.backends:
            if backend.name == name:
                return [backend]
        raise ValueError(f"no backend named {name!r}")

    def _resolve_gas(self, backend: PublicChainBackend,
                     unsigned: ethtx.EthereumTx) -> tuple[int, int]:
        """(gas_limit, gas_price): endpoint estimate/suggestion when offered,
        otherwise intrinsic-plus-margin and the configured price."""
        estimate = backend.estimate_gas(unsigned)
        gas_limit = estimate if estimate is not None else \
            ethtx.gas_with_margin(ethtx.intrinsic_gas(unsigned.data))
        suggested = backend.gas_price()
        gas_price = suggested if suggested is not None else self.default_gas_price
        return gas_limit, gas_price

    def estimate_cost_and_check(self, backend: PublicChainBackend | None = None,
                                blockhash_hex: str = "0" * 64) -> CostCheck:
        """Affordability probe: cost = startgas * gasprice, proceed iff
        balance >= cost."""
        backend = backend or self.backends[0]
        probe = ethtx.build_anchor_transaction(
            blockhash_hex, nonce=0, gas_price=self.default_gas_price,
            wallet_address=self.wallet.address)
        gas_limit, gas_price = self._resolve_gas(backend, probe)
        cost = gas_limit * gas_price
        balance = backend.get_balance(self.wallet.address)
        return CostCheck(cost_wei=cost, balance_wei=balance,
                         gas_limit=gas_limit, gas_price=gas_price,
                         affordable=balance >= cost)

    # -- submission --------------------------------------------------------

    def submit_anchor(self, state: ChainState, *,
                      backend_name: str | None = None) -> AnchorOutcome:
        """Full anchoring workflow against the current private-chain state.

        Connection failures roll over to the next configured endpoint;
        a rejection aborts immediately (it could be a signing bug, and
        resubmitting elsewhere would hide it). Nothing but an audit entry is
        written unless the broadcast returns a transaction hash.
        """
        with self._submit_lock:
            try:
                blockhash, height = latest_confirmed_blockhash(
                    state, self.confirm_depth)
            except InsufficientDepthError as exc:
                self.log.audit("refused", f"chain too shallow: {exc}")
                return AnchorOutcome(ok=False, refused=True, reason=str(exc))

            candidates = self._backend_named(backend_name)
            last_connection_error: Exception | None = None
            for backend in candidates:
                try:
                    return self._submit_via(backend, blockhash, height)
                except BackendConnectionError as exc:
                    log.warning("backend %s unreachable: %s", backend.name, exc)
                    self.log.audit("backend_unreachable",
                                   f"{backend.name}: {exc}")
                    last_connection_error = exc
                except TxRejectedError as exc:
                    self.log.audit("rejected", f"{backend.name}: {exc}")
                    return AnchorOutcome(ok=False, reason=str(exc),
                                         backend=backend.name)
            reason = f"all backends unreachable: {last_connection_error}"
            return AnchorOutcome(ok=False, reason=reason)

    def _submit_via(self, backend: PublicChainBackend, blockhash: str,
                    height: int) -> AnchorOutcome:
        nonce = backend.get_nonce(self.wallet.address)
        unsigned = ethtx.build_anchor_transaction(
            blockhash, nonce=nonce, gas_price=self.default_gas_price,
            wallet_address=self.wallet.address)
        gas_limit, gas_price = self._resolve_gas(backend, unsigned)
        unsigned = ethtx.EthereumTx(nonce=nonce, gas_price=gas_price,
                                    gas=gas_limit, to=self.wallet.address,
                                    value=0, data=unsigned.data)
        cost = gas_limit * gas_price
        balance = backend.get_balance(self.wallet.address)
        if balance < cost:
            reason = (f"insufficient funds: balance {balance} wei,"
                      f" estimated cost {cost} wei")
            self.log.audit("refused", f"{backend.name}: {reason}")
            return AnchorOutcome(ok=False, refused=True, reason=reason,
                                 backend=backend.name)

        signed = self.wallet.sign_tx(unsigned, self.chain_id)
        raw = signed.encode_raw()
        tx_hash = backend.send_raw_transaction(raw)
        record = self.log.record_anchor(
            private_blockhash=blockhash, private_height=height,
            eth_tx_hash=tx_hash, wallet_address=self.wallet.address_hex,
            backend=backend.name, nonce=nonce, gas_price=gas_price,
            gas_limit=gas_limit, raw_tx=raw.hex())
        log.info("anchored private height %d (%s…) as %s via %s",
                 height, blockhash[:16], tx_hash, backend.name)
        return AnchorOutcome(ok=True, record=record, backend=backend.name)

    # -- status ------------------------------------------------------------

    def anchor_status(self, record: AnchorRecord) -> AnchorStatus:
        """Live status with confirmation count; stale cached values when the
        backend cannot be reached."""
        url = self.explorer_template.format(tx_hash=record.eth_tx_hash)
        backend = next((b for b in self.backends if b.name == record.backend),
                       self.backends[0])
        try:
            receipt = backend.get_receipt(record.eth_tx_hash)
            head = backend.head_height()
        except BackendConnectionError:
            return AnchorStatus(record=record, status=record.status,
                                confirmations=0, explorer_url=url, stale=True)
        if receipt is None:
            return AnchorStatus(record=record, status=STATUS_SUBMITTED,
                                confirmations=0, explorer_url=url, stale=False)
        status = STATUS_CONFIRMED if receipt.ok else STATUS_FAILED
        if record.status != status:
            self.log.update_status(record.id, status)
            record = self.log.get(record.id)
        confirmations = head - receipt.block_height + 1
        return AnchorStatus(record=record, status=status,
                            confirmations=max(confirmations, 0),
                            explorer_url=url, stale=False)

    # -- scheduling --------------------------------------------------------

    def run_schedule_tick(self, now: datetime | None = None) -> str:
        """'anchor' when the daily fire time has been crossed since the last
        anchor, else 'skip'. Manual triggers bypass this gate entirely."""
        now = now or datetime.now(timezone.utc)
        if now.tzinfo is None:
            now = now.replace(tzinfo=timezone.utc)
        last = self.log.latest()
        if last is None:
            return "anchor"
        last_at = datetime.fromtimestamp(last.anchored_at, tz=timezone.utc)
        if now < last_at:
            log.warning("clock moved backwards (now %s < last anchor %s);"
                        " skipping", now, last_at)
            return "skip"
        next_fire = datetime.combine(last_at.date(), self.fire_time_utc,
                                     tzinfo=timezone.utc)
        if last_at >= next_fire:
            next_fire += timedelta(days=1)
        return "anchor" if now >= next_fire else "skip"

    # -- dashboard ---------------------------------------------------------

    def public_summary(self) -> dict:
        """Backend head, wallet funds (wei + configured-rate dollars) and the
        current estimated anchor cost, for the status endpoint."""
        backend = self.backends[0]
        summary: dict = {"backend": backend.name, "reachable": True,
                         "wallet": self.wallet.address_hex}
        try:
            check = self.estimate_cost_and_check(backend)
            summary.update(
                head_height=backend.head_height(),
                balance_wei=str(check.balance_wei),
                balance_usd=round(check.balance_wei / WEI_PER_ETH
                                  * self.usd_per_eth, 2),
                estimated_anchor_cost_wei=str(check.cost_wei),
                anchor_affordable=check.affordable,
            )
        except BackendConnectionError:
            summary["reachable"] = False
        last = self.log.latest()
        if last is not None:
            summary["last_anchor"] = {
                "private_height": last.private_height,
                "private_blockhash": last.private_blockhash,
                "eth_tx_hash": last.eth_tx_hash,
                "status": last.status,
                "anchored_at": last.anchored_at,
            }
        return summary
