/**
 * Dashboard: private chain, public backend, wallet, last anchor.
 *
 * Every displayed figure traces to a field of GET /status — the only
 * transformation applied is the exact string wei→ether shift for the
 * balance, never a recomputation. When a poll fails, the previous
 * document stays on screen under an error banner.
 */

import type { PortalClient } from "../api.js";
import type { PortalConfig } from "../config.js";
import { code, escapeHtml, utcTime, weiToEther } from "../format.js";
import type { StatusDocument } from "../types.js";

export interface DashboardState {
  status: StatusDocument | null;
  error: string | null;
  /** epoch ms of the last successful poll, for the stale-data note */
  fetchedAt: number | null;
}

const STALE_BADGE = '<span class="badge stale">stale</span>';

export class DashboardController {
  readonly state: DashboardState = { status: null, error: null, fetchedAt: null };

  constructor(
    private readonly client: PortalClient,
    private readonly config: PortalConfig,
    private readonly now: () => number = Date.now,
  ) {}

  async refresh(): Promise<void> {
    try {
      this.state.status = await this.client.getStatus();
      this.state.error = null;
      this.state.fetchedAt = this.now();
    } catch (exc) {
      // keep the last-known document; the banner explains the gap
      this.state.error = exc instanceof Error ? exc.message : String(exc);
    }
  }

  render(): string {
    const parts: string[] = [];
    if (this.state.error !== null) {
      const since =
        this.state.fetchedAt === null
          ? "no data received yet"
          : `showing last data from ${utcTime(this.state.fetchedAt / 1000)}`;
      parts.push(
        `<div class="banner error">API unreachable: ` +
          `${escapeHtml(this.state.error)} — ${since}</div>`,
      );
    }
    const doc = this.state.status;
    if (doc === null) {
      parts.push('<p class="empty">Waiting for the first status poll…</p>');
      return parts.join("\n");
    }
    if (doc.stale) {
      parts.push(
        `<div class="banner warn">Public-chain data is stale: ` +
          `the backend could not be reached on the last probe.</div>`,
      );
    }
    parts.push(this.privatePanel(doc));
    parts.push(this.backendPanel(doc));
    parts.push(this.walletPanel(doc));
    parts.push(this.lastAnchorPanel(doc));
    parts.push(
      `<p class="schedule">Daily anchor at ` +
        `<strong>${escapeHtml(this.config.fireTime)} UTC</strong> ` +
        `(schedule is read-only here; edit the server configuration to ` +
        `change it).</p>`,
    );
    return parts.join("\n");
  }

  private privatePanel(doc: StatusDocument): string {
    return [
      '<section class="card" data-panel="private">',
      "<h2>Private chain</h2>",
      `<dl><dt>Height</dt><dd>${doc.privateHeight}</dd>`,
      `<dt>Tip hash</dt><dd>${code(doc.privateTipHash)}</dd>`,
      `<dt>Difficulty</dt><dd>${doc.difficulty}</dd>`,
      `<dt>Peers</dt><dd>${doc.peers}</dd>`,
      `<dt>Pending transactions</dt><dd>${doc.pendingTxs}</dd></dl>`,
      "</section>",
    ].join("");
  }

  private backendPanel(doc: StatusDocument): string {
    const backend = doc.publicBackend;
    if (backend === null) {
      return (
        '<section class="card" data-panel="backend"><h2>Public backend</h2>' +
        '<p class="empty">Anchoring is not configured on this node.</p></section>'
      );
    }
    const head =
      backend.headHeight === null ? "unknown" : String(backend.headHeight);
    return [
      '<section class="card" data-panel="backend">',
      `<h2>Public backend ${backend.stale ? STALE_BADGE : ""}</h2>`,
      `<dl><dt>Endpoint</dt><dd>${escapeHtml(backend.name)}</dd>`,
      `<dt>Head height</dt><dd>${escapeHtml(head)}</dd></dl>`,
      "</section>",
    ].join("");
  }

  private walletPanel(doc: StatusDocument): string {
    const wallet = doc.wallet;
    if (wallet === null) {
      return (
        '<section class="card" data-panel="wallet"><h2>Wallet</h2>' +
        '<p class="empty">Anchoring is not configured on this node.</p></section>'
      );
    }
    const rows = [`<dt>Address</dt><dd>${code(wallet.address)}</dd>`];
    if (wallet.balanceWei === undefined) {
      rows.push(`<dt>Balance</dt><dd>unavailable ${STALE_BADGE}</dd>`);
    } else {
      rows.push(
        `<dt>Balance</dt><dd>${escapeHtml(weiToEther(wallet.balanceWei))} ` +
          `ETH (${escapeHtml(wallet.balanceWei)} wei, ` +
          `$${escapeHtml(String(wallet.balanceUsd))})</dd>`,
      );
    }
    if (wallet.estimatedAnchorCostWei !== undefined) {
      rows.push(
        `<dt>Estimated anchor cost</dt>` +
          `<dd>${escapeHtml(weiToEther(wallet.estimatedAnchorCostWei))} ETH ` +
          `(${escapeHtml(wallet.estimatedAnchorCostWei)} wei)</dd>`,
      );
    }
    const warning =
      wallet.anchorAffordable === false
        ? '<div class="banner warn">Insufficient funds: the next anchor ' +
          "would be refused until the wallet is topped up.</div>"
        : "";
    return [
      '<section class="card" data-panel="wallet">',
      "<h2>Wallet</h2>",
      `<dl>${rows.join("")}</dl>`,
      warning,
      "</section>",
    ].join("");
  }

  private lastAnchorPanel(doc: StatusDocument): string {
    const last = doc.lastAnchor;
    if (last === null) {
      return (
        '<section class="card" data-panel="last-anchor"><h2>Last anchor</h2>' +
        '<p class="empty">No anchor recorded yet.</p></section>'
      );
    }
    return [
      '<section class="card" data-panel="last-anchor">',
      "<h2>Last anchor</h2>",
      `<dl><dt>Private height</dt><dd>${last.privateHeight}</dd>`,
      `<dt>Private blockhash</dt><dd>${code(last.privateBlockhash)}</dd>`,
      `<dt>Public tx</dt><dd>${code(last.ethTxHash)}</dd>`,
      `<dt>Status</dt><dd>${escapeHtml(last.status)}</dd>`,
      `<dt>Anchored at</dt><dd>${escapeHtml(utcTime(last.anchoredAt))}</dd></dl>`,
      "</section>",
    ].join("");
  }
}
