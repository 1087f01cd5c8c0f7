/**
 * Embedded chain explorer over GET /explorer/{selector}: blocks by height
 * or hash, transactions by id, "latest" for the tip. Block views link to
 * their transactions; transaction views decode the payload and link back
 * to the containing block.
 */

import { ApiRequestError, type PortalClient } from "../api.js";
import { code, escapeHtml, utcTime } from "../format.js";
import {
  isBlockDocument,
  type AssetPayload,
  type BlockDocument,
  type ExplorerDocument,
  type NodeEventPayload,
  type PermissionPayload,
  type TxDocument,
} from "../types.js";

export interface ExplorerState {
  selector: string;
  view: ExplorerDocument | null;
  /** selector that produced a 404 */
  notFound: string | null;
  error: string | null;
  loading: boolean;
}

export class ExplorerController {
  readonly state: ExplorerState = {
    selector: "",
    view: null,
    notFound: null,
    error: null,
    loading: false,
  };

  constructor(private readonly client: PortalClient) {}

  setSelector(value: string): void {
    this.state.selector = value;
  }

  async open(selector: string): Promise<void> {
    this.state.selector = selector;
    this.state.loading = true;
    this.state.notFound = null;
    this.state.error = null;
    try {
      this.state.view = await this.client.getExplorer(selector.trim());
    } catch (exc) {
      this.state.view = null;
      if (exc instanceof ApiRequestError && exc.status === 404) {
        this.state.notFound = selector;
      } else {
        this.state.error = exc instanceof Error ? exc.message : String(exc);
      }
    } finally {
      this.state.loading = false;
    }
  }

  render(): string {
    const parts = ['<section class="card" data-panel="explorer">'];
    parts.push("<h2>Chain explorer</h2>");
    parts.push(
      `<form data-action="explore"><input type="text" name="selector" ` +
        `placeholder='height, block hash, tx id, or "latest"' ` +
        `value="${escapeHtml(this.state.selector)}" spellcheck="false">` +
        `<button${this.state.loading ? " disabled" : ""}>Open</button>` +
        `<button type="button" data-action="explore-latest">Latest</button>` +
        `</form>`,
    );
    if (this.state.error !== null) {
      parts.push(
        `<div class="banner error">Explorer request failed: ` +
          `${escapeHtml(this.state.error)}</div>`,
      );
    }
    if (this.state.notFound !== null) {
      parts.push(
        `<p class="empty">Nothing matches ` +
          `${code(this.state.notFound)} — expected a height, a block ` +
          "hash, a transaction id, or <code>latest</code>.</p>",
      );
    }
    const view = this.state.view;
    if (view !== null) {
      parts.push(
        isBlockDocument(view) ? this.renderBlock(view) : this.renderTx(view),
      );
    }
    parts.push("</section>");
    return parts.join("\n");
  }

  private selectorLink(value: string): string {
    return (
      `<a data-selector="${escapeHtml(value)}" href="#explorer">` +
      `${code(value)}</a>`
    );
  }

  private renderBlock(block: BlockDocument): string {
    const txs =
      block.txIds.length === 0
        ? '<p class="empty">No transactions in this block.</p>'
        : `<ol class="txs">${block.txIds
            .map((id) => `<li>${this.selectorLink(id)}</li>`)
            .join("")}</ol>`;
    const prev =
      block.height === 0
        ? code(block.prevHash)
        : this.selectorLink(block.prevHash);
    return [
      `<div data-view="block"><h3>Block ${block.height}</h3>`,
      `<dl><dt>Hash</dt><dd>${code(block.hash)}</dd>`,
      `<dt>Previous</dt><dd>${prev}</dd>`,
      `<dt>Timestamp</dt><dd>${escapeHtml(utcTime(block.timestamp))}</dd>`,
      `<dt>Miner</dt><dd>${escapeHtml(block.miner)}</dd>`,
      `<dt>Nonce</dt><dd>${block.nonce}</dd>`,
      `<dt>Tx root</dt><dd>${code(block.txRoot)}</dd></dl>`,
      `<h4>Transactions (${block.txIds.length})</h4>${txs}</div>`,
    ].join("");
  }

  private renderTx(tx: TxDocument): string {
    return [
      `<div data-view="tx"><h3>Transaction</h3>`,
      `<dl><dt>Id</dt><dd>${code(tx.txId)}</dd>`,
      `<dt>Kind</dt><dd>${escapeHtml(tx.kind)}</dd>`,
      `<dt>Sender</dt><dd>${escapeHtml(tx.sender)}</dd>`,
      `<dt>Created</dt><dd>${escapeHtml(utcTime(tx.createdMs / 1000))}</dd>`,
      `<dt>Block</dt><dd>${tx.blockHeight} — ` +
        `${this.selectorLink(tx.blockHash)}</dd></dl>`,
      this.renderPayload(tx),
      "</div>",
    ].join("");
  }

  private renderPayload(tx: TxDocument): string {
    if (tx.kind === "asset_issue") {
      const p = tx.payload as AssetPayload;
      return [
        "<h4>Asset</h4><dl>",
        `<dt>md5</dt><dd>${code(p.md5)}</dd>`,
        `<dt>sha256</dt><dd>${code(p.sha256)}</dd>`,
        `<dt>Source</dt><dd>${escapeHtml(p.sourceUri)}</dd>`,
        `<dt>Processed (ms)</dt><dd>${p.processedTs}</dd>`,
        p.parentMd5 === null
          ? "<dt>Parent</dt><dd>none</dd>"
          : `<dt>Parent</dt><dd>${code(p.parentMd5)}</dd>`,
        "</dl>",
      ].join("");
    }
    if (tx.kind === "permission_set") {
      const p = tx.payload as PermissionPayload;
      return [
        "<h4>Permission change</h4><dl>",
        `<dt>Subject</dt><dd>${escapeHtml(p.subject)}</dd>`,
        `<dt>Permissions</dt><dd>${escapeHtml(p.permissions.join(", "))}</dd>`,
        `<dt>Action</dt><dd>${p.granted ? "grant" : "revoke"}</dd>`,
        `<dt>Issuer</dt><dd>${escapeHtml(p.issuer)}</dd>`,
        "</dl>",
      ].join("");
    }
    const p = tx.payload as NodeEventPayload;
    return [
      "<h4>Node event</h4><dl>",
      `<dt>Action</dt><dd>${escapeHtml(p.action)}</dd>`,
      `<dt>Node</dt><dd>${escapeHtml(p.node)}</dd>`,
      `<dt>Public key</dt><dd>${code(p.pubkey)}</dd>`,
      "</dl>",
    ].join("");
  }
}
