/**
 * Manual anchoring: backend selector, trigger button, outcome notice, and
 * the anchor history table.
 *
 * At most one trigger request is in flight (the button is disabled while
 * pending), and a refusal or failure notice blocks further triggers until
 * the admin acknowledges it — the server's reason is rendered verbatim.
 */

import { ApiRequestError, type PortalClient } from "../api.js";
import type { PortalConfig } from "../config.js";
import { code, escapeHtml, utcTime } from "../format.js";
import type { AnchorDocument } from "../types.js";

export interface AnchorNotice {
  kind: "success" | "refusal" | "failure";
  /** server-provided reason or anchor summary, shown verbatim */
  text: string;
  acknowledged: boolean;
}

export interface AnchorState {
  inFlight: boolean;
  notice: AnchorNotice | null;
  /** "" = server-configured failover order */
  selectedBackend: string;
  history: AnchorDocument[];
  historyError: string | null;
}

export class AnchorController {
  readonly state: AnchorState = {
    inFlight: false,
    notice: null,
    selectedBackend: "",
    history: [],
    historyError: null,
  };

  constructor(
    private readonly client: PortalClient,
    private readonly config: PortalConfig,
  ) {}

  get adminEnabled(): boolean {
    return this.config.adminSecret !== null;
  }

  /** True when a trigger would actually be sent. */
  canTrigger(): boolean {
    if (!this.adminEnabled || this.state.inFlight) {
      return false;
    }
    const notice = this.state.notice;
    return notice === null || notice.acknowledged;
  }

  selectBackend(name: string): void {
    this.state.selectedBackend = name;
  }

  acknowledge(): void {
    if (this.state.notice) {
      this.state.notice = null;
    }
  }

  /** Returns true when a request was sent (regardless of its outcome). */
  async trigger(): Promise<boolean> {
    if (!this.canTrigger()) {
      return false;
    }
    this.state.inFlight = true;
    try {
      const backend =
        this.state.selectedBackend === "" ? null : this.state.selectedBackend;
      const result = await this.client.triggerAnchor(backend);
      this.state.notice = {
        kind: "success",
        text:
          `Anchored private height ${result.anchor.privateHeight} ` +
          `as ${result.anchor.ethTxHash} via ${result.backend}`,
        acknowledged: true, // informational; does not block further triggers
      };
      await this.refreshHistory();
    } catch (exc) {
      if (exc instanceof ApiRequestError) {
        this.state.notice = {
          kind: exc.status === 409 ? "refusal" : "failure",
          text: exc.body?.error ?? exc.message,
          acknowledged: false, // must be read before the next attempt
        };
      } else {
        this.state.notice = {
          kind: "failure",
          text: exc instanceof Error ? exc.message : String(exc),
          acknowledged: false,
        };
      }
    } finally {
      this.state.inFlight = false;
    }
    return true;
  }

  async refreshHistory(): Promise<void> {
    try {
      const page = await this.client.getAnchors();
      this.state.history = page.anchors;
      this.state.historyError = null;
    } catch (exc) {
      this.state.historyError =
        exc instanceof Error ? exc.message : String(exc);
    }
  }

  render(): string {
    return [this.renderForm(), this.renderNotice(), this.renderHistory()].join(
      "\n",
    );
  }

  private renderForm(): string {
    if (!this.adminEnabled) {
      return (
        '<section class="card" data-panel="trigger"><h2>Manual anchor</h2>' +
        '<p class="empty">No admin secret configured — this portal is ' +
        "read-only. Set <code>adminSecret</code> in the portal " +
        "configuration to enable manual anchoring.</p></section>"
      );
    }
    const options = ['<option value="">(configured failover order)</option>'];
    for (const name of this.config.backends) {
      const selected = name === this.state.selectedBackend ? " selected" : "";
      options.push(
        `<option value="${escapeHtml(name)}"${selected}>` +
          `${escapeHtml(name)}</option>`,
      );
    }
    const disabled = this.canTrigger() ? "" : " disabled";
    const label = this.state.inFlight ? "Anchoring…" : "Anchor now";
    return [
      '<section class="card" data-panel="trigger">',
      "<h2>Manual anchor</h2>",
      `<label>Endpoint <select data-action="select-backend">` +
        `${options.join("")}</select></label>`,
      `<button data-action="trigger"${disabled}>${label}</button>`,
      "</section>",
    ].join("");
  }

  private renderNotice(): string {
    const notice = this.state.notice;
    if (notice === null) {
      return "";
    }
    const cls = notice.kind === "success" ? "success" : "error";
    const ack = notice.acknowledged
      ? '<button data-action="dismiss-notice">Dismiss</button>'
      : '<button data-action="acknowledge-notice">Acknowledge</button>';
    return (
      `<div class="banner ${cls}" data-panel="notice" ` +
      `data-kind="${notice.kind}">` +
      `${escapeHtml(notice.text)} ${ack}</div>`
    );
  }

  private renderHistory(): string {
    const parts = ['<section class="card" data-panel="history">'];
    parts.push("<h2>Anchor history</h2>");
    if (this.state.historyError !== null) {
      parts.push(
        `<div class="banner error">History unavailable: ` +
          `${escapeHtml(this.state.historyError)}</div>`,
      );
    }
    if (this.state.history.length === 0) {
      parts.push('<p class="empty">No anchors recorded yet.</p></section>');
      return parts.join("");
    }
    const rows = this.state.history.map((a) => this.historyRow(a));
    parts.push(
      "<table><thead><tr><th>#</th><th>Private height</th>" +
        "<th>Private blockhash</th><th>Public tx</th><th>Backend</th>" +
        "<th>Status</th><th>Anchored at</th></tr></thead>" +
        `<tbody>${rows.join("")}</tbody></table>`,
    );
    parts.push("</section>");
    return parts.join("");
  }

  private historyRow(anchor: AnchorDocument): string {
    const link =
      `<a href="${escapeHtml(anchor.explorerUrl)}" target="_blank" ` +
      `rel="noopener">${code(anchor.ethTxHash)}</a>`;
    return (
      `<tr data-anchor-id="${anchor.id}"><td>${anchor.id}</td>` +
      `<td>${anchor.privateHeight}</td>` +
      `<td>${code(anchor.privateBlockhash)}</td>` +
      `<td>${link}</td>` +
      `<td>${escapeHtml(anchor.backend)}</td>` +
      `<td>${escapeHtml(anchor.status)}</td>` +
      `<td>${escapeHtml(utcTime(anchor.anchoredAt))}</td></tr>`
    );
  }
}
