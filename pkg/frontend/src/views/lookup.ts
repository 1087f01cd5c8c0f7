/**
 * Asset lookup: md5 in, verification document out.
 *
 * Input is validated inline — anything that is not exactly 32 lowercase
 * hex characters produces a validation message and sends no request.
 * Confirmations and hashes from the response are rendered verbatim.
 */

import { ApiRequestError, type PortalClient } from "../api.js";
import { explorerLink, type PortalConfig } from "../config.js";
import { code, escapeHtml } from "../format.js";
import type { VerificationDocument } from "../types.js";

const MD5_RE = /^[0-9a-f]{32}$/;

export function validateMd5(input: string): string | null {
  const value = input.trim();
  if (value === "") {
    return "Enter an md5 hash.";
  }
  if (!MD5_RE.test(value)) {
    return (
      "An md5 hash is exactly 32 lowercase hex characters " +
      `(got ${value.length}).`
    );
  }
  return null;
}

export interface LookupState {
  input: string;
  validationError: string | null;
  document: VerificationDocument | null;
  /** md5 that was looked up and not found */
  notFound: string | null;
  error: string | null;
  loading: boolean;
}

export class LookupController {
  readonly state: LookupState = {
    input: "",
    validationError: null,
    document: null,
    notFound: null,
    error: null,
    loading: false,
  };

  constructor(
    private readonly client: PortalClient,
    private readonly config: PortalConfig,
  ) {}

  setInput(value: string): void {
    this.state.input = value;
    this.state.validationError = null;
  }

  /** Returns true when a request was sent. */
  async submit(): Promise<boolean> {
    const problem = validateMd5(this.state.input);
    this.state.validationError = problem;
    if (problem !== null) {
      return false; // invalid input never reaches the network
    }
    const md5 = this.state.input.trim();
    this.state.loading = true;
    this.state.document = null;
    this.state.notFound = null;
    this.state.error = null;
    try {
      this.state.document = await this.client.getAsset(md5);
    } catch (exc) {
      if (exc instanceof ApiRequestError && exc.status === 404) {
        this.state.notFound = md5;
      } else {
        this.state.error = exc instanceof Error ? exc.message : String(exc);
      }
    } finally {
      this.state.loading = false;
    }
    return true;
  }

  render(): string {
    const parts = ['<section class="card" data-panel="lookup">'];
    parts.push("<h2>Asset lookup</h2>");
    parts.push(
      `<form data-action="lookup"><input type="text" name="md5" ` +
        `placeholder="md5 hash (32 hex chars)" ` +
        `value="${escapeHtml(this.state.input)}" spellcheck="false">` +
        `<button${this.state.loading ? " disabled" : ""}>Verify</button></form>`,
    );
    if (this.state.validationError !== null) {
      parts.push(
        `<p class="validation">${escapeHtml(this.state.validationError)}</p>`,
      );
    }
    if (this.state.error !== null) {
      parts.push(
        `<div class="banner error">Lookup failed: ` +
          `${escapeHtml(this.state.error)}</div>`,
      );
    }
    if (this.state.notFound !== null) {
      parts.push(
        `<p class="empty">No asset with md5 ${code(this.state.notFound)} ` +
          "is on the chain. It may not have been submitted, or its " +
          "transaction has not been mined yet.</p>",
      );
    }
    if (this.state.document !== null) {
      parts.push(this.renderDocument(this.state.document));
    }
    parts.push("</section>");
    return parts.join("\n");
  }

  private renderDocument(doc: VerificationDocument): string {
    const rows = [
      `<dt>Asset (md5)</dt><dd>${code(doc.asset)}</dd>`,
      `<dt>sha256</dt><dd>${code(doc.sha256)}</dd>`,
      `<dt>Source</dt><dd>${escapeHtml(doc.source)}</dd>`,
      `<dt>Issued</dt><dd>${escapeHtml(doc.issued)}</dd>`,
      `<dt>Issue tx</dt><dd>` +
        `<a data-selector="${escapeHtml(doc.issueTxId)}" href="#explorer">` +
        `${code(doc.issueTxId)}</a></dd>`,
      `<dt>Block hash</dt><dd>${code(doc.multiChainHash)}</dd>`,
      `<dt>Anchor status</dt><dd><span class="badge ` +
        `${doc.ethStatus.toLowerCase()}">${escapeHtml(doc.ethStatus)}</span></dd>`,
      `<dt>Confirmations</dt><dd data-field="confirmations">` +
        `${escapeHtml(doc.confirmations)}</dd>`,
    ];
    if (doc.ethTxId !== undefined) {
      const href = explorerLink(this.config.explorerTemplate, doc.ethTxId);
      rows.push(
        `<dt>Public tx</dt><dd><a href="${escapeHtml(href)}" ` +
          `target="_blank" rel="noopener">${code(doc.ethTxId)}</a></dd>`,
      );
    }
    if (doc.validated !== undefined) {
      rows.push(`<dt>Validated</dt><dd>${escapeHtml(doc.validated)}</dd>`);
    }
    return `<dl data-panel="verification">${rows.join("")}</dl>`;
  }
}
