/**
 * Typed client for the node's HTTP API.
 *
 * Every request is appended to `requestLog` — tests use it to assert the
 * portal's read/write separation (the only non-GET the portal ever sends
 * is the manual-anchor trigger).
 */

import type { PortalConfig } from "./config.js";
import type {
  AnchorPage,
  ApiErrorBody,
  ExplorerDocument,
  StatusDocument,
  TriggerResult,
  VerificationDocument,
} from "./types.js";

export interface RequestLogEntry {
  method: string;
  path: string;
}

export class ApiRequestError extends Error {
  readonly status: number;
  readonly body: ApiErrorBody | null;

  constructor(status: number, body: ApiErrorBody | null) {
    super(body?.error ?? `request failed with status ${status}`);
    this.name = "ApiRequestError";
    this.status = status;
    this.body = body;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class PortalClient {
  readonly requestLog: RequestLogEntry[] = [];
  private readonly config: PortalConfig;
  private readonly fetchFn: FetchLike;

  constructor(config: PortalConfig, fetchFn?: FetchLike) {
    this.config = config;
    // bind: browsers reject fetch called without its Window receiver
    this.fetchFn = fetchFn ?? globalThis.fetch.bind(globalThis);
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    headers?: Record<string, string>,
  ): Promise<T> {
    this.requestLog.push({ method, path });
    const init: RequestInit = { method, headers: { ...headers } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
      (init.headers as Record<string, string>)["Content-Type"] =
        "application/json";
    }
    const response = await this.fetchFn(this.config.apiBase + path, init);
    const payload = await response.json().catch(() => null);
    if (!response.ok) {
      throw new ApiRequestError(response.status, payload as ApiErrorBody);
    }
    return payload as T;
  }

  getStatus(): Promise<StatusDocument> {
    return this.request("GET", "/status");
  }

  getAsset(md5: string): Promise<VerificationDocument> {
    return this.request("GET", `/assets/${md5}`);
  }

  getAnchors(limit = 20, before?: number): Promise<AnchorPage> {
    const query = before === undefined ? "" : `&before=${before}`;
    return this.request("GET", `/anchors?limit=${limit}${query}`);
  }

  getExplorer(selector: string): Promise<ExplorerDocument> {
    return this.request("GET", `/explorer/${encodeURIComponent(selector)}`);
  }

  /** The portal's one write. `backend` null = server-configured failover order. */
  triggerAnchor(backend: string | null): Promise<TriggerResult> {
    const headers: Record<string, string> = {};
    if (this.config.adminSecret) {
      headers["X-Admin-Secret"] = this.config.adminSecret;
    }
    const body = backend === null ? {} : { backend };
    return this.request("POST", "/anchors/trigger", body, headers);
  }
}
