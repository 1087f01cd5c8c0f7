/**
 * Portal configuration. Served as static assets, the portal takes its
 * runtime settings from `window.__PORTAL_CONFIG__` (set by the deployer in
 * index.html or an injected script); anything omitted falls back to the
 * defaults below.
 *
 * `adminSecret` is a static shared secret sent as the `X-Admin-Secret`
 * header on manual-anchor requests, for a fronting proxy to check. This is
 * a minimal deploy-time gate, NOT production-grade authentication — there
 * is no user management and the secret is visible to anyone who can read
 * the deployed configuration. Leave it null to run the portal read-only.
 */

export interface PortalConfig {
  /** base URL of the node's HTTP API */
  apiBase: string;
  /** dashboard / history poll interval, milliseconds */
  pollMs: number;
  /** hyperlink template for public-chain transactions; `{tx_hash}` placeholder */
  explorerTemplate: string;
  /** backend names offered in the manual-anchor selector (configured endpoints only) */
  backends: string[];
  /** shared secret enabling the manual-anchor action; null = read-only portal */
  adminSecret: string | null;
  /** daily anchor fire time (UTC), displayed read-only; edited via server configuration */
  fireTime: string;
}

export const DEFAULT_CONFIG: PortalConfig = {
  apiBase: "http://127.0.0.1:8440",
  pollMs: 5000,
  explorerTemplate: "https://etherscan.io/tx/{tx_hash}",
  backends: ["mock"],
  adminSecret: null,
  fireTime: "02:00",
};

declare global {
  interface Window {
    __PORTAL_CONFIG__?: Partial<PortalConfig>;
  }
}

export function loadConfig(overrides?: Partial<PortalConfig>): PortalConfig {
  const injected =
    typeof window !== "undefined" ? window.__PORTAL_CONFIG__ : undefined;
  return { ...DEFAULT_CONFIG, ...injected, ...overrides };
}

/** Render the explorer hyperlink for a public-chain transaction hash. */
export function explorerLink(template: string, txHash: string): string {
  return template.replaceAll("{tx_hash}", txHash);
}
