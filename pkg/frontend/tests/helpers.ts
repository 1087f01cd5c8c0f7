/**
 * Test scaffolding: a recording fake fetch plus response fixtures shaped
 * exactly like the node's HTTP API (decimal-string wei amounts and
 * confirmations included — several exceed 2^53 on purpose, so any float
 * round-trip in the portal would corrupt them and fail the assertions).
 */

import { PortalClient } from "../src/api.js";
import { DEFAULT_CONFIG, type PortalConfig } from "../src/config.js";
import type {
  AnchorDocument,
  BlockDocument,
  StatusDocument,
  TxDocument,
  VerificationDocument,
} from "../src/types.js";

export interface RecordedCall {
  method: string;
  url: string;
  headers: Record<string, string>;
  body: unknown;
}

export type RouteHandler = (call: RecordedCall) => Response | Promise<Response>;

export function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

/** fetch stand-in routed by "METHOD /path"; records every call. */
export function fakeFetch(routes: Record<string, RouteHandler>) {
  const calls: RecordedCall[] = [];
  const fetchFn = async (
    input: string,
    init?: RequestInit,
  ): Promise<Response> => {
    const url = new URL(input);
    const method = init?.method ?? "GET";
    const call: RecordedCall = {
      method,
      url: url.pathname + url.search,
      headers: (init?.headers as Record<string, string>) ?? {},
      body:
        typeof init?.body === "string" ? JSON.parse(init.body) : undefined,
    };
    calls.push(call);
    const handler = routes[`${method} ${url.pathname}`];
    if (!handler) {
      return jsonResponse(404, { error: `no route for ${method} ${url.pathname}` });
    }
    return handler(call);
  };
  return { fetchFn, calls };
}

export function testConfig(overrides?: Partial<PortalConfig>): PortalConfig {
  return {
    ...DEFAULT_CONFIG,
    apiBase: "http://api.test",
    explorerTemplate: "https://exp.test/tx/{tx_hash}",
    backends: ["mock", "sepolia"],
    adminSecret: "portal-secret",
    ...overrides,
  };
}

export function makeClient(
  routes: Record<string, RouteHandler>,
  config?: Partial<PortalConfig>,
) {
  const { fetchFn, calls } = fakeFetch(routes);
  const cfg = testConfig(config);
  return { client: new PortalClient(cfg, fetchFn), calls, config: cfg };
}

// -- fixtures ----------------------------------------------------------------

export const BIG_WEI = "9007199254740993787"; // would corrupt as a double
export const BIG_CONFIRMATIONS = "9007199254740993"; // 2^53 + 1
export const TIP_HASH = "00ab".repeat(16);
export const ETH_TX = "0x" + "9c".repeat(32);

export function statusDoc(
  overrides?: Partial<StatusDocument>,
): StatusDocument {
  return {
    privateHeight: 1043,
    privateTipHash: TIP_HASH,
    difficulty: 4,
    peers: 2,
    pendingTxs: 1,
    publicBackend: { name: "mock", headHeight: 812, stale: false },
    wallet: {
      address: "0x" + "6e".repeat(20),
      balanceWei: BIG_WEI,
      balanceUsd: 247.2,
      estimatedAnchorCostWei: "121688000000000",
      anchorAffordable: true,
    },
    lastAnchor: {
      privateHeight: 1020,
      privateBlockhash: "00be".repeat(16),
      ethTxHash: ETH_TX,
      status: "Confirmed",
      anchoredAt: 1755912000,
    },
    stale: false,
    ...overrides,
  };
}

export function verificationDoc(
  overrides?: Partial<VerificationDocument>,
): VerificationDocument {
  return {
    asset: "ab".repeat(16),
    confirmations: BIG_CONFIRMATIONS,
    ethStatus: "Confirmed",
    ethTxId: ETH_TX,
    issueTxId: "bd".repeat(32),
    issued: "Thu, 22 Feb 2018 16:17:22 GMT",
    multiChainHash: "00a1".repeat(16),
    sha256: "6b".repeat(32),
    source: "ingest.lab-7/imaging/scan-0041.dcm",
    validated: "Thu, 05 Apr 2018 20:09:38 GMT",
    ...overrides,
  };
}

export function anchorDoc(id: number): AnchorDocument {
  return {
    id,
    anchoredAt: 1755912000 + id,
    privateHeight: 1000 + id,
    privateBlockhash: "00be".repeat(16),
    ethTxHash: ETH_TX,
    wallet: "0x" + "6e".repeat(20),
    backend: "mock",
    status: "Submitted",
    explorerUrl: `https://exp.test/tx/${ETH_TX}`,
  };
}

export function blockDoc(overrides?: Partial<BlockDocument>): BlockDocument {
  return {
    height: 7,
    hash: TIP_HASH,
    prevHash: "00cd".repeat(16),
    timestamp: 1755900000,
    miner: "master",
    nonce: 3729,
    txRoot: "ee".repeat(32),
    txIds: ["bd".repeat(32), "be".repeat(32)],
    ...overrides,
  };
}

export function txDoc(overrides?: Partial<TxDocument>): TxDocument {
  return {
    txId: "bd".repeat(32),
    kind: "asset_issue",
    sender: "master",
    createdMs: 1519316242073,
    blockHeight: 7,
    blockHash: TIP_HASH,
    payload: {
      md5: "ab".repeat(16),
      sha256: "6b".repeat(32),
      sourceUri: "ingest.lab-7/imaging/scan-0041.dcm",
      processedTs: 1519316242073,
      parentMd5: null,
    },
    ...overrides,
  };
}
