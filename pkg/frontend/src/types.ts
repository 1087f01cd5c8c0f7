/**
 * Wire types mirroring the node's HTTP API (docs/api.md in the backend
 * repository). Quantities that can exceed 2^53 — confirmations, wei
 * amounts — arrive as decimal strings and must stay strings end to end.
 */

export type EthStatus = "Confirmed" | "Pending" | "NotAnchored";

export interface PublicBackendStatus {
  name: string;
  headHeight: number | null;
  stale: boolean;
}

export interface WalletStatus {
  address: string;
  /** decimal string; absent while the backend is unreachable */
  balanceWei?: string;
  balanceUsd?: number;
  /** decimal string */
  estimatedAnchorCostWei?: string;
  anchorAffordable?: boolean;
}

export interface LastAnchorSummary {
  privateHeight: number;
  privateBlockhash: string;
  ethTxHash: string;
  status: string;
  anchoredAt: number; // epoch seconds
}

export interface StatusDocument {
  privateHeight: number;
  privateTipHash: string;
  difficulty: number;
  peers: number;
  pendingTxs: number;
  publicBackend: PublicBackendStatus | null;
  wallet: WalletStatus | null;
  lastAnchor: LastAnchorSummary | null;
  stale: boolean;
}

/** GET /assets/{md5}: ten keys anchored, eight keys while NotAnchored. */
export interface VerificationDocument {
  asset: string;
  confirmations: string; // decimal string, verbatim
  ethStatus: EthStatus;
  ethTxId?: string;
  issueTxId: string;
  issued: string; // RFC 1123 GMT
  multiChainHash: string;
  sha256: string;
  source: string;
  validated?: string; // RFC 1123 GMT
}

export interface AnchorDocument {
  id: number;
  anchoredAt: number; // epoch seconds
  privateHeight: number;
  privateBlockhash: string;
  ethTxHash: string;
  wallet: string;
  backend: string;
  status: string;
  explorerUrl: string;
}

export interface AnchorPage {
  anchors: AnchorDocument[];
  nextBefore: number | null;
}

export interface BlockDocument {
  height: number;
  hash: string;
  prevHash: string;
  timestamp: number; // epoch seconds
  miner: string;
  nonce: number;
  txRoot: string;
  txIds: string[];
}

export interface AssetPayload {
  md5: string;
  sha256: string;
  sourceUri: string;
  processedTs: number;
  parentMd5: string | null;
}

export interface PermissionPayload {
  subject: string;
  permissions: string[];
  granted: boolean;
  issuer: string;
}

export interface NodeEventPayload {
  action: string;
  node: string;
  pubkey: string;
}

export interface TxDocument {
  txId: string;
  kind: "asset_issue" | "permission_set" | "node_event";
  sender: string;
  createdMs: number;
  blockHeight: number;
  blockHash: string;
  payload: AssetPayload | PermissionPayload | NodeEventPayload;
}

export type ExplorerDocument = BlockDocument | TxDocument;

export function isBlockDocument(doc: ExplorerDocument): doc is BlockDocument {
  return "txIds" in doc;
}

export interface TriggerResult {
  anchor: AnchorDocument;
  backend: string;
}

export interface ApiErrorBody {
  error: string;
  field?: string;
}
