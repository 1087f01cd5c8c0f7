/**
 * Display helpers. Wei amounts and confirmation counts arrive as decimal
 * strings and may exceed 2^53, so everything here is string arithmetic —
 * no value ever round-trips through a float.
 */

const WEI_DIGITS = 18;

/** "412000000000000000" → "0.412"; exact decimal-point insertion. */
export function weiToEther(wei: string): string {
  if (!/^\d+$/.test(wei)) {
    return wei; // not a decimal string; show what the server sent
  }
  const padded = wei.padStart(WEI_DIGITS + 1, "0");
  const whole = padded.slice(0, padded.length - WEI_DIGITS);
  const frac = padded.slice(padded.length - WEI_DIGITS).replace(/0+$/, "");
  return frac ? `${whole}.${frac}` : whole;
}

/** Epoch seconds → the RFC-1123-style GMT string the API uses elsewhere. */
export function utcTime(epochSeconds: number): string {
  return new Date(epochSeconds * 1000).toUTCString();
}

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

/** Escaped `<code>` span for hashes and ids — always the full value. */
export function code(value: string): string {
  return `<code>${escapeHtml(value)}</code>`;
}
