/**
 * Canonical JSON: sorted keys, no whitespace, UTF-8 kept literal.
 * Matches what the pipeline writes, so responses can be compared
 * byte-for-byte across implementations.
 */
export function canonicalJson(value: unknown): string {
  if (value === null || typeof value !== "object") {
    return JSON.stringify(value);
  }
  if (Array.isArray(value)) {
    return "[" + value.map(canonicalJson).join(",") + "]";
  }
  const obj = value as Record<string, unknown>;
  const parts = Object.keys(obj)
    .sort()
    .filter((key) => obj[key] !== undefined)
    .map((key) => JSON.stringify(key) + ":" + canonicalJson(obj[key]));
  return "{" + parts.join(",") + "}";
}
