/**
 * Deterministic mock backends, output-identical to the pipeline's
 * built-in ones. Everything is a pure function of
 * (op, song_id, span, text, seed) through four derivation rules:
 *
 *   h32(key)   first 4 bytes of SHA-256(UTF-8 key), big-endian unsigned
 *   tenths(x)  trunc(x * 10 + 0.5)
 *   bump(t)    t + 1 when t is a whole-second tick, so emitted times
 *              are never integral (and never collide with 7.0-vs-7
 *              formatting differences between JSON writers)
 *   sec(t)     0 when t == 0, else t / 10
 *
 * Bit shifts and floor divisions are done with Math.floor on doubles:
 * h32 values exceed 2^31, where the native >> operator would go signed.
 */
import { createHash } from "node:crypto";

export interface MockResponse {
  song_id: string;
  ok: boolean;
  payload?: Record<string, unknown>;
  error?: string;
}

/** song_id -> ops to reject, or null to reject every op for the song. */
export type FailMap = Map<string, Set<string> | null>;

const STEM_NAMES = ["bass", "drums", "other", "vocals"] as const;

const LEGACY_SECTION_CYCLE = ["verse", "chorus", "solo", "verse", "bridge"] as const;

const BASE_WORDS = [
  "shine", "river", "echo", "night", "fire", "golden",
  "memory", "falling", "summer", "stone", "wonder", "home",
] as const;

const ALT_WORDS = [
  "la", "oh", "yeah", "baby", "time", "light",
  "heart", "dream", "road", "rain", "sky", "sound",
] as const;

export function h32(key: string): number {
  return createHash("sha256").update(key, "utf8").digest().readUInt32BE(0);
}

export function tenths(x: number): number {
  return Math.trunc(x * 10 + 0.5);
}

const shr = (h: number, bits: number): number => Math.floor(h / 2 ** bits);

const floorDiv = (a: number, b: number): number => Math.floor(a / b);

const bump = (t: number): number => (t % 10 === 0 ? t + 1 : t);

const sec = (t: number): number => (t === 0 ? 0 : t / 10);

export function mockSeparate(audioPath: string): Record<string, unknown> {
  const stems: Record<string, string> = {};
  for (const name of STEM_NAMES) stems[name] = audioPath;
  return { stems };
}

export function mockStructure(songId: string, seed: number): Record<string, unknown> {
  const h = h32(`${seed}:structure:${songId}`);
  const t1 = 12 + (h % 7);
  const n = 3 + (shr(h, 8) % 3);
  const segments: Record<string, unknown>[] = [
    { label: "start", start_s: sec(0), end_s: sec(t1) },
  ];
  let cur = t1;
  for (let i = 0; i < n; i++) {
    const length = 180 + (shr(h, 3 * i) % 160);
    const end = bump(cur + length);
    segments.push({ label: LEGACY_SECTION_CYCLE[i], start_s: sec(cur), end_s: sec(end) });
    cur = end;
  }
  const close = bump(cur + 95);
  segments.push({ label: "end", start_s: sec(cur), end_s: sec(close) });
  return { segments };
}

function spanTenths(span: readonly number[] | null): [number, number] {
  if (!span || span.length === 0) return [0, 0];
  return [tenths(span[0]), tenths(span[1])];
}

export function mockTranscribe(
  songId: string,
  span: readonly number[] | null,
  seed: number,
): Record<string, unknown> {
  const [ts, te] = spanTenths(span);
  const base = h32(`words:${songId}:${ts}:${te}`);
  const n = 6 + (base % 7);
  const words: string[] = [];
  for (let i = 0; i < n; i++) {
    let word: string = BASE_WORDS[(base * (i + 1)) % 12];
    const hs = h32(`${seed}:sub:${songId}:${ts}:${te}:${i}`);
    if (hs % 8 === 0) word = ALT_WORDS[hs % 12];
    words.push(word);
  }
  return { text: words.join(" ") };
}

export function mockAlign(
  songId: string,
  span: readonly number[] | null,
  text: string,
  seed: number,
): Record<string, unknown> {
  const [ts, te] = spanTenths(span);
  const words = text.split(/\s+/).filter((w) => w.length > 0);
  const n = words.length;
  const avail = te - ts;
  if (n === 0 || avail < 3 * n) return { words: [] };
  const h = h32(`${seed}:align:${songId}:${ts}:${te}`);
  let lead = (h % 3) * 25;
  let tail = (shr(h, 4) % 2) * 23;
  if (floorDiv(avail - lead - tail, n) < 8) {
    lead = 0;
    tail = 0;
  }
  const slot = floorDiv(avail - lead - tail, n);
  const wlen = Math.max(1, Math.min(floorDiv(slot * 3, 4), slot - 2));
  const out: Record<string, unknown>[] = [];
  for (let k = 0; k < n; k++) {
    const start = bump(ts + lead + k * slot);
    const end = bump(start + wlen);
    const score = (100 + (h32(`${seed}:score:${songId}:${ts}:${te}:${k}`) % 899)) / 1000;
    out.push({ word: words[k], start_s: sec(start), end_s: sec(end), score });
  }
  return { words: out };
}

function failure(songId: string, message: string): MockResponse {
  return { song_id: songId, ok: false, error: message };
}

/**
 * Answer one decoded request object. Malformed requests never throw;
 * they come back as ok=false responses with the same error strings the
 * pipeline's built-in mocks use. A JSON null field is treated exactly
 * like an absent one.
 */
export function handleRequest(
  obj: unknown,
  seed: number,
  fail?: FailMap,
): MockResponse {
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    return failure("", "malformed request: not an object");
  }
  const req = obj as Record<string, unknown>;
  const songId = req["song_id"];
  if (typeof songId !== "string") {
    return failure("", "malformed request: missing song_id");
  }
  const op = req["op"];
  if (typeof op !== "string") {
    return failure(songId, "malformed request: missing op");
  }
  const audioPath = req["audio_path"];
  if (typeof audioPath !== "string") {
    return failure(songId, "malformed request: missing audio_path");
  }
  const span = req["span"] ?? null;
  const spanBad =
    span !== null &&
    (!Array.isArray(span) ||
      span.length !== 2 ||
      !span.every((v) => typeof v === "number"));
  if (spanBad || (span === null && (op === "transcribe" || op === "align"))) {
    return failure(songId, "malformed request: bad span");
  }
  const text = req["text"] ?? null;
  if (typeof text !== "string" && (text !== null || op === "align")) {
    return failure(songId, "malformed request: bad text");
  }

  if (fail && fail.has(songId)) {
    const ops = fail.get(songId) ?? null;
    if (ops === null || ops.has(op)) {
      return failure(songId, `injected failure for ${op}`);
    }
  }

  let payload: Record<string, unknown>;
  if (op === "separate") {
    payload = mockSeparate(audioPath);
  } else if (op === "structure") {
    payload = mockStructure(songId, seed);
  } else if (op === "transcribe") {
    payload = mockTranscribe(songId, span as number[] | null, seed);
  } else if (op === "align") {
    payload = mockAlign(songId, span as number[] | null, text as string, seed);
  } else {
    return failure(songId, `unknown op: ${op}`);
  }
  return { song_id: songId, ok: true, payload };
}
