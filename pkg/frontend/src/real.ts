/**
 * Real mode: route each request to an external per-stage worker that
 * speaks the same newline-delimited JSON protocol, one long-lived
 * subprocess per op. The wrappers stay thin on purpose: model setup
 * (downloads, weights, devices) is the worker's own problem and is
 * documented in the README, never performed here.
 */
import { spawn, type ChildProcessByStdio } from "node:child_process";
import { readFileSync } from "node:fs";
import * as readline from "node:readline";
import type { Readable, Writable } from "node:stream";

import { canonicalJson } from "./canonical.js";
import type { MockResponse } from "./mocks.js";

export interface RealConfig {
  backends: Record<string, { command: string[] }>;
}

export function loadRealConfig(path: string): RealConfig {
  const data = JSON.parse(readFileSync(path, "utf8"));
  if (typeof data !== "object" || data === null || Array.isArray(data)) {
    throw new Error(`${path}: config must be a JSON object`);
  }
  const backends = (data as Record<string, unknown>)["backends"];
  if (typeof backends !== "object" || backends === null) {
    throw new Error(`${path}: "backends" section is required`);
  }
  const out: RealConfig = { backends: {} };
  for (const [op, value] of Object.entries(backends as Record<string, unknown>)) {
    const command = (value as Record<string, unknown> | null)?.["command"];
    if (
      !Array.isArray(command) ||
      command.length === 0 ||
      !command.every((part) => typeof part === "string")
    ) {
      throw new Error(`${path}: backends.${op}.command must be a non-empty string array`);
    }
    out.backends[op] = { command: command as string[] };
  }
  return out;
}

interface Worker {
  proc: ChildProcessByStdio<Writable, Readable, null>;
  lines: AsyncIterator<string>;
  busy: Promise<void>;
}

export class RealRouter {
  private workers = new Map<string, Worker>();

  constructor(private config: RealConfig) {}

  private worker(op: string): Worker {
    let w = this.workers.get(op);
    if (w && w.proc.exitCode === null) return w;
    const command = this.config.backends[op].command;
    const proc = spawn(command[0], command.slice(1), {
      stdio: ["pipe", "pipe", "inherit"],
    });
    const rl = readline.createInterface({ input: proc.stdout, crlfDelay: Infinity });
    w = { proc, lines: rl[Symbol.asyncIterator](), busy: Promise.resolve() };
    this.workers.set(op, w);
    return w;
  }

  /** Forward one request; transport trouble becomes an ok=false response. */
  async respond(obj: unknown): Promise<MockResponse> {
    const songId =
      typeof obj === "object" && obj !== null && typeof (obj as any).song_id === "string"
        ? (obj as any).song_id
        : "";
    const op =
      typeof obj === "object" && obj !== null && typeof (obj as any).op === "string"
        ? (obj as any).op
        : "";
    if (!(op in this.config.backends)) {
      return { song_id: songId, ok: false, error: `no backend configured for op: ${op}` };
    }
    let w: Worker;
    try {
      w = this.worker(op);
    } catch (e) {
      return { song_id: songId, ok: false, error: `cannot start worker: ${e}` };
    }
    // One request in flight per worker, so answers pair up by order.
    const turn = w.busy.then(async (): Promise<MockResponse> => {
      w.proc.stdin.write(canonicalJson(obj) + "\n");
      const { value, done } = await w.lines.next();
      if (done) {
        return { song_id: songId, ok: false, error: "worker terminated" };
      }
      try {
        return JSON.parse(value) as MockResponse;
      } catch {
        return { song_id: songId, ok: false, error: "malformed response from worker" };
      }
    });
    w.busy = turn.then(
      () => undefined,
      () => undefined,
    );
    return turn;
  }

  close(): void {
    for (const w of this.workers.values()) {
      w.proc.stdin.end();
    }
    this.workers.clear();
  }
}
