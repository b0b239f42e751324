/**
 * Request loops: newline-delimited JSON over stdio (one response line
 * per request line, in order) and the same protocol as an HTTP POST
 * body. Bad input never crashes a loop; it becomes an ok=false
 * response.
 */
import * as http from "node:http";
import * as readline from "node:readline";
import type { Readable, Writable } from "node:stream";

import { canonicalJson } from "./canonical.js";
import type { MockResponse } from "./mocks.js";

export type Responder = (obj: unknown) => Promise<MockResponse> | MockResponse;

const INVALID_JSON: MockResponse = {
  song_id: "",
  ok: false,
  error: "malformed request: invalid JSON",
};

async function answerLine(line: string, respond: Responder): Promise<MockResponse> {
  let obj: unknown;
  try {
    obj = JSON.parse(line);
  } catch {
    return INVALID_JSON;
  }
  return respond(obj);
}

/** Serve until input closes. Blank lines are skipped. */
export async function serveStdio(
  respond: Responder,
  input: Readable = process.stdin,
  output: Writable = process.stdout,
): Promise<void> {
  const rl = readline.createInterface({ input, crlfDelay: Infinity });
  for await (const line of rl) {
    if (line.trim() === "") continue;
    const resp = await answerLine(line, respond);
    output.write(canonicalJson(resp) + "\n");
  }
}

/**
 * Serve over HTTP; every POST body is one request object. Resolves
 * with the bound port (pass 0 to pick a free one).
 */
export function serveHttp(respond: Responder, port: number): Promise<http.Server> {
  const server = http.createServer((req, res) => {
    if (req.method !== "POST") {
      res.writeHead(405, { "Content-Type": "text/plain" });
      res.end("POST one JSON request per call\n");
      return;
    }
    const chunks: Buffer[] = [];
    req.on("data", (chunk) => chunks.push(chunk));
    req.on("end", async () => {
      const body = Buffer.concat(chunks).toString("utf8");
      const resp = await answerLine(body, respond);
      res.writeHead(200, { "Content-Type": "application/json" });
      res.end(canonicalJson(resp) + "\n");
    });
  });
  return new Promise((resolve, reject) => {
    server.once("error", reject);
    server.listen(port, "127.0.0.1", () => resolve(server));
  });
}
