#!/usr/bin/env node
/**
 * Worker entry point.
 *
 *   songstruct-adapter --mode mock --seed 7
 *   songstruct-adapter --mode mock --seed 7 --fail s2 --fail s3=align
 *   songstruct-adapter --mode real --config backends.json
 *   songstruct-adapter --mode mock --http 0        (port printed on stderr)
 *
 * Without --http the worker reads requests from stdin and answers on
 * stdout, one line each, in order.
 */
import { parseArgs } from "node:util";
import { pathToFileURL } from "node:url";

import { handleRequest, type FailMap, type MockResponse } from "./mocks.js";
import { loadRealConfig, RealRouter } from "./real.js";
import { serveHttp, serveStdio, type Responder } from "./server.js";

export function parseFailSpecs(specs: string[]): FailMap {
  const fail: FailMap = new Map();
  for (const spec of specs) {
    const eq = spec.indexOf("=");
    const song = eq === -1 ? spec : spec.slice(0, eq);
    if (song === "") throw new Error(`bad --fail spec "${spec}"`);
    if (eq === -1) {
      fail.set(song, null);
    } else if (fail.get(song) !== null) {
      const ops = fail.get(song) ?? new Set<string>();
      ops.add(spec.slice(eq + 1));
      fail.set(song, ops);
    }
  }
  return fail;
}

async function main(argv: string[]): Promise<number> {
  let args;
  try {
    args = parseArgs({
      args: argv,
      options: {
        mode: { type: "string" },
        seed: { type: "string", default: "0" },
        fail: { type: "string", multiple: true, default: [] },
        config: { type: "string" },
        http: { type: "string" },
      },
      allowPositionals: false,
    });
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    return 1;
  }
  const { mode, seed, fail, config, http } = args.values;

  if (mode !== "mock" && mode !== "real") {
    console.error('error: --mode must be "mock" or "real"');
    return 1;
  }

  let respond: Responder;
  let cleanup = () => {};
  if (mode === "mock") {
    const seedNum = Number(seed);
    if (!Number.isInteger(seedNum)) {
      console.error(`error: --seed must be an integer, got "${seed}"`);
      return 1;
    }
    let failMap: FailMap;
    try {
      failMap = parseFailSpecs(fail ?? []);
    } catch (e) {
      console.error(`error: ${(e as Error).message}`);
      return 1;
    }
    respond = (obj): MockResponse => handleRequest(obj, seedNum, failMap);
  } else {
    if (!config) {
      console.error("error: --mode real requires --config");
      return 1;
    }
    let router: RealRouter;
    try {
      router = new RealRouter(loadRealConfig(config));
    } catch (e) {
      console.error(`error: ${(e as Error).message}`);
      return 1;
    }
    respond = (obj) => router.respond(obj);
    cleanup = () => router.close();
  }

  if (http !== undefined) {
    const port = Number(http);
    if (!Number.isInteger(port) || port < 0 || port > 65535) {
      console.error(`error: --http must be a port number, got "${http}"`);
      return 1;
    }
    const server = await serveHttp(respond, port);
    const address = server.address();
    const bound = typeof address === "object" && address !== null ? address.port : port;
    console.error(`listening on http://127.0.0.1:${bound}`);
    await new Promise((resolve) => server.once("close", resolve));
    cleanup();
    return 0;
  }

  await serveStdio(respond);
  cleanup();
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url === pathToFileURL(process.argv[1]).href;
if (invokedDirectly) {
  main(process.argv.slice(2)).then(
    (code) => process.exit(code),
    (e) => {
      console.error(`error: ${e}`);
      process.exit(1);
    },
  );
}
