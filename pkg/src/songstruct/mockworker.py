"""Standalone mock backend worker.

Speaks the backend wire protocol over stdin/stdout: one JSON request per
line in, one JSON response per line out, in order. Useful for exercising
the subprocess transport without any model dependency:

    python -m songstruct.mockworker --seed 7

--fail SONG rejects every request for that song; --fail SONG=OP rejects
only that op. --sleep adds a delay before each response so timeout
handling can be tested. The worker never crashes on bad input; malformed
lines come back as ok=false responses.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .formats import canonical_json
from .pipeline.mocks import handle_request


def _parse_fail_specs(specs: list[str]) -> dict:
    fail: dict = {}
    for spec in specs:
        song, sep, op = spec.partition("=")
        if not song:
            raise ValueError(f"bad --fail spec {spec!r}")
        if not sep:
            fail[song] = None
        elif fail.get(song, ()) is not None:
            fail.setdefault(song, set()).add(op)
    return fail


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="mockworker", description="deterministic mock backend worker"
    )
    parser.add_argument("--seed", type=int, default=0, help="variant selector (default 0)")
    parser.add_argument(
        "--fail",
        action="append",
        default=[],
        metavar="SONG[=OP]",
        help="inject ok=false for a song (optionally one op only); repeatable",
    )
    parser.add_argument(
        "--sleep",
        type=float,
        default=0.0,
        metavar="S",
        help="delay each response by S seconds (timeout testing)",
    )
    args = parser.parse_args(argv)
    try:
        fail = _parse_fail_specs(args.fail)
    except ValueError as e:
        parser.error(str(e))

    for line in sys.stdin:
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            resp = {"song_id": "", "ok": False, "error": "malformed request: invalid JSON"}
        else:
            resp = handle_request(obj, args.seed, fail)
        if args.sleep > 0:
            time.sleep(args.sleep)
        sys.stdout.write(canonical_json(resp) + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
