"""Command-line interface.

Exit codes: 0 on success (including per-song pipeline failures, which
live in the manifest), 1 on usage or input errors, 2 when evaluation
references are missing.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .errors import InvalidInput, MissingGold, SongstructError
from .formats import (
    dump_gold,
    dump_manifest,
    load_gold_annotation,
    load_manifest,
    parse_structured_lyrics,
    serialize_structured_lyrics,
)
from .pipeline.config import load_config
from .pipeline.evaluation import evaluate, format_report
from .pipeline.runner import load_inputs, run_pipeline
from .repair import FixStatus, filter_dataset, fix_lyrics
from .textmetrics import wer
from .timemetrics import der

# CLI language flags name languages; the tokenizer wants a regime.
HINT_BY_LANGUAGE = {"zh": "cjk", "en": "latin", "auto": "auto"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse reserves exit code 2 for usage errors; this CLI uses 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as f:
        return f.read()


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    inputs = load_inputs(_read(args.input))
    entries = run_pipeline(cfg, inputs)
    counts = {"ok": 0, "rejected": 0, "failed": 0}
    for entry in entries:
        counts[entry.status] += 1
    print(
        f"processed {len(entries)} songs: {counts['ok']} ok,"
        f" {counts['rejected']} rejected, {counts['failed']} failed"
    )
    for entry in entries:
        if entry.status != "ok":
            print(f"  {entry.song_id}: {entry.status} ({entry.reject_reason})")
    print(f"manifest: {cfg.output_dir}/manifest.jsonl")
    return 0


def _cmd_eval(args) -> int:
    report = evaluate(
        args.hyp,
        args.gold,
        collar_s=args.collar,
        score_silence=not args.no_score_silence,
    )
    sys.stdout.write(format_report(report))
    if args.json:
        if args.json == "-":
            sys.stdout.write(report.to_json())
        else:
            with open(args.json, "w", encoding="utf-8") as f:
                f.write(report.to_json())
    return 0


def _cmd_parse(args) -> int:
    ann = parse_structured_lyrics(_read(args.file))
    if not ann.segments:
        raise InvalidInput(f"{args.file}: no segments")
    stem = args.file.rsplit("/", 1)[-1]
    stem = stem[: -len(".txt")] if stem.endswith(".txt") else stem
    ann = replace(ann, song_id=stem, duration_s=ann.segments[-1].end_s)
    sys.stdout.write(dump_gold(ann))
    return 0


def _cmd_serialize(args) -> int:
    ann = load_gold_annotation(_read(args.file))
    sys.stdout.write(serialize_structured_lyrics(ann))
    return 0


def _cmd_wer(args) -> int:
    report = wer(_read(args.ref), _read(args.hyp), HINT_BY_LANGUAGE[args.hint])
    print(
        f"wer {report.wer:.6f} (S={report.substitutions} D={report.deletions}"
        f" I={report.insertions} N={report.ref_len})"
    )
    return 0


def _cmd_der(args) -> int:
    ref = load_gold_annotation(_read(args.ref))
    if args.duration is not None:
        ref = replace(ref, duration_s=args.duration)
    hyp = parse_structured_lyrics(_read(args.hyp), song_id=ref.song_id)
    report = der(ref, hyp, collar_s=args.collar, score_silence=not args.no_score_silence)
    print(
        f"der {report.der:.6f} (mismatch {report.mismatch_s:.3f}s"
        f" / {report.total_s:.3f}s, collar {args.collar}s)"
    )
    return 0


def _cmd_fix(args) -> int:
    outcome = fix_lyrics(
        _read(args.ref),
        _read(args.hyp),
        hint=HINT_BY_LANGUAGE[args.hint],
        reject_threshold=args.threshold,
    )
    if outcome.status is FixStatus.FIXED:
        print(outcome.fixed_text)
    else:
        print(
            f"rejected: wer {outcome.wer_ref_vs_hyp} >= threshold {args.threshold}",
            file=sys.stderr,
        )
    return 0


def _cmd_filter(args) -> int:
    entries = load_manifest(_read(args.manifest))
    kept, dropped = filter_dataset(entries, args.max_wer)
    sys.stdout.write(dump_manifest(kept))
    print(f"kept {len(kept)} dropped {len(dropped)}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="songstruct", description="structured-lyrics corpus tooling")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="process a corpus through the pipeline")
    p.add_argument("--config", required=True, help="YAML pipeline config")
    p.add_argument("--input", required=True, help="JSONL of {song_id, audio_path, reference_lyrics?}")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("eval", help="score hypotheses against gold annotations")
    p.add_argument("--hyp", required=True, help="manifest file or directory of {song_id}.txt")
    p.add_argument("--gold", required=True, help="directory of {song_id}.json gold files")
    p.add_argument("--collar", type=float, default=0.0, help="seconds ignored around reference boundaries")
    p.add_argument("--no-score-silence", action="store_true", help="exclude reference silence from DER")
    p.add_argument("--json", metavar="PATH", help="also write the JSON report (- for stdout)")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("parse", help="structured-lyrics text -> gold-style JSON on stdout")
    p.add_argument("file")
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("serialize", help="gold JSON -> structured-lyrics text on stdout")
    p.add_argument("file")
    p.set_defaults(func=_cmd_serialize)

    p = sub.add_parser("wer", help="word error rate between two text files")
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--hint", choices=sorted(HINT_BY_LANGUAGE), default="auto")
    p.set_defaults(func=_cmd_wer)

    p = sub.add_parser("der", help="diarization error rate of a lyrics file against gold")
    p.add_argument("--ref", required=True, help="gold annotation JSON")
    p.add_argument("--hyp", required=True, help="structured-lyrics text file")
    p.add_argument("--duration", type=float, help="override the gold duration (seconds)")
    p.add_argument("--collar", type=float, default=0.0)
    p.add_argument("--no-score-silence", action="store_true")
    p.set_defaults(func=_cmd_der)

    p = sub.add_parser("fix", help="repair a hypothesis transcript with reference lyrics")
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--threshold", type=float, default=0.7, help="reject at this WER and above")
    p.add_argument("--hint", choices=sorted(HINT_BY_LANGUAGE), default="auto")
    p.set_defaults(func=_cmd_fix)

    p = sub.add_parser("filter", help="keep manifest entries below a WER estimate")
    p.add_argument("--manifest", required=True)
    p.add_argument("--max-wer", type=float, required=True, help="strict upper bound")
    p.set_defaults(func=_cmd_filter)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except MissingGold as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SongstructError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        name = getattr(e, "filename", None)
        detail = e.strerror or str(e)
        print(f"error: {detail}" + (f": {name}" if name else ""), file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
