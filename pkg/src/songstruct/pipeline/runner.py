"""Corpus runner: drives every song through the stage sequence.

Per song: separate the mix into stems, run structure analysis on the
original mix, remap and normalize the timeline, transcribe each vocal
section from the vocal stem, repair or arbitrate the transcript, spread
the final text back over the sections, align words, calibrate section
boundaries against them, and serialize. Failures are recorded per song
and never abort the corpus.
"""

from __future__ import annotations

import json
import logging
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from ..errors import SchemaError, SongstructError
from ..formats import dump_manifest, serialize_structured_lyrics
from ..model import (
    ManifestEntry,
    RawSegment,
    Segment,
    SongAnnotation,
    WordAlignment,
)
from ..repair import FixStatus, detokenize, dual_head_arbitrate, fix_lyrics
from ..textmetrics import tokenize
from ..timeline import calibrate_boundaries, normalize_timeline, remap_labels, select_vocal_sections
from .config import PipelineConfig
from .protocol import BackendRequest, BackendResponse, open_transport

log = logging.getLogger(__name__)

_SAFE_SONG_ID = re.compile(r"[A-Za-z0-9._-]+$")


@dataclass(frozen=True)
class SongInput:
    """One corpus item: an id, its audio, optional scraped lyrics."""

    song_id: str
    audio_path: str
    reference_lyrics: str | None = None


def load_inputs(text: str) -> list[SongInput]:
    """Parse the run input JSONL: {song_id, audio_path, reference_lyrics?}."""
    inputs: list[SongInput] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.split("\n"), start=1):
        if not raw.strip():
            continue
        where = f"line {lineno}"
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{where}: invalid JSON: {e.msg}") from None
        if not isinstance(obj, dict):
            raise SchemaError(f"{where}: expected object")
        song_id = obj.get("song_id")
        audio_path = obj.get("audio_path")
        if not isinstance(song_id, str) or not song_id:
            raise SchemaError(f"{where}: song_id must be a non-empty string")
        if not isinstance(audio_path, str) or not audio_path:
            raise SchemaError(f"{where}: audio_path must be a non-empty string")
        reference = obj.get("reference_lyrics")
        if reference is not None and not isinstance(reference, str):
            raise SchemaError(f"{where}: reference_lyrics must be a string")
        if song_id in seen:
            raise SchemaError(f"{where}: duplicate song_id {song_id!r}")
        seen.add(song_id)
        inputs.append(SongInput(song_id=song_id, audio_path=audio_path, reference_lyrics=reference))
    return inputs


class _StageFailure(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.message = message


def _call(transport, req: BackendRequest, stage: str) -> BackendResponse:
    resp = transport.request(req)
    if not resp.ok:
        raise _StageFailure(stage, resp.error or "backend error")
    return resp


def _require_payload(resp: BackendResponse, key: str, kind: type, stage: str):
    value = (resp.payload or {}).get(key)
    if not isinstance(value, kind):
        raise _StageFailure(stage, f"payload missing {key!r}")
    return value


def _raw_segments(payload_segments: list, stage: str) -> list[RawSegment]:
    out: list[RawSegment] = []
    for i, item in enumerate(payload_segments):
        if not isinstance(item, dict):
            raise _StageFailure(stage, f"segments[{i}] is not an object")
        label = item.get("label")
        start_s = item.get("start_s")
        end_s = item.get("end_s")
        if (
            not isinstance(label, str)
            or not isinstance(start_s, (int, float))
            or not isinstance(end_s, (int, float))
            or isinstance(start_s, bool)
            or isinstance(end_s, bool)
        ):
            raise _StageFailure(stage, f"segments[{i}] has bad fields")
        out.append(RawSegment(label=label, start_s=float(start_s), end_s=float(end_s)))
    return out


def _parse_words(payload_words: list, stage: str) -> list[WordAlignment]:
    out: list[WordAlignment] = []
    for i, item in enumerate(payload_words):
        if not isinstance(item, dict):
            raise _StageFailure(stage, f"words[{i}] is not an object")
        word = item.get("word")
        start_s = item.get("start_s")
        end_s = item.get("end_s")
        score = item.get("score", 1.0)
        if (
            not isinstance(word, str)
            or not isinstance(start_s, (int, float))
            or not isinstance(end_s, (int, float))
            or not isinstance(score, (int, float))
        ):
            raise _StageFailure(stage, f"words[{i}] has bad fields")
        out.append(
            WordAlignment(word=word, start_s=float(start_s), end_s=float(end_s), score=float(score))
        )
    return out


def _redistribute(final_text: str, section_texts: list[str], hint: str = "auto") -> list[str]:
    """Spread the repaired transcript back over sections.

    The repaired text has exactly as many tokens as the hypothesis it was
    aligned to (token-count law of the fix), so slicing by each section's
    own hypothesis token count is exact.
    """
    final_tokens = list(tokenize(final_text, hint).tokens)
    out: list[str] = []
    pos = 0
    for text in section_texts:
        n = len(tokenize(text, hint).tokens)
        out.append(detokenize(final_tokens[pos : pos + n]))
        pos += n
    return out


def _process_song(song: SongInput, cfg: PipelineConfig, transports: dict) -> tuple[ManifestEntry, str | None]:
    """Run one song through every stage; returns (entry, serialized text)."""
    timings: dict[str, float] = {}
    stage_outputs: dict = {}

    def failed(stage: str, message: str) -> tuple[ManifestEntry, None]:
        log.warning("song %s failed at %s: %s", song.song_id, stage, message)
        return (
            ManifestEntry(
                song_id=song.song_id,
                audio_path=song.audio_path,
                stage_outputs=stage_outputs,
                wer_estimate=None,
                cross_wer=None,
                timings_s=timings,
                status="failed",
                reject_reason=f"{stage}: {message}",
            ),
            None,
        )

    if not _SAFE_SONG_ID.fullmatch(song.song_id):
        return failed("input", f"song_id {song.song_id!r} is not filesystem-safe")
    if not os.path.exists(song.audio_path):
        return failed("input", f"audio path not found: {song.audio_path}")

    try:
        t0 = time.perf_counter()
        resp = _call(
            transports["separate"][0],
            BackendRequest(op="separate", song_id=song.song_id, audio_path=song.audio_path),
            "separate",
        )
        timings["separate"] = time.perf_counter() - t0
        stems = _require_payload(resp, "stems", dict, "separate")
        vocal_stem = stems.get("vocals")
        if not isinstance(vocal_stem, str):
            raise _StageFailure("separate", "no vocals stem")
        stage_outputs["separate"] = stems

        # Structure analysis sees the original mix: it is the exact
        # reassembly of the stems with no separation artifacts.
        t0 = time.perf_counter()
        resp = _call(
            transports["structure"][0],
            BackendRequest(op="structure", song_id=song.song_id, audio_path=song.audio_path),
            "structure",
        )
        timings["structure"] = time.perf_counter() - t0
        raw = _raw_segments(_require_payload(resp, "segments", list, "structure"), "structure")
        if not raw:
            raise _StageFailure("structure", "empty segmentation")

        t0 = time.perf_counter()
        try:
            remapped = remap_labels(raw, cfg.label_mapping)
            duration_s = max(seg.end_s for seg in remapped)
            if duration_s <= 0:
                raise _StageFailure("structure", "segmentation has no positive extent")
            ann = normalize_timeline(remapped, duration_s, song_id=song.song_id)
        except SongstructError as e:
            raise _StageFailure("structure", str(e)) from None
        stage_outputs["structure"] = [
            {"label": seg.label.value, "start_s": seg.start_s, "end_s": seg.end_s}
            for seg in ann.segments
        ]
        timings["postprocess"] = time.perf_counter() - t0

        vocal_sections = select_vocal_sections(ann)
        heads = transports["transcribe"]
        primary_texts: list[str] = []
        secondary_texts: list[str] = []
        t0 = time.perf_counter()
        for seg in vocal_sections:
            span = (seg.start_s, seg.end_s)
            req = BackendRequest(
                op="transcribe", song_id=song.song_id, audio_path=vocal_stem, span=span
            )
            primary_texts.append(_require_payload(_call(heads[0], req, "transcribe"), "text", str, "transcribe"))
            if cfg.mode == "dual_head":
                secondary_texts.append(
                    _require_payload(_call(heads[1], req, "transcribe"), "text", str, "transcribe")
                )
        timings["transcribe"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        hyp_text = " ".join(primary_texts)
        wer_estimate: float | None = None
        cross_wer: float | None = None
        if cfg.mode == "with_reference_lyrics":
            reference = song.reference_lyrics or ""
            outcome = fix_lyrics(
                reference, hyp_text, reject_threshold=cfg.fix_reject_threshold
            )
            rate = outcome.wer_ref_vs_hyp
            wer_estimate = rate if rate != float("inf") else None
            if outcome.status is FixStatus.REJECTED:
                timings["postprocess"] += time.perf_counter() - t0
                return (
                    ManifestEntry(
                        song_id=song.song_id,
                        audio_path=song.audio_path,
                        stage_outputs=stage_outputs,
                        wer_estimate=wer_estimate,
                        cross_wer=None,
                        timings_s=timings,
                        status="rejected",
                        reject_reason=(
                            f"wer_estimate {rate} >= reject threshold "
                            f"{cfg.fix_reject_threshold}"
                        ),
                    ),
                    None,
                )
            final_text = outcome.fixed_text or ""
        else:
            decision = dual_head_arbitrate(
                hyp_text,
                " ".join(secondary_texts),
                accept_threshold=cfg.dual_head_accept_threshold,
            )
            rate = decision.cross_wer
            cross_wer = rate if rate != float("inf") else None
            if not decision.accepted:
                timings["postprocess"] += time.perf_counter() - t0
                return (
                    ManifestEntry(
                        song_id=song.song_id,
                        audio_path=song.audio_path,
                        stage_outputs=stage_outputs,
                        wer_estimate=None,
                        cross_wer=cross_wer,
                        timings_s=timings,
                        status="rejected",
                        reject_reason=(
                            f"cross_wer {rate} >= accept threshold "
                            f"{cfg.dual_head_accept_threshold}"
                        ),
                    ),
                    None,
                )
            final_text = decision.chosen

        section_lyrics = _redistribute(final_text, primary_texts)
        lyric_by_span = {
            (seg.start_s, seg.end_s): lyric
            for seg, lyric in zip(vocal_sections, section_lyrics)
        }
        ann = SongAnnotation(
            song_id=ann.song_id,
            segments=tuple(
                Segment(
                    label=seg.label,
                    start_s=seg.start_s,
                    end_s=seg.end_s,
                    lyric=lyric_by_span.get((seg.start_s, seg.end_s), seg.lyric),
                )
                for seg in ann.segments
            ),
            duration_s=ann.duration_s,
        )
        timings["postprocess"] += time.perf_counter() - t0

        t0 = time.perf_counter()
        words: list[WordAlignment] = []
        for seg in select_vocal_sections(ann):
            if not seg.lyric:
                continue
            resp = _call(
                transports["align"][0],
                BackendRequest(
                    op="align",
                    song_id=song.song_id,
                    audio_path=vocal_stem,
                    span=(seg.start_s, seg.end_s),
                    text=seg.lyric,
                ),
                "align",
            )
            words.extend(_parse_words(_require_payload(resp, "words", list, "align"), "align"))
        timings["align"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        try:
            final = calibrate_boundaries(ann, words, cfg.calibration)
            text = serialize_structured_lyrics(final)
        except SongstructError as e:
            raise _StageFailure("calibrate", str(e)) from None
        stage_outputs["lyrics"] = f"{song.song_id}.txt"
        timings["postprocess"] += time.perf_counter() - t0

        return (
            ManifestEntry(
                song_id=song.song_id,
                audio_path=song.audio_path,
                stage_outputs=stage_outputs,
                wer_estimate=wer_estimate,
                cross_wer=cross_wer,
                timings_s=timings,
                status="ok",
                reject_reason=None,
            ),
            text,
        )
    except _StageFailure as e:
        return failed(e.stage, e.message)
    except Exception as e:  # per-song isolation: a bad song never kills the run
        return failed("internal", f"{type(e).__name__}: {e}")


def run_pipeline(cfg: PipelineConfig, inputs: list[SongInput]) -> list[ManifestEntry]:
    """Process every input song; write artifacts and the corpus manifest.

    Songs run on a bounded thread pool (cfg.worker_count); results keep
    input order. Output files land in cfg.output_dir: one {song_id}.txt
    per ok song plus manifest.jsonl. Per-song failures become manifest
    entries, never exceptions.
    """
    transports = {
        stage: tuple(open_transport(e) for e in endpoints)
        for stage, endpoints in cfg.backends.items()
    }
    os.makedirs(cfg.output_dir, exist_ok=True)
    try:
        if cfg.worker_count == 1:
            results = [_process_song(song, cfg, transports) for song in inputs]
        else:
            with ThreadPoolExecutor(max_workers=cfg.worker_count) as pool:
                results = list(pool.map(lambda s: _process_song(s, cfg, transports), inputs))
    finally:
        for endpoints in transports.values():
            for transport in endpoints:
                transport.close()

    entries: list[ManifestEntry] = []
    for entry, text in results:
        if text is not None:
            path = os.path.join(cfg.output_dir, entry.stage_outputs["lyrics"])
            with open(path, "w", encoding="utf-8") as f:
                f.write(text)
        entries.append(entry)
    with open(os.path.join(cfg.output_dir, "manifest.jsonl"), "w", encoding="utf-8") as f:
        f.write(dump_manifest(entries))
    return entries
