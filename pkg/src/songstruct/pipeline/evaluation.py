"""Corpus evaluation against gold annotations.

Hypotheses come either from a pipeline manifest (ok entries, their
serialized annotations, and their timings for RTF) or from a bare
directory of structured-lyrics files named {song_id}.txt. Each song needs
a gold file gold_dir/{song_id}.json; DER is pooled over timelines, WER
over the concatenated vocal-section lyrics, each divided once.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

from ..errors import InvalidInput, MissingGold, SchemaError
from ..formats import canonical_json, load_gold, load_manifest, parse_structured_lyrics
from ..model import SongAnnotation, StructureLabel
from ..textmetrics import WerReport, wer
from ..timemetrics import DerReport, RtfReport, der
from ..timeline import select_vocal_sections

# Gold language tags name languages; tokenizer hints name regimes.
_HINT_BY_LANGUAGE = {"zh": "cjk", "en": "latin", "auto": "auto"}


@dataclass(frozen=True)
class PerSongEval:
    song_id: str
    der: float
    wer: float


@dataclass(frozen=True)
class EvalReport:
    """Pooled corpus metrics plus the per-song breakdown."""

    songs: int
    collar_s: float
    score_silence: bool
    der: DerReport
    wer: WerReport
    rtf: RtfReport | None
    per_song: tuple[PerSongEval, ...]

    def to_dict(self) -> dict:
        confusion: dict[str, dict[str, float]] = {}
        for (ref_label, hyp_label), seconds in sorted(
            self.der.per_label_confusion.items(), key=lambda kv: (kv[0][0].value, kv[0][1].value)
        ):
            confusion.setdefault(ref_label.value, {})[hyp_label.value] = seconds
        return {
            "songs": self.songs,
            "collar_s": self.collar_s,
            "score_silence": self.score_silence,
            "der": {
                "der": self.der.der,
                "mismatch_s": self.der.mismatch_s,
                "total_s": self.der.total_s,
                "confusion": confusion,
            },
            "wer": {
                "wer": self.wer.wer if math.isfinite(self.wer.wer) else None,
                "substitutions": self.wer.substitutions,
                "deletions": self.wer.deletions,
                "insertions": self.wer.insertions,
                "ref_len": self.wer.ref_len,
                "pairs": self.wer.pairs,
            },
            "rtf": (
                {
                    "rtf": self.rtf.rtf,
                    "processing_s": self.rtf.processing_s,
                    "audio_s": self.rtf.audio_s,
                }
                if self.rtf is not None
                else None
            ),
            "per_song": [
                {
                    "song_id": item.song_id,
                    "der": item.der,
                    "wer": item.wer if math.isfinite(item.wer) else None,
                }
                for item in self.per_song
            ],
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict()) + "\n"


def eval_report_from_json(text: str) -> EvalReport:
    """Rebuild an EvalReport from its JSON form.

    Rates serialized as null (non-finite) are recomputed from the counts,
    so dump -> load -> dump is byte-stable.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e.msg}") from None
    if not isinstance(obj, dict):
        raise SchemaError("report must be an object")
    try:
        der_obj = obj["der"]
        confusion = {}
        for ref_label, row in der_obj.get("confusion", {}).items():
            for hyp_label, seconds in row.items():
                confusion[(StructureLabel(ref_label), StructureLabel(hyp_label))] = seconds
        der_report = DerReport(
            der=der_obj["der"],
            mismatch_s=der_obj["mismatch_s"],
            total_s=der_obj["total_s"],
            per_label_confusion=confusion,
        )
        wer_obj = obj["wer"]
        wer_report = WerReport(
            substitutions=wer_obj["substitutions"],
            deletions=wer_obj["deletions"],
            insertions=wer_obj["insertions"],
            ref_len=wer_obj["ref_len"],
            pairs=wer_obj["pairs"],
        )
        rtf_obj = obj["rtf"]
        rtf_report = (
            RtfReport(processing_s=rtf_obj["processing_s"], audio_s=rtf_obj["audio_s"])
            if rtf_obj is not None
            else None
        )
        per_song = tuple(
            PerSongEval(
                song_id=item["song_id"],
                der=item["der"],
                wer=item["wer"] if item["wer"] is not None else float("inf"),
            )
            for item in obj["per_song"]
        )
        return EvalReport(
            songs=obj["songs"],
            collar_s=obj["collar_s"],
            score_silence=obj["score_silence"],
            der=der_report,
            wer=wer_report,
            rtf=rtf_report,
            per_song=per_song,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"malformed report: {e}") from None


def _vocal_text(ann: SongAnnotation) -> str:
    return " ".join(seg.lyric for seg in select_vocal_sections(ann) if seg.lyric)


def _collect_from_manifest(manifest_path: str) -> list[tuple[str, str, dict]]:
    base = os.path.dirname(os.path.abspath(manifest_path))
    with open(manifest_path, encoding="utf-8") as f:
        entries = load_manifest(f.read())
    collected = []
    for entry in entries:
        if entry.status != "ok":
            continue
        artifact = entry.stage_outputs.get("lyrics")
        if not isinstance(artifact, str):
            raise InvalidInput(f"ok entry {entry.song_id!r} has no lyrics artifact")
        path = os.path.join(base, artifact)
        try:
            with open(path, encoding="utf-8") as f:
                text = f.read()
        except OSError as e:
            raise InvalidInput(
                f"cannot read artifact for {entry.song_id!r}: {e.strerror or e}"
            ) from None
        collected.append((entry.song_id, text, dict(entry.timings_s)))
    return collected


def _collect_from_dir(hyp_dir: str) -> list[tuple[str, str, None]]:
    collected = []
    for name in sorted(os.listdir(hyp_dir)):
        if not name.endswith(".txt"):
            continue
        with open(os.path.join(hyp_dir, name), encoding="utf-8") as f:
            collected.append((name[: -len(".txt")], f.read(), None))
    return collected


def evaluate(
    hyp_path: str,
    gold_dir: str,
    collar_s: float = 0.0,
    score_silence: bool = True,
) -> EvalReport:
    """Score hypotheses under hyp_path against gold_dir.

    hyp_path is a manifest file or a directory of {song_id}.txt files.
    Raises MissingGold when any hypothesis song lacks a gold annotation,
    InvalidInput when there is nothing to evaluate. RTF is reported only
    in manifest mode, pooling each ok song's stage timings over the gold
    durations.
    """
    if os.path.isdir(hyp_path):
        collected = _collect_from_dir(hyp_path)
    elif os.path.isfile(hyp_path):
        collected = _collect_from_manifest(hyp_path)
    else:
        raise InvalidInput(f"no such file or directory: {hyp_path}")
    if not collected:
        raise InvalidInput(f"no hypotheses to evaluate under {hyp_path}")

    missing = sorted(
        song_id
        for song_id, _, _ in collected
        if not os.path.isfile(os.path.join(gold_dir, f"{song_id}.json"))
    )
    if missing:
        raise MissingGold(missing)

    mismatch_s = 0.0
    total_s = 0.0
    confusion: dict = {}
    subs = dels = inss = ref_len = 0
    processing_s = 0.0
    audio_s = 0.0
    have_timings = False
    per_song: list[PerSongEval] = []

    for song_id, hyp_text, timings in collected:
        with open(os.path.join(gold_dir, f"{song_id}.json"), encoding="utf-8") as f:
            gold_ann, language = load_gold(f.read())
        hint = _HINT_BY_LANGUAGE[language]
        hyp_ann = parse_structured_lyrics(hyp_text, song_id=song_id)

        der_report = der(gold_ann, hyp_ann, collar_s=collar_s, score_silence=score_silence)
        mismatch_s += der_report.mismatch_s
        total_s += der_report.total_s
        for cell, seconds in der_report.per_label_confusion.items():
            confusion[cell] = confusion.get(cell, 0.0) + seconds

        wer_report = wer(_vocal_text(gold_ann), _vocal_text(hyp_ann), hint)
        subs += wer_report.substitutions
        dels += wer_report.deletions
        inss += wer_report.insertions
        ref_len += wer_report.ref_len

        if timings is not None:
            have_timings = True
            processing_s += sum(timings.values())
            audio_s += gold_ann.duration_s or 0.0

        per_song.append(PerSongEval(song_id=song_id, der=der_report.der, wer=wer_report.wer))

    pooled_der = DerReport(
        der=mismatch_s / total_s,
        mismatch_s=mismatch_s,
        total_s=total_s,
        per_label_confusion=confusion,
    )
    pooled_wer = WerReport(
        substitutions=subs,
        deletions=dels,
        insertions=inss,
        ref_len=ref_len,
        pairs=len(collected),
    )
    pooled_rtf = RtfReport(processing_s=processing_s, audio_s=audio_s) if (
        have_timings and audio_s > 0
    ) else None

    return EvalReport(
        songs=len(collected),
        collar_s=collar_s,
        score_silence=score_silence,
        der=pooled_der,
        wer=pooled_wer,
        rtf=pooled_rtf,
        per_song=tuple(per_song),
    )


def format_report(report: EvalReport) -> str:
    """Render the human-readable results table."""
    wer_value = report.wer.wer
    wer_text = f"{wer_value:.4f}" if math.isfinite(wer_value) else "inf"
    lines = [
        f"songs  {report.songs}",
        (
            f"DER    {report.der.der:.4f}"
            f"  (mismatch {report.der.mismatch_s:.3f}s / {report.der.total_s:.3f}s,"
            f" collar {report.collar_s}s)"
        ),
        (
            f"WER    {wer_text}"
            f"  (S={report.wer.substitutions} D={report.wer.deletions}"
            f" I={report.wer.insertions} N={report.wer.ref_len})"
        ),
    ]
    if report.rtf is not None:
        lines.append(
            f"RTF    {report.rtf.rtf:.4f}"
            f"  (processing {report.rtf.processing_s:.3f}s / audio {report.rtf.audio_s:.1f}s)"
        )
    for item in report.per_song:
        song_wer = f"{item.wer:.4f}" if math.isfinite(item.wer) else "inf"
        lines.append(f"  {item.song_id}: der {item.der:.4f}  wer {song_wer}")
    return "\n".join(lines) + "\n"
