"""Parsing and serialization for the structured-lyrics interchange formats.

Three surfaces live here: the line-oriented structured-lyrics text format
(one ``[label][start:end]lyric`` line per segment), the gold-annotation
JSON schema used for evaluation references, and the JSONL manifest format
the pipeline persists.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Any, Sequence

from .errors import ParseError, SchemaError, ValidationError
from .model import (
    MANIFEST_STATUSES,
    ManifestEntry,
    Segment,
    SongAnnotation,
    StructureLabel,
    validate_annotation,
)

_TIME_RE = re.compile(r"[0-9]+(\.[0-9]+)?$")
_LABEL_VALUES = frozenset(label.value for label in StructureLabel)

GOLD_LANGUAGES = ("zh", "en", "auto")


@dataclass(frozen=True)
class StructuredLyricsDocument:
    """A parsed structured-lyrics file plus the text it came from.

    ``lines`` holds one segment per non-blank source line, in file order;
    ``source_text`` is retained verbatim for error reporting and diffing.
    """

    lines: tuple[Segment, ...]
    source_text: str

    def annotation(self, song_id: str = "", duration_s: float | None = None) -> SongAnnotation:
        return SongAnnotation(song_id=song_id, segments=self.lines, duration_s=duration_s)


def _parse_line(line: str, lineno: int) -> Segment:
    def fail(message: str, col: int) -> None:
        raise ParseError(message, lineno, col)

    if not line.startswith("["):
        fail("expected '[' at start of line", 1)
    label_end = line.find("]", 1)
    if label_end < 0:
        fail("unterminated label bracket", len(line) + 1)
    label_text = line[1:label_end]
    if label_text not in _LABEL_VALUES:
        fail(f"unknown label {label_text!r}", 2)
    label = StructureLabel(label_text)

    if label_end + 1 >= len(line) or line[label_end + 1] != "[":
        fail("expected '[' before time range", label_end + 2)
    times_end = line.find("]", label_end + 2)
    if times_end < 0:
        fail("unterminated time range bracket", len(line) + 1)
    times_text = line[label_end + 2 : times_end]
    times_col = label_end + 3
    if times_text.count(":") != 1:
        fail(f"malformed time range {times_text!r}", times_col)
    start_text, end_text = times_text.split(":")
    if not _TIME_RE.fullmatch(start_text):
        fail(f"malformed time {start_text!r}", times_col)
    if not _TIME_RE.fullmatch(end_text):
        fail(f"malformed time {end_text!r}", times_col + len(start_text) + 1)
    start_s = float(start_text)
    end_s = float(end_text)
    if not start_s < end_s:
        fail(f"start {start_text} is not before end {end_text}", times_col)

    lyric = line[times_end + 1 :].strip()
    return Segment(label=label, start_s=start_s, end_s=end_s, lyric=lyric)


def parse_document(text: str) -> StructuredLyricsDocument:
    """Parse structured-lyrics text, keeping the source for reporting.

    Blank (whitespace-only) lines are skipped. Raises ParseError with line
    and column for grammar violations, out-of-order segments, and overlaps.
    Label-specific lyric rules (no lyric on non-vocal labels) are left to
    validate_annotation so damaged files can still be inspected.
    """
    segments: list[Segment] = []
    prev: Segment | None = None
    for lineno, raw in enumerate(text.split("\n"), start=1):
        if not raw.strip():
            continue
        seg = _parse_line(raw, lineno)
        if prev is not None:
            if seg.start_s < prev.start_s:
                raise ParseError(
                    f"segment starts at {seg.start_s} before previous segment at {prev.start_s}",
                    lineno,
                    1,
                )
            if seg.start_s < prev.end_s:
                raise ParseError(
                    f"segment starting at {seg.start_s} overlaps previous segment "
                    f"ending at {prev.end_s}",
                    lineno,
                    1,
                )
        segments.append(seg)
        prev = seg
    return StructuredLyricsDocument(lines=tuple(segments), source_text=text)


def parse_structured_lyrics(text: str, song_id: str = "") -> SongAnnotation:
    """Parse structured-lyrics text into an annotation (duration unknown)."""
    return parse_document(text).annotation(song_id=song_id)


def format_time(seconds: float) -> str:
    """Render seconds with exactly one decimal place, rounding half up.

    Rounding is applied to the float's shortest decimal representation, so
    7.25 prints as "7.3" even though its binary value is what it is.
    """
    q = Decimal(repr(float(seconds))).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)
    return str(q)


def serialize_structured_lyrics(ann: SongAnnotation) -> str:
    """Serialize an annotation to canonical structured-lyrics text.

    One line per segment, times at one decimal place (half-up), lyric
    whitespace-trimmed, no trailing space, trailing newline present, empty
    annotation serializes to the empty string. Raises ValidationError if
    the annotation breaks its invariants or a lyric contains a newline.
    """
    violations = validate_annotation(ann)
    if violations:
        raise ValidationError("; ".join(violations))
    lines = []
    for i, seg in enumerate(ann.segments):
        lyric = seg.lyric.strip()
        if "\n" in lyric or "\r" in lyric:
            raise ValidationError(f"segments[{i}]: lyric contains a line break")
        lines.append(
            f"[{seg.label.value}][{format_time(seg.start_s)}:{format_time(seg.end_s)}]{lyric}"
        )
    if not lines:
        return ""
    return "\n".join(lines) + "\n"


def _require(obj: dict, field: str, kinds: tuple[type, ...], path: str) -> Any:
    if field not in obj:
        raise SchemaError(f"{path}{field}: missing")
    value = obj[field]
    if isinstance(value, bool) or not isinstance(value, kinds):
        expected = " or ".join(k.__name__ for k in kinds)
        raise SchemaError(f"{path}{field}: expected {expected}, got {type(value).__name__}")
    return value


def load_gold(text: str) -> tuple[SongAnnotation, str]:
    """Parse gold-annotation JSON into (annotation, language hint).

    The language field is optional and defaults to "auto"; it is returned
    separately because annotations do not carry language. Raises
    SchemaError naming the offending field (e.g. "segments[0].label") and
    ValidationError if the decoded annotation breaks segment invariants.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e}") from None
    if not isinstance(obj, dict):
        raise SchemaError("top-level value must be an object")

    song_id = _require(obj, "song_id", (str,), "")
    duration_s = float(_require(obj, "duration_s", (int, float), ""))
    language = obj.get("language", "auto")
    if language not in GOLD_LANGUAGES:
        raise SchemaError(f"language: expected one of {'/'.join(GOLD_LANGUAGES)}, got {language!r}")
    raw_segments = _require(obj, "segments", (list,), "")

    segments: list[Segment] = []
    for i, item in enumerate(raw_segments):
        path = f"segments[{i}]."
        if not isinstance(item, dict):
            raise SchemaError(f"segments[{i}]: expected object, got {type(item).__name__}")
        label_text = _require(item, "label", (str,), path)
        if label_text not in _LABEL_VALUES:
            raise SchemaError(f"{path}label: unknown label {label_text!r}")
        start_s = float(_require(item, "start_s", (int, float), path))
        end_s = float(_require(item, "end_s", (int, float), path))
        lyric = item.get("lyric", "")
        if not isinstance(lyric, str):
            raise SchemaError(f"{path}lyric: expected str, got {type(lyric).__name__}")
        segments.append(
            Segment(label=StructureLabel(label_text), start_s=start_s, end_s=end_s, lyric=lyric)
        )

    ann = SongAnnotation(song_id=song_id, segments=tuple(segments), duration_s=duration_s)
    violations = validate_annotation(ann)
    if violations:
        raise ValidationError("; ".join(violations))
    return ann, language


def load_gold_annotation(text: str) -> SongAnnotation:
    """Parse gold-annotation JSON; see load_gold for the full contract."""
    ann, _ = load_gold(text)
    return ann


def dump_gold(ann: SongAnnotation, language: str = "auto") -> str:
    """Serialize an annotation to canonical gold JSON (one line, sorted keys)."""
    if ann.duration_s is None:
        raise ValidationError("gold annotation requires duration_s")
    obj = {
        "song_id": ann.song_id,
        "duration_s": ann.duration_s,
        "language": language,
        "segments": [
            {
                "label": seg.label.value,
                "start_s": seg.start_s,
                "end_s": seg.end_s,
                "lyric": seg.lyric,
            }
            for seg in ann.segments
        ],
    }
    return canonical_json(obj) + "\n"


def canonical_json(obj: Any) -> str:
    """Render an object as canonical JSON: sorted keys, no spaces, raw UTF-8.

    Non-finite numbers are rejected rather than emitted as the nonstandard
    Infinity/NaN literals.
    """
    return json.dumps(
        obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False
    )


_MANIFEST_FIELDS = (
    "song_id",
    "audio_path",
    "stage_outputs",
    "wer_estimate",
    "cross_wer",
    "timings_s",
    "status",
    "reject_reason",
)


def manifest_entry_to_dict(entry: ManifestEntry) -> dict:
    return {
        "song_id": entry.song_id,
        "audio_path": entry.audio_path,
        "stage_outputs": entry.stage_outputs,
        "wer_estimate": entry.wer_estimate,
        "cross_wer": entry.cross_wer,
        "timings_s": entry.timings_s,
        "status": entry.status,
        "reject_reason": entry.reject_reason,
    }


def dump_manifest(entries: Sequence[ManifestEntry]) -> str:
    """Serialize manifest entries to canonical JSONL, one entry per line.

    Rates are persisted at full precision; producers store None instead of
    non-finite rates (there is no portable JSON spelling for infinity), and
    dumping a non-finite number raises ValidationError.
    """
    lines = []
    for i, entry in enumerate(entries):
        for field_name in ("wer_estimate", "cross_wer"):
            value = getattr(entry, field_name)
            if value is not None and not math.isfinite(value):
                raise ValidationError(f"entry {i}: {field_name} is not finite; store None instead")
        try:
            lines.append(canonical_json(manifest_entry_to_dict(entry)))
        except ValueError as e:
            raise ValidationError(f"entry {i}: {e}") from None
    if not lines:
        return ""
    return "\n".join(lines) + "\n"


def _manifest_entry_from_dict(obj: dict, where: str) -> ManifestEntry:
    for field_name in _MANIFEST_FIELDS:
        if field_name not in obj:
            raise SchemaError(f"{where}: missing field {field_name!r}")
    song_id = obj["song_id"]
    audio_path = obj["audio_path"]
    if not isinstance(song_id, str):
        raise SchemaError(f"{where}: song_id must be str")
    if not isinstance(audio_path, str):
        raise SchemaError(f"{where}: audio_path must be str")
    stage_outputs = obj["stage_outputs"]
    if not isinstance(stage_outputs, dict):
        raise SchemaError(f"{where}: stage_outputs must be an object")
    timings = obj["timings_s"]
    if not isinstance(timings, dict):
        raise SchemaError(f"{where}: timings_s must be an object")
    for name, value in timings.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(f"{where}: timings_s[{name!r}] must be a number")
    for field_name in ("wer_estimate", "cross_wer"):
        value = obj[field_name]
        if value is not None and (isinstance(value, bool) or not isinstance(value, (int, float))):
            raise SchemaError(f"{where}: {field_name} must be a number or null")
    status = obj["status"]
    if status not in MANIFEST_STATUSES:
        raise SchemaError(f"{where}: status must be one of {'/'.join(MANIFEST_STATUSES)}")
    reject_reason = obj["reject_reason"]
    if reject_reason is not None and not isinstance(reject_reason, str):
        raise SchemaError(f"{where}: reject_reason must be str or null")
    return ManifestEntry(
        song_id=song_id,
        audio_path=audio_path,
        stage_outputs=stage_outputs,
        wer_estimate=obj["wer_estimate"],
        cross_wer=obj["cross_wer"],
        timings_s=timings,
        status=status,
        reject_reason=reject_reason,
    )


def load_manifest(text: str) -> list[ManifestEntry]:
    """Parse manifest JSONL; SchemaError messages carry the line number."""
    entries: list[ManifestEntry] = []
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
        entries.append(_manifest_entry_from_dict(obj, where))
    return entries
