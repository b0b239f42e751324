"""Structure-timeline transformations.

Covers the path from raw structure-analysis output to a clean annotation:
remapping legacy label inventories onto the seven-label set, normalizing
a segment list into a contiguous timeline, picking the vocal sections
that get transcribed, and shrinking or relabeling vocal segments that the
word alignment shows to be mostly instrumental.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .errors import InvalidInput, UnknownLabel
from .model import (
    TIME_EPS,
    Segment,
    SongAnnotation,
    StructureLabel,
    WordAlignment,
    validate_annotation,
)


@dataclass(frozen=True)
class LabelMapping:
    """A total map from source label strings onto the seven-label set."""

    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        for src, dst in self.entries.items():
            if not isinstance(dst, StructureLabel):
                raise UnknownLabel(f"mapping target for {src!r} is not a structure label: {dst!r}")

    def apply(self, source: str) -> StructureLabel:
        try:
            return self.entries[source]
        except KeyError:
            raise UnknownLabel(f"no mapping for source label {source!r}") from None


# Default remap for the legacy 10-category structure inventory. The four
# categories without a direct counterpart collapse onto their nearest
# generation-relevant label: start/end markers are quiet boundaries,
# break and solo are accompaniment without vocals.
DEFAULT_LABEL_MAPPING = LabelMapping(
    entries={
        "start": StructureLabel.SILENCE,
        "end": StructureLabel.SILENCE,
        "break": StructureLabel.INST,
        "solo": StructureLabel.INST,
        "intro": StructureLabel.INTRO,
        "outro": StructureLabel.OUTRO,
        "inst": StructureLabel.INST,
        "verse": StructureLabel.VERSE,
        "chorus": StructureLabel.CHORUS,
        "bridge": StructureLabel.BRIDGE,
        "silence": StructureLabel.SILENCE,
    }
)


@dataclass(frozen=True)
class CalibrationParams:
    """Knobs for word-alignment boundary calibration.

    A vocal segment whose word coverage falls below min_vocal_coverage is
    relabeled inst outright; otherwise a word-free leading or trailing gap
    longer than min_gap_s is trimmed back to the words plus pad_s.
    """

    min_vocal_coverage: float = 0.2
    min_gap_s: float = 2.0
    pad_s: float = 0.3

    def __post_init__(self):
        if not 0 <= self.min_vocal_coverage <= 1:
            raise InvalidInput(
                f"min_vocal_coverage must be in [0,1], got {self.min_vocal_coverage}"
            )
        if self.min_gap_s < 0 or self.pad_s < 0:
            raise InvalidInput("min_gap_s and pad_s must be non-negative")


def remap_labels(segments: Sequence, mapping: LabelMapping = DEFAULT_LABEL_MAPPING) -> list[Segment]:
    """Replace each segment's source label via the mapping.

    Accepts RawSegment (string labels) or Segment; times and lyrics pass
    through untouched and adjacent same-label results are NOT merged, that
    is normalize_timeline's job. Raises UnknownLabel on unmapped sources.
    """
    out: list[Segment] = []
    for seg in segments:
        source = seg.label.value if isinstance(seg.label, StructureLabel) else seg.label
        out.append(
            Segment(
                label=mapping.apply(source),
                start_s=seg.start_s,
                end_s=seg.end_s,
                lyric=seg.lyric,
            )
        )
    return out


def _merge_adjacent(segments: list[Segment]) -> list[Segment]:
    merged: list[Segment] = []
    for seg in segments:
        if merged and merged[-1].label == seg.label:
            prev = merged[-1]
            parts = [p for p in (prev.lyric, seg.lyric) if p]
            merged[-1] = Segment(
                label=prev.label,
                start_s=prev.start_s,
                end_s=seg.end_s,
                lyric=" ".join(parts),
            )
        else:
            merged.append(seg)
    return merged


def normalize_timeline(
    segments: Sequence[Segment], duration_s: float, song_id: str = ""
) -> SongAnnotation:
    """Build a contiguous annotation over [0, duration_s] from loose segments.

    Segments are sorted, clipped to the window, gaps are filled with
    silence, and adjacent same-label segments merge with lyrics joined by
    a single space (empty parts dropped). Raises InvalidInput on overlap
    or a non-positive duration.
    """
    if not duration_s > 0:
        raise InvalidInput(f"duration_s must be positive, got {duration_s}")
    ordered = sorted(segments, key=lambda s: (s.start_s, s.end_s))
    clipped: list[Segment] = []
    for seg in ordered:
        lo = max(seg.start_s, 0.0)
        hi = min(seg.end_s, duration_s)
        if hi - lo <= TIME_EPS:
            continue
        if clipped and lo < clipped[-1].end_s - TIME_EPS:
            raise InvalidInput(
                f"segment starting at {seg.start_s} overlaps previous segment "
                f"ending at {clipped[-1].end_s}"
            )
        if clipped and lo < clipped[-1].end_s:
            lo = clipped[-1].end_s
        clipped.append(Segment(label=seg.label, start_s=lo, end_s=hi, lyric=seg.lyric))

    filled: list[Segment] = []
    cursor = 0.0
    for seg in clipped:
        if seg.start_s > cursor + TIME_EPS:
            filled.append(Segment(StructureLabel.SILENCE, cursor, seg.start_s))
            filled.append(seg)
        elif seg.start_s != cursor:
            filled.append(Segment(seg.label, cursor, seg.end_s, seg.lyric))
        else:
            filled.append(seg)
        cursor = filled[-1].end_s
    if cursor < duration_s - TIME_EPS:
        filled.append(Segment(StructureLabel.SILENCE, cursor, duration_s))
    elif filled and filled[-1].end_s != duration_s:
        last = filled[-1]
        filled[-1] = Segment(last.label, last.start_s, duration_s, last.lyric)
    if not filled:
        filled.append(Segment(StructureLabel.SILENCE, 0.0, duration_s))

    return SongAnnotation(
        song_id=song_id, segments=tuple(_merge_adjacent(filled)), duration_s=duration_s
    )


def select_vocal_sections(ann: SongAnnotation) -> list[Segment]:
    """The subsequence of segments carrying vocal labels, order preserved."""
    return [seg for seg in ann.segments if seg.is_vocal]


def _check_words(words: Sequence[WordAlignment]) -> None:
    for i, w in enumerate(words):
        if not w.start_s < w.end_s:
            raise InvalidInput(f"words[{i}]: start {w.start_s} is not before end {w.end_s}")
        if i and w.start_s < words[i - 1].end_s - TIME_EPS:
            raise InvalidInput(f"words[{i}]: overlaps or precedes words[{i - 1}]")


def calibrate_boundaries(
    ann: SongAnnotation,
    words: Sequence[WordAlignment],
    params: CalibrationParams = CalibrationParams(),
) -> SongAnnotation:
    """Reconcile vocal segment boundaries with the word alignment.

    Per vocal segment: word coverage below min_vocal_coverage relabels the
    whole segment inst (lyric dropped); otherwise a leading or trailing
    word-free span longer than min_gap_s shrinks that side to the words
    plus pad_s (never growing past the original bounds) and the vacated
    span becomes inst. The result is renormalized, so the operation is
    idempotent and never increases total vocal duration.
    """
    violations = validate_annotation(ann, require_normalized=True)
    if violations:
        raise InvalidInput("annotation not normalized: " + "; ".join(violations))
    _check_words(words)

    out: list[Segment] = []
    for seg in ann.segments:
        if not seg.is_vocal:
            out.append(seg)
            continue
        covered = 0.0
        first_word: float | None = None
        last_word: float | None = None
        for w in words:
            lo = max(w.start_s, seg.start_s)
            hi = min(w.end_s, seg.end_s)
            if hi <= lo:
                continue
            covered += hi - lo
            if first_word is None:
                first_word = lo
            last_word = hi
        if covered / seg.duration_s < params.min_vocal_coverage:
            out.append(Segment(StructureLabel.INST, seg.start_s, seg.end_s))
            continue
        if first_word is None:
            # Only reachable at a zero coverage threshold: no words to
            # calibrate against, so the segment stands.
            out.append(seg)
            continue
        new_start = seg.start_s
        new_end = seg.end_s
        if first_word - seg.start_s > params.min_gap_s:
            new_start = max(seg.start_s, first_word - params.pad_s)
        if seg.end_s - last_word > params.min_gap_s:
            new_end = min(seg.end_s, last_word + params.pad_s)
        if new_start > seg.start_s:
            out.append(Segment(StructureLabel.INST, seg.start_s, new_start))
        out.append(Segment(seg.label, new_start, new_end, seg.lyric))
        if new_end < seg.end_s:
            out.append(Segment(StructureLabel.INST, new_end, seg.end_s))

    return normalize_timeline(out, ann.duration_s, song_id=ann.song_id)
