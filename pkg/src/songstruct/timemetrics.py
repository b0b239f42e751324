"""Timeline metrics: diarization error rate and real time factor.

DER here is a labeled-frame mismatch rate over two structure timelines.
Labels are fixed semantic categories shared by reference and hypothesis,
so no optimal label mapping is searched; a frame is wrong exactly when
the two materialized timelines disagree at that instant.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import InvalidInput
from .model import SongAnnotation, StructureLabel


@dataclass(frozen=True)
class DerReport:
    """DER with its mismatch/total decomposition and label confusion.

    ``per_label_confusion`` maps (ref label, hyp label) to evaluated
    seconds, diagonal included; off-diagonal cells sum to ``mismatch_s``.
    """

    der: float
    mismatch_s: float
    total_s: float
    per_label_confusion: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RtfReport:
    """Real time factor: processing seconds per second of audio."""

    processing_s: float
    audio_s: float

    @property
    def rtf(self) -> float:
        return self.processing_s / self.audio_s


def _materialize(
    ann: SongAnnotation, duration_s: float
) -> tuple[list[float], list[StructureLabel]]:
    """Flatten an annotation into a gap-free label timeline over [0, duration].

    Segments are clipped to the window and gaps become silence. Returns
    (starts, labels) where starts[i] begins the span labeled labels[i] and
    spans run to the next start (the last to duration_s).
    """
    starts: list[float] = []
    labels: list[StructureLabel] = []
    cursor = 0.0
    for seg in ann.segments:
        lo = max(seg.start_s, 0.0)
        hi = min(seg.end_s, duration_s)
        if hi <= lo:
            continue
        if lo > cursor:
            starts.append(cursor)
            labels.append(StructureLabel.SILENCE)
        starts.append(lo)
        labels.append(seg.label)
        cursor = hi
    if cursor < duration_s:
        starts.append(cursor)
        labels.append(StructureLabel.SILENCE)
    if not starts:
        starts.append(0.0)
        labels.append(StructureLabel.SILENCE)
    return starts, labels


def _merge_intervals(intervals: list[tuple[float, float]]) -> list[tuple[float, float]]:
    merged: list[tuple[float, float]] = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1]:
            last_lo, last_hi = merged[-1]
            merged[-1] = (last_lo, max(last_hi, hi))
        else:
            merged.append((lo, hi))
    return merged


def _label_at(starts: list[float], labels: list[StructureLabel], t: float) -> StructureLabel:
    return labels[bisect_right(starts, t) - 1]


def der(
    ref: SongAnnotation,
    hyp: SongAnnotation,
    collar_s: float = 0.0,
    score_silence: bool = True,
) -> DerReport:
    """Labeled-frame mismatch rate of hyp against ref over ref's duration.

    Both timelines are materialized over [0, ref.duration_s] with gaps as
    silence; hypothesis time outside that window is clipped. Evaluation
    excludes the union of +-collar_s windows around every reference
    boundary (the 0 and duration edges included); with score_silence off,
    spans whose reference label is silence are excluded as well. The sweep
    is exact interval arithmetic, not sampling.
    """
    if ref.duration_s is None:
        raise InvalidInput(f"reference {ref.song_id!r} has no duration_s")
    if ref.duration_s <= 0:
        raise InvalidInput(
            f"reference {ref.song_id!r} duration_s must be positive"
        )
    if collar_s < 0:
        raise InvalidInput(f"collar_s must be non-negative, got {collar_s}")
    duration = ref.duration_s

    ref_starts, ref_labels = _materialize(ref, duration)
    hyp_starts, hyp_labels = _materialize(hyp, duration)

    boundaries = set(ref_starts)
    boundaries.add(duration)
    excluded: list[tuple[float, float]] = []
    if collar_s > 0:
        excluded.extend((b - collar_s, b + collar_s) for b in sorted(boundaries))
    if not score_silence:
        for i, label in enumerate(ref_labels):
            if label is StructureLabel.SILENCE:
                span_end = ref_starts[i + 1] if i + 1 < len(ref_starts) else duration
                excluded.append((ref_starts[i], span_end))
    excluded = _merge_intervals(excluded)
    excluded_starts = [lo for lo, _ in excluded]

    def is_excluded(t: float) -> bool:
        k = bisect_right(excluded_starts, t) - 1
        return k >= 0 and t < excluded[k][1]

    points = set(ref_starts) | set(hyp_starts) | {duration}
    for lo, hi in excluded:
        if 0.0 < lo < duration:
            points.add(lo)
        if 0.0 < hi < duration:
            points.add(hi)
    points = sorted(p for p in points if 0.0 <= p <= duration)

    confusion: dict[tuple[StructureLabel, StructureLabel], float] = {}
    mismatch = 0.0
    total = 0.0
    for a, b in zip(points, points[1:]):
        if b <= a:
            continue
        mid = (a + b) / 2.0
        if is_excluded(mid):
            continue
        span = b - a
        rl = _label_at(ref_starts, ref_labels, mid)
        hl = _label_at(hyp_starts, hyp_labels, mid)
        total += span
        confusion[(rl, hl)] = confusion.get((rl, hl), 0.0) + span
        if rl != hl:
            mismatch += span

    if total <= 0:
        cause = (
            f"collar {collar_s}s" if collar_s > 0 else "the silence exclusion"
        )
        raise InvalidInput(
            f"{cause} excludes the entire timeline of {ref.song_id!r}"
        )
    return DerReport(
        der=mismatch / total,
        mismatch_s=mismatch,
        total_s=total,
        per_label_confusion=confusion,
    )


def corpus_der(
    pairs: Iterable[tuple[SongAnnotation, SongAnnotation]],
    collar_s: float = 0.0,
    score_silence: bool = True,
) -> DerReport:
    """Pool DER over (ref, hyp) pairs: sum seconds first, divide once."""
    mismatch = 0.0
    total = 0.0
    confusion: dict[tuple[StructureLabel, StructureLabel], float] = {}
    seen = False
    for ref, hyp in pairs:
        seen = True
        report = der(ref, hyp, collar_s=collar_s, score_silence=score_silence)
        mismatch += report.mismatch_s
        total += report.total_s
        for cell, seconds in report.per_label_confusion.items():
            confusion[cell] = confusion.get(cell, 0.0) + seconds
    if not seen:
        raise InvalidInput("corpus_der needs at least one (ref, hyp) pair")
    return DerReport(
        der=mismatch / total,
        mismatch_s=mismatch,
        total_s=total,
        per_label_confusion=confusion,
    )


def rtf(processing_s: float, audio_s: float) -> RtfReport:
    """Real time factor of processing_s seconds spent on audio_s of audio."""
    if audio_s <= 0:
        raise InvalidInput(f"audio_s must be positive, got {audio_s}")
    if processing_s < 0:
        raise InvalidInput(f"processing_s must be non-negative, got {processing_s}")
    return RtfReport(processing_s=processing_s, audio_s=audio_s)
