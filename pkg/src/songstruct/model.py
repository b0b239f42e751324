"""Shared domain types for structured-lyrics corpora.

All times are real-valued seconds. Every type here is an immutable value
after construction and safe to share between threads; rounding happens
only at serialization, never in the model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .errors import UnknownLabel

#: Tolerance for float comparisons on the timeline.
TIME_EPS = 1e-9


class StructureLabel(str, Enum):
    """The closed seven-label structure vocabulary."""

    INTRO = "intro"
    OUTRO = "outro"
    INST = "inst"
    VERSE = "verse"
    CHORUS = "chorus"
    BRIDGE = "bridge"
    SILENCE = "silence"

    @classmethod
    def parse(cls, text: str) -> "StructureLabel":
        try:
            return cls(text)
        except ValueError:
            raise UnknownLabel(f"unknown structure label {text!r}") from None


#: Labels whose segments carry sung lyrics.
VOCAL_LABELS = frozenset(
    {StructureLabel.VERSE, StructureLabel.CHORUS, StructureLabel.BRIDGE}
)


@dataclass(frozen=True)
class Segment:
    """One labeled, timestamped span of a song with its lyric text.

    Non-vocal segments must have an empty lyric; vocal segments may be
    empty too (a verse can end up with no recognized words).
    """

    label: StructureLabel
    start_s: float
    end_s: float
    lyric: str = ""

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s

    @property
    def is_vocal(self) -> bool:
        return self.label in VOCAL_LABELS


@dataclass(frozen=True)
class RawSegment:
    """A structure-analysis segment before label remapping.

    The label is an arbitrary source string (e.g. a legacy category) and
    is only constrained once mapped into the seven-label vocabulary.
    """

    label: str
    start_s: float
    end_s: float
    lyric: str = ""


@dataclass(frozen=True)
class SongAnnotation:
    """A song's ordered, labeled, timestamped segment list.

    ``duration_s`` is optional for partial annotations; a *normalized*
    annotation is contiguous over ``[0, duration_s]`` with no adjacent
    same-label segments (see :func:`validate_annotation`).
    """

    song_id: str
    segments: tuple[Segment, ...] = ()
    duration_s: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))


@dataclass(frozen=True)
class TokenSequence:
    """An ordered token list plus the language hint it was produced under."""

    tokens: tuple[str, ...] = ()
    language_hint: str = "auto"

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))

    def __len__(self) -> int:
        return len(self.tokens)


class EditKind(str, Enum):
    """One alignment operation between a reference and a hypothesis token."""

    MATCH = "match"
    SUBSTITUTE = "substitute"
    INSERT = "insert"
    DELETE = "delete"


@dataclass(frozen=True)
class EditOp:
    """A single edit step; indices point into the reference/hypothesis.

    ``ref_index`` is None for inserts, ``hyp_index`` is None for deletes.
    """

    kind: EditKind
    ref_index: int | None
    hyp_index: int | None


@dataclass(frozen=True)
class EditAlignment:
    """A minimal unit-cost edit script between two token sequences."""

    ops: tuple[EditOp, ...]
    substitutions: int
    deletions: int
    insertions: int
    ref_len: int

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))

    @property
    def edit_cost(self) -> int:
        return self.substitutions + self.deletions + self.insertions


@dataclass(frozen=True)
class WordAlignment:
    """One word's forced-alignment interval and backend confidence.

    ``score`` is 1.0 when the backend reports no confidence. Lists of
    words are kept sorted by start time and non-overlapping.
    """

    word: str
    start_s: float
    end_s: float
    score: float = 1.0


@dataclass(frozen=True)
class ManifestEntry:
    """One song's pipeline state: artifacts, quality scores, timings.

    Artifact paths inside ``stage_outputs`` are relative to the manifest's
    directory so a corpus can be relocated wholesale.
    """

    song_id: str
    audio_path: str
    stage_outputs: dict = field(default_factory=dict)
    wer_estimate: float | None = None
    cross_wer: float | None = None
    timings_s: dict = field(default_factory=dict)
    status: str = "ok"
    reject_reason: str | None = None


MANIFEST_STATUSES = ("ok", "rejected", "failed")


def validate_annotation(
    ann: SongAnnotation, require_normalized: bool = False
) -> list[str]:
    """Check an annotation against its invariants.

    Returns a list of human-readable violation descriptions, one per broken
    rule, naming the offending segment index. An empty list means the
    annotation is valid (and normalized, when ``require_normalized`` is set:
    contiguous from 0 to ``duration_s`` with no adjacent same-label
    segments). Violations are data, not errors; nothing is raised.
    """
    violations: list[str] = []

    if ann.duration_s is not None and not ann.duration_s > 0:
        violations.append(f"duration_s must be positive, got {ann.duration_s}")

    for i, seg in enumerate(ann.segments):
        if not isinstance(seg.label, StructureLabel):
            violations.append(
                f"segments[{i}]: label {seg.label!r} is not in the structure vocabulary"
            )
            continue
        if seg.start_s < 0:
            violations.append(f"segments[{i}]: start {seg.start_s} is negative")
        if not seg.start_s < seg.end_s:
            violations.append(
                f"segments[{i}]: start {seg.start_s} is not before end {seg.end_s}"
            )
        if seg.label not in VOCAL_LABELS and seg.lyric != "":
            violations.append(
                f"segments[{i}]: non-vocal label {seg.label.value!r} carries a lyric"
            )

    for i in range(1, len(ann.segments)):
        prev, cur = ann.segments[i - 1], ann.segments[i]
        if cur.start_s < prev.start_s:
            violations.append(f"segments[{i}]: not sorted by start time")
        elif cur.start_s < prev.end_s - TIME_EPS:
            violations.append(
                f"segments[{i}]: overlaps previous segment "
                f"(starts {cur.start_s} before previous end {prev.end_s})"
            )

    if require_normalized:
        if ann.duration_s is None:
            violations.append("normalized annotation requires duration_s")
        if not ann.segments:
            violations.append("normalized annotation has no segments")
        else:
            first, last = ann.segments[0], ann.segments[-1]
            if abs(first.start_s) > TIME_EPS:
                violations.append(
                    f"segments[0]: normalized timeline must start at 0, got {first.start_s}"
                )
            if ann.duration_s is not None and abs(last.end_s - ann.duration_s) > TIME_EPS:
                violations.append(
                    f"segments[{len(ann.segments) - 1}]: normalized timeline must end "
                    f"at duration {ann.duration_s}, got {last.end_s}"
                )
            for i in range(1, len(ann.segments)):
                prev, cur = ann.segments[i - 1], ann.segments[i]
                if abs(cur.start_s - prev.end_s) > TIME_EPS:
                    violations.append(
                        f"segments[{i}]: gap in normalized timeline "
                        f"({prev.end_s} -> {cur.start_s})"
                    )
                if cur.label == prev.label:
                    violations.append(
                        f"segments[{i}]: adjacent segments share label {cur.label.value!r}"
                    )

    return violations
