from __future__ import annotations

import pytest

from songstruct.errors import UnknownLabel
from songstruct.model import (
    VOCAL_LABELS,
    EditAlignment,
    EditKind,
    EditOp,
    Segment,
    SongAnnotation,
    StructureLabel,
    validate_annotation,
)


def test_label_parse_round_trip():
    for label in StructureLabel:
        assert StructureLabel.parse(label.value) is label


def test_label_parse_unknown():
    with pytest.raises(UnknownLabel):
        StructureLabel.parse("breakdown")
    with pytest.raises(UnknownLabel):
        StructureLabel.parse("Verse")  # case sensitive


def test_vocal_labels():
    assert VOCAL_LABELS == {
        StructureLabel.VERSE,
        StructureLabel.CHORUS,
        StructureLabel.BRIDGE,
    }
    assert Segment(StructureLabel.CHORUS, 0.0, 1.0).is_vocal
    assert not Segment(StructureLabel.INST, 0.0, 1.0).is_vocal


def test_segment_duration():
    assert Segment(StructureLabel.VERSE, 1.5, 4.0).duration_s == 2.5


def test_annotation_coerces_segments_to_tuple():
    ann = SongAnnotation(
        song_id="x",
        segments=[Segment(StructureLabel.VERSE, 0.0, 1.0)],
        duration_s=1.0,
    )
    assert isinstance(ann.segments, tuple)


def test_edit_alignment_cost():
    ops = (
        EditOp(EditKind.MATCH, 0, 0),
        EditOp(EditKind.SUBSTITUTE, 1, 1),
        EditOp(EditKind.DELETE, 2, None),
        EditOp(EditKind.INSERT, None, 2),
    )
    alignment = EditAlignment(
        ops=ops, substitutions=1, deletions=1, insertions=1, ref_len=3
    )
    assert alignment.edit_cost == 3


def _ann(segments, duration=None):
    return SongAnnotation(song_id="v", segments=segments, duration_s=duration)


def test_validate_clean_annotation():
    ann = _ann(
        [
            Segment(StructureLabel.INTRO, 0.0, 5.0),
            Segment(StructureLabel.VERSE, 5.0, 20.0, lyric="la la"),
        ],
        duration=20.0,
    )
    assert validate_annotation(ann) == []
    assert validate_annotation(ann, require_normalized=True) == []


def test_validate_flags_bad_spans():
    ann = _ann([Segment(StructureLabel.VERSE, 3.0, 3.0)], duration=10.0)
    assert any("start" in v for v in validate_annotation(ann))

    ann = _ann([Segment(StructureLabel.VERSE, -1.0, 3.0)], duration=10.0)
    assert validate_annotation(ann) != []


def test_validate_flags_overlap_and_order():
    segs = [
        Segment(StructureLabel.VERSE, 0.0, 6.0),
        Segment(StructureLabel.CHORUS, 5.0, 9.0),
    ]
    assert validate_annotation(_ann(segs, duration=9.0)) != []

    segs = [
        Segment(StructureLabel.CHORUS, 5.0, 9.0),
        Segment(StructureLabel.VERSE, 0.0, 4.0),
    ]
    assert validate_annotation(_ann(segs, duration=9.0)) != []


def test_validate_flags_lyric_on_non_vocal():
    ann = _ann([Segment(StructureLabel.INST, 0.0, 2.0, lyric="hum")], duration=2.0)
    assert any("lyric" in v for v in validate_annotation(ann))


def test_validate_flags_bad_duration():
    ann = _ann([Segment(StructureLabel.VERSE, 0.0, 2.0)], duration=0.0)
    assert validate_annotation(ann) != []


def test_validate_normalized_requirements():
    # Gap between segments: fine unnormalized, flagged when normalized.
    gappy = _ann(
        [
            Segment(StructureLabel.VERSE, 0.0, 2.0),
            Segment(StructureLabel.CHORUS, 3.0, 5.0),
        ],
        duration=5.0,
    )
    assert validate_annotation(gappy) == []
    assert validate_annotation(gappy, require_normalized=True) != []

    # Must start at 0 and end at the duration.
    late = _ann([Segment(StructureLabel.VERSE, 1.0, 5.0)], duration=5.0)
    assert validate_annotation(late, require_normalized=True) != []
    short = _ann([Segment(StructureLabel.VERSE, 0.0, 4.0)], duration=5.0)
    assert validate_annotation(short, require_normalized=True) != []

    # Adjacent same-label segments should have been merged.
    split = _ann(
        [
            Segment(StructureLabel.VERSE, 0.0, 2.0),
            Segment(StructureLabel.VERSE, 2.0, 5.0),
        ],
        duration=5.0,
    )
    assert validate_annotation(split, require_normalized=True) != []

    # Normalized requires a duration and at least one segment.
    assert validate_annotation(
        _ann([Segment(StructureLabel.VERSE, 0.0, 2.0)]), require_normalized=True
    ) != []
    assert validate_annotation(_ann([], duration=2.0), require_normalized=True) != []
