"""songstruct: structured-lyrics corpus tooling.

Parses and serializes the [label][start:end]lyric text format, repairs
ASR lyric hypotheses against reference text, calibrates structure
boundaries with word alignments, measures DER/WER/RTF, and orchestrates
pluggable model backends over a corpus.
"""

from .errors import (
    ConfigError,
    InvalidInput,
    MissingGold,
    ParseError,
    SchemaError,
    SongstructError,
    UnknownLabel,
    ValidationError,
)
from .formats import (
    StructuredLyricsDocument,
    dump_gold,
    dump_manifest,
    load_gold,
    load_gold_annotation,
    load_manifest,
    parse_document,
    parse_structured_lyrics,
    serialize_structured_lyrics,
)
from .model import (
    VOCAL_LABELS,
    EditAlignment,
    EditKind,
    EditOp,
    ManifestEntry,
    RawSegment,
    Segment,
    SongAnnotation,
    StructureLabel,
    TokenSequence,
    WordAlignment,
    validate_annotation,
)
from .repair import (
    DualHeadDecision,
    FixOutcome,
    FixStatus,
    detokenize,
    dual_head_arbitrate,
    filter_dataset,
    fix_lyrics,
)
from .textmetrics import WerReport, corpus_wer, edit_align, tokenize, wer
from .timeline import (
    DEFAULT_LABEL_MAPPING,
    CalibrationParams,
    LabelMapping,
    calibrate_boundaries,
    normalize_timeline,
    remap_labels,
    select_vocal_sections,
)
from .timemetrics import DerReport, RtfReport, corpus_der, der, rtf

__version__ = "0.1.0"

__all__ = [
    "CalibrationParams",
    "ConfigError",
    "DEFAULT_LABEL_MAPPING",
    "DerReport",
    "DualHeadDecision",
    "EditAlignment",
    "EditKind",
    "EditOp",
    "FixOutcome",
    "FixStatus",
    "InvalidInput",
    "LabelMapping",
    "ManifestEntry",
    "MissingGold",
    "ParseError",
    "RawSegment",
    "RtfReport",
    "SchemaError",
    "Segment",
    "SongAnnotation",
    "SongstructError",
    "StructureLabel",
    "StructuredLyricsDocument",
    "TokenSequence",
    "UnknownLabel",
    "VOCAL_LABELS",
    "ValidationError",
    "WerReport",
    "WordAlignment",
    "calibrate_boundaries",
    "corpus_der",
    "corpus_wer",
    "der",
    "detokenize",
    "dual_head_arbitrate",
    "dump_gold",
    "dump_manifest",
    "edit_align",
    "filter_dataset",
    "fix_lyrics",
    "load_gold",
    "load_gold_annotation",
    "load_manifest",
    "normalize_timeline",
    "parse_document",
    "parse_structured_lyrics",
    "remap_labels",
    "rtf",
    "select_vocal_sections",
    "serialize_structured_lyrics",
    "tokenize",
    "validate_annotation",
    "wer",
]
