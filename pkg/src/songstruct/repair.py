"""Lyric repair against reference text, transcript arbitration, filtering.

The repair rule works on the edit alignment between reference lyrics and
an ASR hypothesis: reference tokens win substitutions, the hypothesis
wins insertions and deletions. That keeps the repaired text the same
token length as the hypothesis, which is what the word aligner timed.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .model import EditKind, ManifestEntry
from .textmetrics import WerReport, edit_align, is_cjk_char, tokenize


class FixStatus(str, Enum):
    FIXED = "fixed"
    REJECTED = "rejected"


@dataclass(frozen=True)
class FixOutcome:
    """Result of one repair attempt; fixed_text present iff status is fixed."""

    status: FixStatus
    fixed_text: str | None
    wer_ref_vs_hyp: float
    substitutions_taken: int = 0
    insertions_taken: int = 0
    deletions_applied: int = 0


@dataclass(frozen=True)
class DualHeadDecision:
    """Agreement-gated choice between two independent transcripts.

    chosen is the primary transcript when the heads agree closely enough,
    the empty string otherwise.
    """

    chosen: str
    cross_wer: float
    accepted: bool


def detokenize(tokens: Sequence[str]) -> str:
    """Join tokens with single spaces, except between consecutive CJK tokens."""
    parts: list[str] = []
    prev_cjk = False
    for i, tok in enumerate(tokens):
        cur_cjk = len(tok) == 1 and is_cjk_char(tok)
        if i and not (prev_cjk and cur_cjk):
            parts.append(" ")
        parts.append(tok)
        prev_cjk = cur_cjk
    return "".join(parts)


def fix_lyrics(
    reference: str,
    hypothesis: str,
    hint: str = "auto",
    reject_threshold: float = 0.7,
) -> FixOutcome:
    """Repair an ASR hypothesis with reference lyrics, or reject the pair.

    The pair is rejected outright when wer(reference, hypothesis) reaches
    reject_threshold. Below it, the edit alignment is replayed: matches
    keep the token, substitutions take the reference token, insertions
    keep the hypothesis token, deletions emit nothing. Original casing and
    punctuation are not restorable; the fixed text is detokenized tokens.
    """
    ref_tokens = tokenize(reference, hint).tokens
    hyp_tokens = tokenize(hypothesis, hint).tokens
    alignment = edit_align(ref_tokens, hyp_tokens)
    rate = WerReport.from_alignment(alignment).wer
    if rate >= reject_threshold:
        return FixOutcome(status=FixStatus.REJECTED, fixed_text=None, wer_ref_vs_hyp=rate)

    out: list[str] = []
    subs = inss = dels = 0
    for op in alignment.ops:
        if op.kind is EditKind.MATCH:
            out.append(hyp_tokens[op.hyp_index])
        elif op.kind is EditKind.SUBSTITUTE:
            out.append(ref_tokens[op.ref_index])
            subs += 1
        elif op.kind is EditKind.INSERT:
            out.append(hyp_tokens[op.hyp_index])
            inss += 1
        else:
            dels += 1
    return FixOutcome(
        status=FixStatus.FIXED,
        fixed_text=detokenize(out),
        wer_ref_vs_hyp=rate,
        substitutions_taken=subs,
        insertions_taken=inss,
        deletions_applied=dels,
    )


def dual_head_arbitrate(
    hyp_primary: str,
    hyp_secondary: str,
    hint: str = "auto",
    accept_threshold: float = 0.5,
) -> DualHeadDecision:
    """Accept the primary transcript iff the heads agree closely enough.

    cross_wer treats the primary as reference and the secondary as
    hypothesis; acceptance is strict (cross_wer < accept_threshold). An
    empty primary against a non-empty secondary has infinite cross_wer
    and is always rejected.
    """
    ref_tokens = tokenize(hyp_primary, hint).tokens
    hyp_tokens = tokenize(hyp_secondary, hint).tokens
    cross = WerReport.from_alignment(edit_align(ref_tokens, hyp_tokens)).wer
    accepted = cross < accept_threshold
    return DualHeadDecision(
        chosen=hyp_primary if accepted else "",
        cross_wer=cross,
        accepted=accepted,
    )


def filter_dataset(
    entries: Sequence[ManifestEntry], max_wer: float
) -> tuple[list[ManifestEntry], list[ManifestEntry]]:
    """Split entries into (kept, dropped) by strict wer_estimate < max_wer.

    Entries with a null wer_estimate are dropped; both lists preserve the
    input order.
    """
    kept: list[ManifestEntry] = []
    dropped: list[ManifestEntry] = []
    for entry in entries:
        if entry.wer_estimate is not None and entry.wer_estimate < max_wer:
            kept.append(entry)
        else:
            dropped.append(entry)
    return kept, dropped
