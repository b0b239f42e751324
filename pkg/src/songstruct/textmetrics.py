"""Tokenization and word-error-rate metrics for lyric text.

The tokenizer casefolds, treats punctuation and symbols as separators,
splits CJK into single-character tokens, and keeps other letter/digit
runs as word tokens. WER counts substitutions, deletions, and insertions
from a minimal unit-cost edit alignment against the reference.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import EditAlignment, EditKind, EditOp, TokenSequence

# Codepoint ranges treated as CJK for single-character tokenization.
# Covers the unified ideograph blocks plus kana; Hangul syllables are
# included since Korean lyrics are also scored per syllable block.
_CJK_RANGES = (
    (0x3040, 0x30FF),  # hiragana, katakana
    (0x3400, 0x4DBF),  # CJK extension A
    (0x4E00, 0x9FFF),  # CJK unified ideographs
    (0xAC00, 0xD7A3),  # Hangul syllables
    (0xF900, 0xFAFF),  # CJK compatibility ideographs
    (0x20000, 0x2A6DF),  # CJK extension B
)

TOKENIZER_HINTS = ("auto", "cjk", "latin")


def is_cjk_char(ch: str) -> bool:
    cp = ord(ch)
    for lo, hi in _CJK_RANGES:
        if lo <= cp <= hi:
            return True
    return False


def _is_separator(ch: str) -> bool:
    if ch.isspace():
        return True
    cat = unicodedata.category(ch)
    return cat.startswith("P") or cat.startswith("S")


def tokenize(text: str, hint: str = "auto") -> TokenSequence:
    """Split lyric text into scoring tokens.

    ``hint`` selects the splitting regime: "cjk" forces single-character
    tokens for CJK codepoints, "latin" disables that (CJK characters then
    behave like ordinary letters and stay inside runs), and "auto" applies
    the per-codepoint CJK rule wherever such characters appear. Punctuation
    and symbol characters always separate tokens and are never emitted.
    """
    if hint not in TOKENIZER_HINTS:
        raise ValueError(f"unknown tokenizer hint {hint!r}")
    folded = text.casefold()
    split_cjk = hint in ("auto", "cjk")

    tokens: list[str] = []
    run: list[str] = []

    def flush():
        if run:
            tokens.append("".join(run))
            run.clear()

    for ch in folded:
        if _is_separator(ch):
            flush()
        elif split_cjk and is_cjk_char(ch):
            flush()
            tokens.append(ch)
        else:
            run.append(ch)
    flush()
    return TokenSequence(tokens=tuple(tokens), language_hint=hint)


def edit_align(ref: Sequence[str], hyp: Sequence[str]) -> EditAlignment:
    """Compute a minimal unit-cost edit alignment from ref to hyp.

    Unit costs for substitute, delete, and insert; matches are free. The
    backtrace is deterministic: scanning from the end of both sequences,
    prefer match, then substitute, then delete, then insert at equal cost,
    so the same input pair always yields the same op sequence.
    """
    ref = list(ref)
    hyp = list(hyp)
    n, m = len(ref), len(hyp)

    # dist[i][j] = edit cost between ref[:i] and hyp[:j]
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = i
    for j in range(1, m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        row = dist[i]
        prev = dist[i - 1]
        ri = ref[i - 1]
        for j in range(1, m + 1):
            best = prev[j - 1] + (0 if ri == hyp[j - 1] else 1)
            dele = prev[j] + 1
            if dele < best:
                best = dele
            ins = row[j - 1] + 1
            if ins < best:
                best = ins
            row[j] = best

    ops: list[EditOp] = []
    subs = dels = inss = 0
    i, j = n, m
    while i > 0 or j > 0:
        if (
            i > 0
            and j > 0
            and ref[i - 1] == hyp[j - 1]
            and dist[i][j] == dist[i - 1][j - 1]
        ):
            ops.append(EditOp(EditKind.MATCH, i - 1, j - 1))
            i -= 1
            j -= 1
        elif i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + 1:
            ops.append(EditOp(EditKind.SUBSTITUTE, i - 1, j - 1))
            subs += 1
            i -= 1
            j -= 1
        elif i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            ops.append(EditOp(EditKind.DELETE, i - 1, None))
            dels += 1
            i -= 1
        else:
            ops.append(EditOp(EditKind.INSERT, None, j - 1))
            inss += 1
            j -= 1
    ops.reverse()
    return EditAlignment(
        ops=tuple(ops),
        substitutions=subs,
        deletions=dels,
        insertions=inss,
        ref_len=n,
    )


@dataclass(frozen=True)
class WerReport:
    """WER error counts and the rate they pool to.

    ``wer`` is (S+D+I)/N. With an empty reference there is no denominator:
    the rate is 0.0 when the hypothesis side contributed nothing, and the
    +infinity sentinel otherwise (pure insertion against nothing).
    """

    substitutions: int
    deletions: int
    insertions: int
    ref_len: int
    pairs: int = 1

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def wer(self) -> float:
        if self.ref_len == 0:
            return 0.0 if self.errors == 0 else float("inf")
        return self.errors / self.ref_len

    @classmethod
    def from_alignment(cls, a: EditAlignment, pairs: int = 1) -> "WerReport":
        return cls(
            substitutions=a.substitutions,
            deletions=a.deletions,
            insertions=a.insertions,
            ref_len=a.ref_len,
            pairs=pairs,
        )


def wer(ref: str, hyp: str, hint: str = "auto") -> WerReport:
    """Tokenize both texts under ``hint``, align, and report the WER."""
    ref_tokens = tokenize(ref, hint).tokens
    hyp_tokens = tokenize(hyp, hint).tokens
    return WerReport.from_alignment(edit_align(ref_tokens, hyp_tokens))


def corpus_wer(pairs: Iterable[tuple[str, str, str]]) -> WerReport:
    """Pool WER over (ref, hyp, hint) text triples.

    Error counts and reference lengths are summed across pairs and divided
    once, so songs weigh by reference length rather than each contributing
    one averaged rate. Empty-reference pairs contribute their hypothesis
    length as insertions with no denominator, keeping the pooled quotient
    well-defined.
    """
    subs = dels = inss = ref_len = count = 0
    for ref, hyp, hint in pairs:
        a = edit_align(tokenize(ref, hint).tokens, tokenize(hyp, hint).tokens)
        subs += a.substitutions
        dels += a.deletions
        inss += a.insertions
        ref_len += a.ref_len
        count += 1
    return WerReport(
        substitutions=subs,
        deletions=dels,
        insertions=inss,
        ref_len=ref_len,
        pairs=count,
    )
