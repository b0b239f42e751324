from __future__ import annotations

import math
import random

import pytest

from oracles import edit_cost_oracle
from conftest import random_tokens
from songstruct.model import EditKind
from songstruct.textmetrics import WerReport, corpus_wer, edit_align, tokenize, wer


# ---------------------------------------------------------------- tokenize


def test_tokenize_latin_lowercases_and_strips_punctuation():
    assert tokenize("Hello, WORLD!").tokens == ("hello", "world")
    assert tokenize("don't stop").tokens == ("don", "t", "stop")


def test_tokenize_cjk_chars_become_single_tokens():
    assert tokenize("我爱你 baby").tokens == ("我", "爱", "你", "baby")
    assert tokenize("夜空のムコウ").tokens == ("夜", "空", "の", "ム", "コ", "ウ")


def test_tokenize_latin_hint_disables_cjk_splitting():
    assert tokenize("我爱你 baby", hint="latin").tokens == ("我爱你", "baby")


def test_tokenize_cjk_hint_still_splits_latin_on_spaces():
    assert tokenize("ab 我", hint="cjk").tokens == ("ab", "我")


def test_tokenize_empty_and_separator_only():
    assert tokenize("").tokens == ()
    assert tokenize("  ... !!! ").tokens == ()


def test_tokenize_rejects_unknown_hint():
    with pytest.raises(ValueError):
        tokenize("x", hint="klingon")


def test_tokenize_idempotent_under_space_join():
    rng = random.Random(101)
    pool = ["Hello,", "WORLD", "我爱你", "baby's", "écho", "12時", "---", "ok?"]
    for _ in range(200):
        text = " ".join(rng.choice(pool) for _ in range(rng.randint(0, 6)))
        once = tokenize(text).tokens
        again = tokenize(" ".join(once)).tokens
        assert again == once


def test_tokenize_records_hint():
    assert tokenize("a", hint="cjk").language_hint == "cjk"


# -------------------------------------------------------------- edit_align


def test_align_identical():
    alignment = edit_align(("a", "b"), ("a", "b"))
    assert [op.kind for op in alignment.ops] == [EditKind.MATCH, EditKind.MATCH]
    assert alignment.edit_cost == 0


def test_align_worked_example():
    # ref "a b c d" vs hyp "a x c": one substitution, one deletion.
    alignment = edit_align(("a", "b", "c", "d"), ("a", "x", "c"))
    assert alignment.substitutions == 1
    assert alignment.deletions == 1
    assert alignment.insertions == 0
    kinds = [op.kind for op in alignment.ops]
    assert kinds == [
        EditKind.MATCH,
        EditKind.SUBSTITUTE,
        EditKind.MATCH,
        EditKind.DELETE,
    ]


def test_align_empty_sides():
    assert edit_align((), ()).ops == ()
    alignment = edit_align((), ("x", "y"))
    assert alignment.insertions == 2
    alignment = edit_align(("x", "y"), ())
    assert alignment.deletions == 2


def test_align_op_indices_cover_both_sequences():
    rng = random.Random(7)
    for _ in range(200):
        ref = random_tokens(rng)
        hyp = random_tokens(rng)
        alignment = edit_align(ref, hyp)
        ref_seen = [op.ref_index for op in alignment.ops if op.ref_index is not None]
        hyp_seen = [op.hyp_index for op in alignment.ops if op.hyp_index is not None]
        assert ref_seen == list(range(len(ref)))
        assert hyp_seen == list(range(len(hyp)))
        for op in alignment.ops:
            if op.kind == EditKind.MATCH:
                assert ref[op.ref_index] == hyp[op.hyp_index]
            elif op.kind == EditKind.SUBSTITUTE:
                assert ref[op.ref_index] != hyp[op.hyp_index]
            elif op.kind == EditKind.DELETE:
                assert op.hyp_index is None
            else:
                assert op.ref_index is None


def test_align_cost_matches_recursive_oracle():
    rng = random.Random(12345)
    for _ in range(1000):
        ref = random_tokens(rng)
        hyp = random_tokens(rng)
        alignment = edit_align(ref, hyp)
        assert alignment.edit_cost == edit_cost_oracle(ref, hyp), (ref, hyp)


def test_align_cost_symmetry():
    # Total cost is symmetric (the decomposition into S/D/I need not be:
    # optimal alignments are not unique). Within one alignment the counts
    # must still account for both sequence lengths.
    rng = random.Random(99)
    for _ in range(300):
        ref = random_tokens(rng)
        hyp = random_tokens(rng)
        fwd = edit_align(ref, hyp)
        rev = edit_align(hyp, ref)
        assert fwd.edit_cost == rev.edit_cost
        assert fwd.deletions - fwd.insertions == len(ref) - len(hyp)
        assert rev.deletions - rev.insertions == len(hyp) - len(ref)


def test_align_triangle_inequality():
    rng = random.Random(3)
    for _ in range(200):
        a = random_tokens(rng, max_len=8)
        b = random_tokens(rng, max_len=8)
        c = random_tokens(rng, max_len=8)
        ab = edit_align(a, b).edit_cost
        bc = edit_align(b, c).edit_cost
        ac = edit_align(a, c).edit_cost
        assert ac <= ab + bc


def test_align_deterministic():
    rng = random.Random(8)
    for _ in range(100):
        ref = random_tokens(rng)
        hyp = random_tokens(rng)
        assert edit_align(ref, hyp) == edit_align(ref, hyp)


# --------------------------------------------------------------------- wer


def test_wer_worked_example():
    report = wer("a b c d", "a x c")
    assert report.substitutions == 1
    assert report.deletions == 1
    assert report.insertions == 0
    assert report.ref_len == 4
    assert report.wer == 0.5


def test_wer_normalizes_case_and_punctuation():
    assert wer("Hello, world!", "hello world").wer == 0.0


def test_wer_empty_ref_empty_hyp():
    assert wer("", "").wer == 0.0


def test_wer_empty_ref_nonempty_hyp():
    report = wer("", "a b")
    assert math.isinf(report.wer)
    assert report.insertions == 2


def test_wer_can_exceed_one():
    assert wer("a", "x y z").wer == 3.0


def test_wer_cjk_is_per_character():
    report = wer("我爱你", "我恨你", hint="auto")
    assert report.ref_len == 3
    assert report.substitutions == 1


def test_corpus_wer_pools_counts():
    # (S+D+I, N) of (1, 4) and (0, 6) pool to 1/10, not the mean of rates.
    pooled = corpus_wer(
        [
            ("a b c d", "a x c d", "latin"),
            ("p q r s t u", "p q r s t u", "latin"),
        ]
    )
    assert pooled.wer == 0.1
    assert pooled.ref_len == 10
    assert pooled.pairs == 2


def test_corpus_wer_empty_iterable():
    pooled = corpus_wer([])
    assert pooled.pairs == 0
    assert pooled.wer == 0.0


def test_wer_report_from_alignment():
    report = WerReport.from_alignment(edit_align(("a", "b"), ("a", "c")))
    assert (report.substitutions, report.ref_len) == (1, 2)
