from __future__ import annotations

import math
import random

from conftest import random_tokens
from songstruct.model import EditKind, ManifestEntry
from songstruct.repair import (
    FixStatus,
    detokenize,
    dual_head_arbitrate,
    filter_dataset,
    fix_lyrics,
)
from songstruct.textmetrics import edit_align, tokenize, wer


# -------------------------------------------------------------- detokenize


def test_detokenize_latin_joins_with_spaces():
    assert detokenize(("hello", "world")) == "hello world"


def test_detokenize_cjk_runs_join_tightly():
    assert detokenize(("我", "爱", "你")) == "我爱你"
    assert detokenize(("我", "爱", "你", "baby")) == "我爱你 baby"
    assert detokenize(("baby", "我", "baby")) == "baby 我 baby"


def test_detokenize_empty():
    assert detokenize(()) == ""


# -------------------------------------------------------------- fix_lyrics


def test_fix_substitution_and_insertion():
    outcome = fix_lyrics("hello world again", "hello word again now")
    assert outcome.status is FixStatus.FIXED
    assert outcome.fixed_text == "hello world again now"
    assert outcome.wer_ref_vs_hyp == 2 / 3
    assert outcome.substitutions_taken == 1
    assert outcome.insertions_taken == 1
    assert outcome.deletions_applied == 0


def test_fix_applies_deletions():
    outcome = fix_lyrics("a b c d", "a x c")
    assert outcome.status is FixStatus.FIXED
    assert outcome.fixed_text == "a b c"
    assert outcome.deletions_applied == 1


def test_fix_cjk_text():
    outcome = fix_lyrics("我爱你", "我恨你 baby")
    assert outcome.status is FixStatus.FIXED
    assert outcome.fixed_text == "我爱你 baby"


def test_fix_rejects_at_threshold_exactly():
    ref = "r1 r2 r3 r4 r5 r6 r7 r8 r9 r10"
    # 7 substitutions over 10 reference tokens: wer exactly 0.7.
    hyp = "x1 x2 x3 x4 x5 x6 x7 r8 r9 r10"
    outcome = fix_lyrics(ref, hyp)
    assert outcome.status is FixStatus.REJECTED
    assert outcome.fixed_text is None
    assert outcome.wer_ref_vs_hyp == 0.7

    # One error fewer stays under the bar.
    hyp_ok = "x1 x2 x3 x4 x5 x6 r7 r8 r9 r10"
    assert fix_lyrics(ref, hyp_ok).status is FixStatus.FIXED


def test_fix_custom_threshold():
    outcome = fix_lyrics("a b c d", "a x c", reject_threshold=0.5)
    assert outcome.status is FixStatus.REJECTED


def test_fix_empty_reference_rejects_nonempty_hypothesis():
    outcome = fix_lyrics("", "la la la")
    assert outcome.status is FixStatus.REJECTED
    assert math.isinf(outcome.wer_ref_vs_hyp)


def test_fix_empty_hypothesis_rejected_when_ref_lost():
    # All-deletion alignment: wer 1.0 >= 0.7.
    assert fix_lyrics("a b c", "").status is FixStatus.REJECTED


def test_fix_both_empty():
    outcome = fix_lyrics("", "")
    assert outcome.status is FixStatus.FIXED
    assert outcome.fixed_text == ""
    assert outcome.wer_ref_vs_hyp == 0.0


def test_fix_invariants_on_random_pairs():
    rng = random.Random(4242)
    for _ in range(1000):
        ref_tokens = random_tokens(rng)
        hyp_tokens = random_tokens(rng)
        ref = " ".join(ref_tokens)
        hyp = " ".join(hyp_tokens)
        base = wer(ref, hyp)
        outcome = fix_lyrics(ref, hyp)
        if base.wer >= 0.7:
            assert outcome.status is FixStatus.REJECTED
            continue
        assert outcome.status is FixStatus.FIXED
        fixed_tokens = tokenize(outcome.fixed_text).tokens
        # Same token count as the hypothesis: timing slots are preserved.
        assert len(fixed_tokens) == len(hyp_tokens)
        # Only matches and substitutions remain against the hypothesis.
        kinds = {op.kind for op in edit_align(fixed_tokens, hyp_tokens).ops}
        assert kinds <= {EditKind.MATCH, EditKind.SUBSTITUTE}
        # Fixing never moves the text further from the reference.
        assert wer(ref, outcome.fixed_text).wer <= base.wer + 1e-12


# ------------------------------------------------------- dual_head_arbitrate


def test_arbitrate_agreeing_heads():
    decision = dual_head_arbitrate("la la la", "la la la")
    assert decision.accepted
    assert decision.chosen == "la la la"
    assert decision.cross_wer == 0.0


def test_arbitrate_rejects_at_half_exactly():
    # cross wer 0.5: 2 errors against 4 primary tokens.
    decision = dual_head_arbitrate("a b c d", "a x c")
    assert decision.cross_wer == 0.5
    assert not decision.accepted
    assert decision.chosen == ""


def test_arbitrate_accepts_below_half():
    decision = dual_head_arbitrate("a b c d", "a x c d")
    assert decision.cross_wer == 0.25
    assert decision.accepted
    assert decision.chosen == "a b c d"


def test_arbitrate_custom_threshold():
    decision = dual_head_arbitrate("a b c d", "a x c d", accept_threshold=0.25)
    assert not decision.accepted


def test_arbitrate_empty_primary_nonempty_secondary():
    decision = dual_head_arbitrate("", "la")
    assert not decision.accepted
    assert math.isinf(decision.cross_wer)


# ------------------------------------------------------------ filter_dataset


def _entry(song_id, estimate):
    return ManifestEntry(
        song_id=song_id,
        audio_path=f"{song_id}.wav",
        stage_outputs={},
        wer_estimate=estimate,
        cross_wer=None,
        timings_s={},
        status="ok",
        reject_reason=None,
    )


def test_filter_strict_threshold():
    entries = [
        _entry("a", 0.05),
        _entry("b", 0.29),
        _entry("c", 0.30),
        _entry("d", 0.55),
    ]
    kept, dropped = filter_dataset(entries, max_wer=0.3)
    assert [e.song_id for e in kept] == ["a", "b"]
    assert [e.song_id for e in dropped] == ["c", "d"]

    kept, dropped = filter_dataset(entries, max_wer=0.1)
    assert [e.song_id for e in kept] == ["a"]


def test_filter_drops_null_estimates():
    entries = [_entry("a", 0.1), _entry("b", None)]
    kept, dropped = filter_dataset(entries, max_wer=0.5)
    assert [e.song_id for e in kept] == ["a"]
    assert [e.song_id for e in dropped] == ["b"]


def test_filter_edge_thresholds():
    entries = [_entry("a", 0.0), _entry("b", 0.99)]
    kept, _ = filter_dataset(entries, max_wer=0.0)
    assert kept == []
    kept, _ = filter_dataset(entries, max_wer=math.inf)
    assert [e.song_id for e in kept] == ["a", "b"]


def test_filter_preserves_order():
    entries = [_entry(s, 0.01) for s in ("z", "m", "a")]
    kept, _ = filter_dataset(entries, max_wer=0.5)
    assert [e.song_id for e in kept] == ["z", "m", "a"]
