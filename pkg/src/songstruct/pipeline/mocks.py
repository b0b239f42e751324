"""Deterministic mock backends for every pipeline stage.

Outputs are pure functions of (op, song_id, span, text, seed), derived
from SHA-256 so independent implementations can reproduce them byte for
byte. The derivation tables:

  h32(key)   = first 4 bytes of SHA-256(UTF-8 key), big-endian unsigned
  tenths(x)  = floor(x * 10 + 0.5)          (span seconds -> integer tenths)
  bump(t)    = t + 1 if t % 10 == 0 else t  (emitted times never integral)
  sec(t)     = 0 if t == 0 else t / 10      (tenths -> emitted seconds)

separate: every stem (bass, drums, other, vocals) maps to the input
audio path unchanged.

structure: h = h32("{seed}:structure:{song_id}"); the song opens with a
"start" span [0, 12 + h % 7 tenths], then n = 3 + (h >> 8) % 3 sections
labeled per the cycle (verse, chorus, solo, verse, bridge), section i
running 180 + ((h >> 3i) % 160) tenths with its end bumped; an "end"
span of 95 tenths (bumped) closes the song.

transcribe: ts, te = tenths(span); base = h32("words:{song_id}:{ts}:{te}")
(seed-independent so two heads mostly agree); n = 6 + base % 7 words;
word i starts as BASE_WORDS[(base * (i+1)) % 12], and is replaced by
ALT_WORDS[hs % 12] when hs = h32("{seed}:sub:{song_id}:{ts}:{te}:{i}")
has hs % 8 == 0. Words are joined with single spaces.

align: words = whitespace-split of the request text; with n words and
avail = te - ts tenths, empty when n == 0 or avail < 3n. Otherwise
h = h32("{seed}:align:{song_id}:{ts}:{te}"), lead = (h % 3) * 25,
tail = ((h >> 4) % 2) * 23 (both dropped if floor((avail-lead-tail)/n)
< 8), slot = floor((avail-lead-tail)/n), wlen = max(1, min(3*slot//4,
slot - 2)); word k spans [bump(ts + lead + k*slot), bump(start + wlen)]
with score (100 + h32("{seed}:score:{song_id}:{ts}:{te}:{k}") % 899)/1000.

Request validation: song_id, op, and audio_path must be strings; span
(required for transcribe and align) must be a two-number array; text
(required for align) must be a string. Violations yield ok=false with
error "malformed request: ...". Failure injection: a failing (song_id,
op) yields ok=false with error "injected failure for {op}"; an
unrecognized op yields "unknown op: {op}".
"""

from __future__ import annotations

import hashlib
from typing import Any, Mapping

OPS = ("separate", "structure", "transcribe", "align")

STEM_NAMES = ("bass", "drums", "other", "vocals")

LEGACY_SECTION_CYCLE = ("verse", "chorus", "solo", "verse", "bridge")

BASE_WORDS = (
    "shine",
    "river",
    "echo",
    "night",
    "fire",
    "golden",
    "memory",
    "falling",
    "summer",
    "stone",
    "wonder",
    "home",
)

ALT_WORDS = (
    "la",
    "oh",
    "yeah",
    "baby",
    "time",
    "light",
    "heart",
    "dream",
    "road",
    "rain",
    "sky",
    "sound",
)


def h32(key: str) -> int:
    return int.from_bytes(hashlib.sha256(key.encode("utf-8")).digest()[:4], "big")


def tenths(x: float) -> int:
    return int(x * 10 + 0.5)


def _bump(t: int) -> int:
    return t + 1 if t % 10 == 0 else t


def _sec(t: int):
    return 0 if t == 0 else t / 10


def mock_separate(song_id: str, audio_path: str, seed: int) -> dict:
    return {"stems": {name: audio_path for name in STEM_NAMES}}


def mock_structure(song_id: str, seed: int) -> dict:
    h = h32(f"{seed}:structure:{song_id}")
    t1 = 12 + h % 7
    n = 3 + (h >> 8) % 3
    segments = [{"label": "start", "start_s": _sec(0), "end_s": _sec(t1)}]
    cur = t1
    for i in range(n):
        length = 180 + ((h >> (3 * i)) % 160)
        end = _bump(cur + length)
        segments.append(
            {"label": LEGACY_SECTION_CYCLE[i], "start_s": _sec(cur), "end_s": _sec(end)}
        )
        cur = end
    close = _bump(cur + 95)
    segments.append({"label": "end", "start_s": _sec(cur), "end_s": _sec(close)})
    return {"segments": segments}


def _span_tenths(span) -> tuple[int, int]:
    if not span:
        return 0, 0
    return tenths(span[0]), tenths(span[1])


def mock_transcribe(song_id: str, span, seed: int) -> dict:
    ts, te = _span_tenths(span)
    base = h32(f"words:{song_id}:{ts}:{te}")
    n = 6 + base % 7
    words = []
    for i in range(n):
        word = BASE_WORDS[(base * (i + 1)) % 12]
        hs = h32(f"{seed}:sub:{song_id}:{ts}:{te}:{i}")
        if hs % 8 == 0:
            word = ALT_WORDS[hs % 12]
        words.append(word)
    return {"text": " ".join(words)}


def mock_align(song_id: str, span, text: str, seed: int) -> dict:
    ts, te = _span_tenths(span)
    words = text.split()
    n = len(words)
    avail = te - ts
    if n == 0 or avail < 3 * n:
        return {"words": []}
    h = h32(f"{seed}:align:{song_id}:{ts}:{te}")
    lead = (h % 3) * 25
    tail = ((h >> 4) % 2) * 23
    if (avail - lead - tail) // n < 8:
        lead = 0
        tail = 0
    slot = (avail - lead - tail) // n
    wlen = max(1, min((slot * 3) // 4, slot - 2))
    out = []
    for k, word in enumerate(words):
        start = _bump(ts + lead + k * slot)
        end = _bump(start + wlen)
        score = (100 + h32(f"{seed}:score:{song_id}:{ts}:{te}:{k}") % 899) / 1000
        out.append({"word": word, "start_s": _sec(start), "end_s": _sec(end), "score": score})
    return {"words": out}


def _error(song_id: str, message: str) -> dict:
    return {"song_id": song_id, "ok": False, "error": message}


def handle_request(
    obj: Any, seed: int, fail: Mapping[str, frozenset | None] | None = None
) -> dict:
    """Answer one decoded request object with a response object.

    ``fail`` maps song_id to the set of ops to reject for it (None
    rejects every op). Malformed requests never raise; they come back as
    ok=false responses.
    """
    if not isinstance(obj, dict):
        return _error("", "malformed request: not an object")
    song_id = obj.get("song_id")
    if not isinstance(song_id, str):
        return _error("", "malformed request: missing song_id")
    op = obj.get("op")
    if not isinstance(op, str):
        return _error(song_id, "malformed request: missing op")
    audio_path = obj.get("audio_path")
    if not isinstance(audio_path, str):
        return _error(song_id, "malformed request: missing audio_path")
    span = obj.get("span")
    span_bad = span is not None and (
        not isinstance(span, (list, tuple))
        or len(span) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in span)
    )
    if span_bad or (span is None and op in ("transcribe", "align")):
        return _error(song_id, "malformed request: bad span")
    text = obj.get("text")
    if not isinstance(text, str) and (text is not None or op == "align"):
        return _error(song_id, "malformed request: bad text")

    if fail:
        ops = fail.get(song_id, frozenset())
        if ops is None or op in ops:
            return _error(song_id, f"injected failure for {op}")

    if op == "separate":
        payload = mock_separate(song_id, audio_path, seed)
    elif op == "structure":
        payload = mock_structure(song_id, seed)
    elif op == "transcribe":
        payload = mock_transcribe(song_id, span, seed)
    elif op == "align":
        payload = mock_align(song_id, span, text, seed)
    else:
        return _error(song_id, f"unknown op: {op}")
    return {"song_id": song_id, "ok": True, "payload": payload}
