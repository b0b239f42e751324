from __future__ import annotations

import random
import string
from pathlib import Path

import pytest

from songstruct.model import Segment, SongAnnotation, StructureLabel

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = Path(__file__).resolve().parent / "data"

LABELS = list(StructureLabel)


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def repo_root() -> Path:
    return REPO_ROOT


def random_annotation(
    rng: random.Random,
    song_id: str = "t",
    max_segments: int = 8,
    max_duration_s: float = 600.0,
    grid_s: float = 0.01,
    labels=None,
) -> SongAnnotation:
    """Random valid annotation with times snapped to a grid.

    Segments are sorted and non-overlapping but may leave gaps, which is
    the general (non-normalized) shape the metrics must accept.
    """
    labels = labels or LABELS
    steps = int(round(max_duration_s / grid_s))
    n = rng.randint(1, max_segments)
    # 2n distinct grid points give n non-degenerate, disjoint spans.
    points = sorted(rng.sample(range(steps + 1), 2 * n))
    segments = []
    for i in range(n):
        start = points[2 * i] * grid_s
        end = points[2 * i + 1] * grid_s
        segments.append(Segment(label=rng.choice(labels), start_s=start, end_s=end))
    return SongAnnotation(song_id=song_id, segments=segments, duration_s=max_duration_s)


def random_tokens(rng: random.Random, max_len: int = 12, alphabet: int = 4) -> tuple:
    letters = string.ascii_lowercase[:alphabet]
    return tuple(rng.choice(letters) for _ in range(rng.randint(0, max_len)))


def replay_transcript(command: list[str], timeout_s: float = 30.0) -> int:
    """Feed the recorded protocol transcript to a worker command line.

    The worker must answer every request with the recorded response,
    byte for byte. Returns the number of exchanges checked.
    """
    import json
    import subprocess

    from songstruct.formats import canonical_json

    pairs = []
    with open(DATA_DIR / "protocol" / "transcript.ndjson", encoding="utf-8") as f:
        for line in f:
            obj = json.loads(line)
            pairs.append(
                (canonical_json(obj["request"]), canonical_json(obj["response"]))
            )

    stdin = "".join(request + "\n" for request, _ in pairs)
    proc = subprocess.run(
        command, input=stdin, capture_output=True, text=True, timeout=timeout_s
    )
    assert proc.returncode == 0, proc.stderr
    got = proc.stdout.splitlines()
    assert len(got) == len(pairs), proc.stderr
    for (request, want), have in zip(pairs, got):
        assert have == want, f"for request {request}\n  want {want}\n  have {have}"
    return len(pairs)
