"""Exception types shared across the toolkit."""

from __future__ import annotations

from typing import Iterable


class SongstructError(Exception):
    """Base class for all toolkit errors."""


class ParseError(SongstructError):
    """A structured-lyrics line that does not match the grammar."""

    def __init__(self, message: str, line: int, col: int = 1):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class SchemaError(SongstructError):
    """A JSON document with a missing or ill-typed field."""


class ValidationError(SongstructError):
    """An annotation that violates its structural invariants."""


class UnknownLabel(SongstructError):
    """A source label absent from the mapping or label vocabulary."""


class InvalidInput(SongstructError):
    """An operation precondition violated by the caller."""


class ConfigError(SongstructError):
    """A pipeline configuration that cannot be used."""


class MissingGold(SongstructError):
    """Hypothesis song ids with no gold annotation."""

    def __init__(self, song_ids: Iterable[str]):
        self.song_ids = tuple(sorted(song_ids))
        super().__init__("no gold annotation for: " + ", ".join(self.song_ids))
