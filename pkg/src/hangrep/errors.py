"""Exception types shared across the package."""

from __future__ import annotations

__all__ = [
    "HangrepError",
    "QueryError",
    "UnsupportedOperatorError",
    "IndexFormatError",
    "StaleIndexError",
]


class HangrepError(Exception):
    """Base class for errors raised by this package."""


class QueryError(HangrepError):
    """A query is malformed or cannot be evaluated."""


class UnsupportedOperatorError(QueryError):
    """The query uses an operator this engine does not evaluate."""


class IndexFormatError(HangrepError):
    """An index file is truncated, corrupt, or of an unknown version."""


class StaleIndexError(HangrepError):
    """An index no longer describes its dictionary and must be rebuilt."""
