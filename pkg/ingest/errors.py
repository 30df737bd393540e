"""Typed ingest errors.

Parsers never stop at the first bad line.  Each problem becomes one
``IngestError`` carrying the 1-based line number; callers decide whether
to continue with the good records or call ``raise_for_errors()``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Generic, TypeVar


class IngestError(Exception):
    """Base class for a single rejected input line."""

    def __init__(self, line_no: int, detail: str) -> None:
        self.line_no = line_no
        self.detail = detail
        super().__init__(f"line {line_no}: {type(self).__name__}: {detail}")

    def to_dict(self) -> dict[str, object]:
        return {"line_no": self.line_no, "error": type(self).__name__, "detail": self.detail}


class MalformedLine(IngestError):
    """Wrong number of delimited fields."""


class UnknownAttackLabel(IngestError):
    """Attack label outside the taxonomy, or a category/specific mismatch."""


class MalformedFrame(IngestError):
    """Frame field is not hex-decodable."""


class BadTimestamp(IngestError):
    """Timestamp missing, non-numeric or negative."""


class BadSeverity(IngestError):
    """Alert severity is not a number."""


class ReliabilityOutOfRange(IngestError):
    """Alert reliability outside [0, 1] or non-numeric."""


class HeaderDataArityMismatch(IngestError):
    """Data row field count differs from the declared attribute count."""


class UndeclaredAttribute(IngestError):
    """Data before any attribute declaration, or a nominal value never declared."""


class NonNumericValueForNumericAttribute(IngestError):
    """Non-numeric token in an integer/real column."""


class ArffHeaderError(IngestError):
    """Structurally invalid ARFF header (unknown keyword, bad type, duplicates)."""


class SchemaMismatch(ValueError):
    """A feature schema names columns the input format cannot supply."""


class IngestViolation(Exception):
    """Raised when a parse produced one or more line errors.

    Contains the structured list of errors so callers can format them
    however they like (CLI table, JSON report, etc.).
    """

    def __init__(self, source: str, errors: list[IngestError]) -> None:
        self.source = source
        self.errors = errors
        lines = [f"  ✗ {e}" for e in errors[:20]]
        if len(errors) > 20:
            lines.append(f"  … {len(errors) - 20} more")
        super().__init__(
            f"{len(errors)} malformed line(s) in {source}:\n" + "\n".join(lines)
        )


T = TypeVar("T")


@dataclass
class ParseResult(Generic[T]):
    """Records in file order plus the errors for rejected lines."""
    records: list[T] = field(default_factory=list)
    errors: list[IngestError] = field(default_factory=list)
    source: str = "<stream>"

    @property
    def ok(self) -> bool:
        return not self.errors

    def raise_for_errors(self) -> None:
        if self.errors:
            raise IngestViolation(self.source, self.errors)
