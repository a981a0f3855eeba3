from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional


@dataclass(frozen=True, order=True)
class SourceSpan:
    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __post_init__(self):
        if (self.start_line, self.start_col) > (self.end_line, self.end_col):
            raise ValueError(f"span start after end: {self}")

    def merge(self, other: Optional["SourceSpan"]) -> "SourceSpan":
        if other is None:
            return self
        return SourceSpan(self.file, self.start_line, self.start_col, other.end_line, other.end_col)

    def to_dict(self) -> dict:
        return {
            "file": self.file,
            "startLine": self.start_line,
            "startCol": self.start_col,
            "endLine": self.end_line,
            "endCol": self.end_col,
        }

    def __str__(self) -> str:
        return f"{self.file}:{self.start_line}:{self.start_col}"


class Severity(str, Enum):
    ERROR = "ERROR"
    WARNING = "WARNING"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    span: SourceSpan
    message: str

    def to_dict(self) -> dict:
        return {"severity": self.severity.value, "span": self.span.to_dict(), "message": self.message}


@dataclass
class ParseReport:
    """Diagnostics collected while parsing one file. Failure iff any ERROR entry."""

    entries: List[Diagnostic] = field(default_factory=list)

    def error(self, span: SourceSpan, message: str) -> None:
        self.entries.append(Diagnostic(Severity.ERROR, span, message))

    def warning(self, span: SourceSpan, message: str) -> None:
        self.entries.append(Diagnostic(Severity.WARNING, span, message))

    @property
    def errors(self) -> List[Diagnostic]:
        return [d for d in self.entries if d.severity is Severity.ERROR]

    @property
    def warnings(self) -> List[Diagnostic]:
        return [d for d in self.entries if d.severity is Severity.WARNING]

    @property
    def failed(self) -> bool:
        return any(d.severity is Severity.ERROR for d in self.entries)

    def __str__(self) -> str:
        return "\n".join(f"{d.severity.value} {d.span}: {d.message}" for d in self.entries)
