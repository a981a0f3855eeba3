from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from odpcheck.checks.rules import Violation
from odpcheck.dsl.spans import Diagnostic
from odpcheck.metamodel import Model


@dataclass
class StageStats:
    name: str
    details: Dict[str, Any] = field(default_factory=dict)


@dataclass
class InputResult:
    """Everything the stages learn about one input file."""

    path: Path
    value: Any = None  # Model | System | Trace once parsed
    model: Optional[Model] = None
    diagnostics: List[Diagnostic] = field(default_factory=list)
    violations: List[Violation] = field(default_factory=list)
    error: Optional[str] = None  # parse, resolution or I/O failure
    output_text: Optional[str] = None  # canonical text (fmt) or trace (simulate)
    changed: bool = False

    @property
    def failed(self) -> bool:
        return self.error is not None

    @property
    def usable(self) -> bool:
        return not self.failed and self.value is not None


@dataclass
class RunContext:
    inputs: List[InputResult] = field(default_factory=list)
    stats: List[StageStats] = field(default_factory=list)

    def add_stats(self, name: str, **details):
        self.stats.append(StageStats(name=name, details=details))

    def usable(self) -> List[InputResult]:
        return [item for item in self.inputs if item.usable]

    @property
    def any_error(self) -> bool:
        return any(item.failed for item in self.inputs)

    def violations(self) -> List[Violation]:
        return [v for item in self.inputs for v in item.violations]
