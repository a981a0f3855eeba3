from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Tuple

from odpcheck.dsl.spans import SourceSpan
from odpcheck.instance import ConditionBinding, System
from odpcheck.metamodel import ActionKind


@dataclass(frozen=True)
class Step:
    """One recorded transition: a rule, its participant binding and condition bindings."""

    rule: str
    binding: Mapping[str, str]
    kind: ActionKind
    conditions: Tuple[ConditionBinding, ...] = ()
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Trace:
    name: str
    model_ref: str
    snapshots: Tuple[System, ...]
    steps: Tuple[Step, ...] = ()
    seed: Optional[int] = None
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if len(self.snapshots) != len(self.steps) + 1:
            raise ValueError(
                f"trace {self.name}: {len(self.snapshots)} snapshots for {len(self.steps)} steps"
            )

    def transitions(self):
        for i, step in enumerate(self.steps):
            yield self.snapshots[i], step, self.snapshots[i + 1]
