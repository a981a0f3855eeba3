from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Tuple

from odpcheck.dsl.spans import SourceSpan


class RuleId(str, Enum):
    W1 = "W1"
    W2 = "W2"
    W3 = "W3"
    W4 = "W4"
    W5 = "W5"
    W6 = "W6"
    W7 = "W7"
    W8 = "W8"
    W9 = "W9"
    I1 = "I1"
    I2 = "I2"
    I3 = "I3"
    I4 = "I4"
    I5 = "I5"
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    C4 = "C4"
    C5 = "C5"
    C6 = "C6"
    C7 = "C7"
    C8 = "C8"
    S1 = "S1"
    S2 = "S2"
    D1 = "D1"
    D2 = "D2"
    D3 = "D3"
    D4 = "D4"
    D5 = "D5"
    E1 = "E1"
    E2 = "E2"
    E3 = "E3"
    E4 = "E4"
    E5 = "E5"

    @property
    def rank(self) -> int:
        return _RANK[self]

    @classmethod
    def parse_list(cls, text: str) -> frozenset:
        """``"W1, C6"`` -> ``{RuleId.W1, RuleId.C6}``; unknown ids raise ``ValueError``."""
        out = set()
        for item in text.split(","):
            item = item.strip().upper()
            if not item:
                continue
            try:
                out.add(cls(item))
            except ValueError:
                raise ValueError(f"unknown rule id {item}") from None
        return frozenset(out)


_RANK: Dict[RuleId, int] = {r: i for i, r in enumerate(RuleId)}

CATALOG: Dict[RuleId, str] = {
    RuleId.W1: "every dynamic schema referenced by a template is in the model's specifier",
    RuleId.W2: "every static schema referenced by a template is in the model's describer",
    RuleId.W3: "every invariant schema referenced by a template is in the model's constrainer",
    RuleId.W4: "every action referenced by a template is a declared action template",
    RuleId.W5: "every type referenced by an object or action template is declared",
    RuleId.W6: "declared subtypes exist, declare the supertype back, and form no cycle",
    RuleId.W7: "declared supertypes exist, declare the subtype back, and form no cycle",
    RuleId.W8: "an action template's start state differs from its end state",
    RuleId.W9: "no template is its own parent or ancestor",
    RuleId.I1: "link endpoints are objects of the system",
    RuleId.I2: "links are unique per (source, target, role)",
    RuleId.I3: "when time points exist, every object has a state at each of them",
    RuleId.I4: "a precondition binds the start state of its step",
    RuleId.I5: "a postcondition binds the end state of its step",
    RuleId.C1: "an object's templates are one template plus all its ancestors",
    RuleId.C2: "link endpoints instantiate the role's source and target templates",
    RuleId.C3: "the model declares every template the objects instantiate",
    RuleId.C4: "the model declares every type referenced by templates in use",
    RuleId.C5: "the model declares every role the links instantiate",
    RuleId.C6: "link counts respect role cardinality bounds",
    RuleId.C7: "a link whose role has an inverse has exactly one reverse link",
    RuleId.C8: "a declared subtype's class is included in its supertype's class",
    RuleId.S1: "invariant schemas hold on the system",
    RuleId.S2: "static schemas hold at their time point",
    RuleId.D1: "each step is an enabled rule whose effects yield the next snapshot",
    RuleId.D2: "invariant schemas hold at every snapshot",
    RuleId.D3: "static schemas hold at the snapshot of their time point",
    RuleId.D4: "created, deleted and reclassified objects match the rule's effects",
    RuleId.D5: "elements no effect names are unchanged between snapshots",
    RuleId.E1: "containment is a strict node/capsule/cluster tree",
    RuleId.E2: "containment names only objects of the system",
    RuleId.E3: "managed engineering objects are placed in a cluster",
    RuleId.E4: "travel records name known entities and nodes",
    RuleId.E5: "software entities carry a complete payload",
}


@dataclass(frozen=True)
class Violation:
    rule: RuleId
    subjects: Tuple[str, ...]
    message: str
    span: Optional[SourceSpan] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.subjects:
            raise ValueError(f"{self.rule.value} violation without subjects")
        object.__setattr__(self, "subjects", tuple(self.subjects))

    @property
    def sort_key(self) -> Tuple[int, Tuple[str, ...], str]:
        return (self.rule.rank, self.subjects, self.message)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rule": self.rule.value,
            "subjects": list(self.subjects),
            "span": self.span.to_dict() if self.span else None,
            "message": self.message,
        }


def sort_violations(violations: Iterable[Violation]) -> List[Violation]:
    return sorted(violations, key=lambda v: v.sort_key)


def filter_rules(violations: Iterable[Violation], rules: Optional[Iterable[RuleId]]) -> List[Violation]:
    if not rules:
        return list(violations)
    wanted = set(rules)
    return [v for v in violations if v.rule in wanted]


def rotate_cycle(cycle: List[str]) -> Tuple[str, ...]:
    """Canonical rotation of a cycle: start at its smallest node."""
    i = cycle.index(min(cycle))
    return tuple(cycle[i:] + cycle[:i])
