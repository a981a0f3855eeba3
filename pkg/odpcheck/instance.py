"""Instance-language vocabulary: systems, objects, links, time points.

A ``System`` is an immutable value. Transitions (dynamics, engineering
operations) build new systems with ``dataclasses.replace``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, FrozenSet, List, Mapping, Optional, Tuple

from odpcheck.dsl.spans import SourceSpan
from odpcheck.engineering.containment import Containment, ContainmentPath
from odpcheck.sorts import Value

State = Mapping[str, Value]


def _span() -> Optional[SourceSpan]:
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ObjectInstance:
    id: str
    of: FrozenSet[str]
    state: Optional[State] = None  # None: no state recorded
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        if not self.of:
            raise ValueError(f"object {self.id} instantiates no template")


@dataclass(frozen=True)
class Link:
    id: str
    of: str
    source: str
    target: str
    span: Optional[SourceSpan] = _span()

    @property
    def key(self) -> Tuple[str, str, str]:
        return (self.of, self.source, self.target)


@dataclass(frozen=True)
class TimePoint:
    label: str
    index: int


@dataclass(frozen=True)
class StateSnapshot:
    time: TimePoint
    per_object: Mapping[str, State]


class ConditionKind(str, Enum):
    PRE = "pre"
    POST = "post"


class BoundState(str, Enum):
    START = "start"
    END = "end"


@dataclass(frozen=True)
class ConditionBinding:
    condition: ConditionKind
    rule_ref: str
    object_ref: str
    bound_state: BoundState
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class TravelRequest:
    entity: str
    source: Optional[str]
    destination: str
    # cluster the entity left; None when only the node is known
    source_path: Optional[ContainmentPath] = None
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class System:
    name: str
    model_ref: str
    objects: Mapping[str, ObjectInstance] = field(default_factory=dict)
    links: Mapping[str, Link] = field(default_factory=dict)
    time_points: Tuple[str, ...] = ()
    explicit_snapshots: Mapping[str, Mapping[str, State]] = field(default_factory=dict)
    containment: Containment = field(default_factory=Containment)
    travel_log: Tuple[TravelRequest, ...] = ()
    span: Optional[SourceSpan] = _span()

    # ---- queries ---------------------------------------------------------------
    def object_ids(self) -> List[str]:
        return sorted(self.objects)

    def objects_of(self, template: str) -> List[str]:
        return [oid for oid in sorted(self.objects) if template in self.objects[oid].of]

    def links_of(self, role: str) -> List[Link]:
        return [self.links[k] for k in sorted(self.links) if self.links[k].of == role]

    def links_touching(self, object_id: str) -> List[Link]:
        return [
            self.links[k] for k in sorted(self.links)
            if object_id in (self.links[k].source, self.links[k].target)
        ]

    def find_link(self, role: str, source: str, target: str) -> Optional[Link]:
        for k in sorted(self.links):
            if self.links[k].key == (role, source, target):
                return self.links[k]
        return None

    def snapshots(self) -> Tuple[StateSnapshot, ...]:
        out = []
        for index, label in enumerate(self.time_points):
            explicit = self.explicit_snapshots.get(label)
            per_object: Dict[str, State] = {}
            for oid, obj in sorted(self.objects.items()):
                if explicit is not None:
                    if oid in explicit:
                        per_object[oid] = explicit[oid]
                elif obj.state is not None:
                    per_object[oid] = obj.state
            out.append(StateSnapshot(TimePoint(label, index), per_object))
        return tuple(out)

    def at(self, label: str) -> "System":
        """View of the system with object states taken from the snapshot at ``label``."""
        for snap in self.snapshots():
            if snap.time.label == label:
                objects = {
                    oid: replace(obj, state=snap.per_object.get(oid))
                    for oid, obj in self.objects.items()
                }
                return replace(self, objects=objects)
        raise KeyError(f"system {self.name} has no time point {label}")

    # ---- persistent updates ----------------------------------------------------
    def with_object(self, obj: ObjectInstance) -> "System":
        return replace(self, objects={**self.objects, obj.id: obj})

    def with_link(self, link: Link) -> "System":
        return replace(self, links={**self.links, link.id: link})

    def fresh_id(self, stem: str, taken: Optional[set] = None) -> str:
        used = set(self.objects) | set(self.links) | (taken or set())
        k = 1
        while f"{stem}{k}" in used:
            k += 1
        return f"{stem}{k}"
