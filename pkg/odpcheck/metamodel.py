"""Model-language vocabulary: templates, actions, types, roles and schemas.

All classes are frozen dataclasses; collections keyed by name are plain
mappings, so structural equality ignores declaration order. Source spans are
kept for diagnostics and excluded from equality.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import TYPE_CHECKING, Dict, FrozenSet, Iterable, Mapping, Optional, Tuple

import networkx as nx

from odpcheck.constraints.ast import TRUE, DomainKind, Expr
from odpcheck.dsl.spans import SourceSpan
from odpcheck.dynamics.schema import DynamicRule
from odpcheck.engineering.tags import EngineeringTag
from odpcheck.errors import CyclicInheritance, UnknownTemplate
from odpcheck.sorts import Sort

if TYPE_CHECKING:
    from odpcheck.instance import System


def _span() -> Optional[SourceSpan]:
    return field(default=None, compare=False, repr=False)


class CountingScope(str, Enum):
    GLOBAL = "global"
    PER_SOURCE = "per-source"


class ActionKind(str, Enum):
    INTERNAL = "internal"
    INTERACTION = "interaction"


@dataclass(frozen=True)
class ObjectTemplate:
    name: str
    parents: FrozenSet[str] = frozenset()
    attributes: Mapping[str, Sort] = field(default_factory=dict)
    types: FrozenSet[str] = frozenset()
    actions: FrozenSet[str] = frozenset()
    dynamic_schemas: FrozenSet[str] = frozenset()
    static_schemas: FrozenSet[str] = frozenset()
    invariant_schemas: FrozenSet[str] = frozenset()
    tags: FrozenSet[EngineeringTag] = frozenset()
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ActionTemplate:
    name: str
    participants: Tuple[str, ...]
    start_label: str
    end_label: str
    types: FrozenSet[str] = frozenset()
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        if not self.participants:
            raise ValueError(f"action template {self.name} needs at least one participant")


@dataclass(frozen=True)
class Type:
    """A predicate over one bound object named ``self``."""

    name: str
    predicate: Expr = TRUE
    declared_subtypes: FrozenSet[str] = frozenset()
    declared_supertypes: FrozenSet[str] = frozenset()
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Role:
    name: str
    source_templates: FrozenSet[str]
    target_templates: FrozenSet[str]
    lower_bound: int = 0
    upper_bound: Optional[int] = None  # None is unbounded
    inverse: Optional[str] = None
    scope: CountingScope = CountingScope.GLOBAL
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        if self.lower_bound < 0:
            raise ValueError(f"role {self.name}: negative lower bound")
        if self.upper_bound is not None and self.lower_bound > self.upper_bound:
            raise ValueError(f"role {self.name}: lower bound exceeds upper bound")


@dataclass(frozen=True)
class InvariantSchema:
    name: str
    predicate: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class StaticSchema:
    name: str
    at_time: str
    predicate: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class DynamicSchema:
    name: str
    rules: Mapping[str, DynamicRule] = field(default_factory=dict)
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Model:
    name: str
    templates: Mapping[str, ObjectTemplate] = field(default_factory=dict)
    action_templates: Mapping[str, ActionTemplate] = field(default_factory=dict)
    types: Mapping[str, Type] = field(default_factory=dict)
    roles: Mapping[str, Role] = field(default_factory=dict)
    specifier: Mapping[str, DynamicSchema] = field(default_factory=dict)
    describer: Mapping[str, StaticSchema] = field(default_factory=dict)
    constrainer: Mapping[str, InvariantSchema] = field(default_factory=dict)
    span: Optional[SourceSpan] = _span()

    # ---- lookups -------------------------------------------------------------
    def template(self, name: str) -> ObjectTemplate:
        try:
            return self.templates[name]
        except KeyError:
            raise UnknownTemplate(name) from None

    @cached_property
    def parenthood_graph(self) -> nx.DiGraph:
        """Edges point from a template to each of its parents."""
        g = nx.DiGraph()
        for t in self.templates.values():
            g.add_node(t.name)
            for p in t.parents:
                g.add_edge(t.name, p)
        return g

    @cached_property
    def rules(self) -> Dict[str, DynamicRule]:
        out: Dict[str, DynamicRule] = {}
        for schema_name in sorted(self.specifier):
            out.update(self.specifier[schema_name].rules)
        return dict(sorted(out.items()))

    @cached_property
    def domains(self) -> Dict[str, DomainKind]:
        out = {name: DomainKind.TYPE for name in self.types}
        out.update({name: DomainKind.TEMPLATE for name in self.templates})
        return out

    def closure(self, template: str) -> FrozenSet[str]:
        return frozenset({template}) | ancestors(template, self)

    def attributes_of(self, templates: Iterable[str]) -> Dict[str, Sort]:
        """Attributes declared by the given templates (unknown names ignored)."""
        out: Dict[str, Sort] = {}
        for name in sorted(templates):
            t = self.templates.get(name)
            if t is not None:
                out.update(t.attributes)
        return out

    def children_of(self, template: str) -> FrozenSet[str]:
        return frozenset(t.name for t in self.templates.values() if template in t.parents)


def ancestors(t: str, m: Model) -> FrozenSet[str]:
    """Transitive parents of ``t``, excluding ``t``."""
    if t not in m.templates:
        raise UnknownTemplate(t)
    g = m.parenthood_graph
    try:
        cycle = nx.find_cycle(g, source=t)
    except nx.NetworkXNoCycle:
        cycle = None
    if cycle:
        raise CyclicInheritance([u for u, _ in cycle] + [cycle[-1][1]])
    return frozenset(nx.descendants(g, t))


def action_kind(a: ActionTemplate) -> ActionKind:
    return ActionKind.INTERNAL if len(a.participants) == 1 else ActionKind.INTERACTION


def extension(t: Type, s: "System", m: Optional[Model] = None) -> FrozenSet[str]:
    """The class of ``t`` in ``s``: ids of the objects satisfying its predicate.

    ``m`` is only needed when the predicate quantifies over other types.
    """
    from odpcheck.constraints.evaluate import Binding, ObjRef, eval_predicate

    members = set()
    for oid in sorted(s.objects):
        if eval_predicate(t.predicate, s, Binding({"self": ObjRef(oid)}), model=m):
            members.add(oid)
    return frozenset(members)
