from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Tuple, Union

from odpcheck.constraints.ast import TRUE, Expr
from odpcheck.dsl.spans import SourceSpan


def _span() -> Optional[SourceSpan]:
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Assign:
    var: str
    attr: str
    expr: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Create:
    var: str
    template: str
    inits: Mapping[str, Expr] = field(default_factory=dict)
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Delete:
    var: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Reclassify:
    var: str
    template: str
    inits: Mapping[str, Expr] = field(default_factory=dict)
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class AddLink:
    role: str
    source: str
    target: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class RemoveLink:
    role: str
    source: str
    target: str
    span: Optional[SourceSpan] = _span()


Effect = Union[Assign, Create, Delete, Reclassify, AddLink, RemoveLink]


@dataclass(frozen=True)
class DynamicRule:
    """One transition rule of a dynamic schema.

    ``participants`` pairs each variable with the template it must
    instantiate, positionally matching the action template's participants.
    """

    name: str
    action: str
    participants: Tuple[Tuple[str, str], ...]
    pre: Expr = TRUE
    effects: Tuple[Effect, ...] = ()
    post: Expr = TRUE
    span: Optional[SourceSpan] = _span()

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(v for v, _ in self.participants)

    def created_variables(self) -> Tuple[str, ...]:
        return tuple(e.var for e in self.effects if isinstance(e, Create))
