"""Abstract syntax of predicates.

Every node is an immutable dataclass. Source spans are carried for error
reporting but excluded from equality, so two parses of the same text in
different files compare equal.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import Callable, Iterator, Mapping, Optional, Union

from odpcheck.dsl.spans import SourceSpan
from odpcheck.sorts import Sort, Value, sort_of

ARITH_OPS = ("+", "-", "*")
COMPARE_OPS = ("=", "<>", "<", "<=", ">", ">=")
BOOL_OPS = ("and", "or", "implies")
QUANTIFIERS = ("forall", "exists")
SET_OPS = ("size", "isEmpty", "notEmpty", "includes", "excludes", "includesAll")
SET_OPS_WITH_ARG = ("includes", "excludes", "includesAll")


class DomainKind(str, Enum):
    TEMPLATE = "template"
    TYPE = "type"


class Expr:
    span: Optional[SourceSpan]

    def children(self) -> Iterator["Expr"]:
        for f in fields(self):  # type: ignore[arg-type]
            v = getattr(self, f.name)
            if isinstance(v, Expr):
                yield v


def _span() -> Optional[SourceSpan]:
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Lit(Expr):
    value: Value
    sort: Sort = field(init=False)
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        object.__setattr__(self, "sort", sort_of(self.value))


@dataclass(frozen=True)
class ObjectConst(Expr):
    object_id: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Var(Expr):
    name: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Member(Expr):
    """``target.name`` before the model tells us whether it is an attribute or a role."""

    target: Expr
    name: str
    inverse: bool = False
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Attr(Expr):
    target: Expr
    name: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Nav(Expr):
    target: Expr
    role: str
    inverse: bool = False
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Arith(Expr):
    op: str
    left: Expr
    right: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Compare(Expr):
    op: str
    left: Expr
    right: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class BoolOp(Expr):
    op: str
    left: Expr
    right: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Quant(Expr):
    kind: str
    var: str
    domain: str
    body: Expr
    domain_kind: Optional[DomainKind] = None
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class SetOp(Expr):
    op: str
    target: Expr
    arg: Optional[Expr] = None
    span: Optional[SourceSpan] = _span()


Predicate = Expr
TRUE = Lit(True)
FALSE = Lit(False)


# ---- generic traversal -------------------------------------------------------

def map_children(expr: Expr, fn: Callable[[Expr], Expr]) -> Expr:
    changes = {}
    for f in fields(expr):  # type: ignore[arg-type]
        v = getattr(expr, f.name)
        if isinstance(v, Expr):
            changes[f.name] = fn(v)
    return replace(expr, **changes) if changes else expr


def walk(expr: Expr) -> Iterator[Expr]:
    yield expr
    for child in expr.children():
        yield from walk(child)


def free_variables(expr: Expr) -> frozenset[str]:
    if isinstance(expr, Var):
        return frozenset({expr.name})
    if isinstance(expr, Quant):
        return free_variables(expr.body) - {expr.var}
    out: frozenset[str] = frozenset()
    for child in expr.children():
        out |= free_variables(child)
    return out


def substitute(expr: Expr, name: str, replacement: Expr) -> Expr:
    """Replace free occurrences of ``name``."""
    if isinstance(expr, Var):
        return replacement if expr.name == name else expr
    if isinstance(expr, Quant) and expr.var == name:
        return expr
    return map_children(expr, lambda e: substitute(e, name, replacement))


def resolve_members(
    expr: Expr,
    roles: Union[set, frozenset, Mapping],
    domains: Mapping[str, DomainKind],
    report: Callable[[Expr, str], None],
) -> Expr:
    """Turn ``Member`` nodes into ``Nav``/``Attr`` and tag quantifier domains.

    ``roles`` holds declared role names, ``domains`` maps template and type
    names to their kind. Problems go to ``report`` and the node is kept.
    """
    def go(e: Expr) -> Expr:
        if isinstance(e, Member):
            target = go(e.target)
            if e.name in roles:
                return Nav(target, e.name, e.inverse, span=e.span)
            if e.inverse:
                report(e, f"unknown role {e.name} in reverse navigation")
            return Attr(target, e.name, span=e.span)
        if isinstance(e, Quant):
            kind = domains.get(e.domain)
            if kind is None:
                report(e, f"unknown quantifier domain {e.domain}")
            return replace(e, body=go(e.body), domain_kind=kind)
        return map_children(e, go)

    return go(expr)
