"""Sort checking of predicates against a model.

The checker never raises: every problem becomes a ``PredicateTypeError``
carrying the span of the offending node.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, FrozenSet, List, Mapping, Optional

from odpcheck.constraints.ast import (
    Arith,
    Attr,
    BoolOp,
    Compare,
    DomainKind,
    Expr,
    Lit,
    Member,
    Nav,
    Not,
    ObjectConst,
    Quant,
    SetOp,
    Var,
)
from odpcheck.dsl.spans import SourceSpan
from odpcheck.errors import OdpCheckError
from odpcheck.sorts import Sort

if TYPE_CHECKING:
    from odpcheck.metamodel import Model


class Kind(str, Enum):
    INT = "int"
    BOOL = "bool"
    STRING = "string"
    OBJECT = "object"
    SET = "set"
    ANY = "any"


@dataclass(frozen=True)
class PSort:
    """Sort of a predicate sub-expression.

    ``templates`` narrows object and set sorts to the templates the objects
    are known to instantiate; ``None`` means any object of the system.
    """

    kind: Kind
    templates: Optional[FrozenSet[str]] = None

    def __str__(self) -> str:
        return self.kind.value


INT = PSort(Kind.INT)
BOOL = PSort(Kind.BOOL)
STRING = PSort(Kind.STRING)
ANY = PSort(Kind.ANY)
ANY_OBJECT = PSort(Kind.OBJECT)

_FROM_SORT = {Sort.INT: INT, Sort.BOOL: BOOL, Sort.STRING: STRING}


def object_of(*templates: str) -> PSort:
    return PSort(Kind.OBJECT, frozenset(templates))


@dataclass(frozen=True)
class PredicateTypeError:
    message: str
    span: Optional[SourceSpan] = None

    def __str__(self) -> str:
        return f"{self.span}: {self.message}" if self.span else self.message


class _Checker:
    def __init__(self, m: "Model"):
        self.m = m
        self.errors: List[PredicateTypeError] = []

    def fail(self, e: Expr, message: str) -> PSort:
        self.errors.append(PredicateTypeError(message, e.span))
        return ANY

    def expect(self, e: Expr, got: PSort, want: PSort) -> None:
        if got.kind is Kind.ANY or got.kind is want.kind:
            return
        self.fail(e, f"{got} used as {want}")

    def visible_attributes(self, templates: Optional[FrozenSet[str]]) -> Mapping[str, Optional[Sort]]:
        pool = self.m.templates.keys() if templates is None else set()
        if templates is not None:
            for t in templates:
                try:
                    pool |= self.m.closure(t)
                except OdpCheckError:
                    pool.add(t)
        out: dict = {}
        for name in sorted(pool):
            t = self.m.templates.get(name)
            if t is None:
                continue
            for attr, sort in t.attributes.items():
                # conflicting declarations across unrelated templates widen to ANY
                out[attr] = sort if out.get(attr, sort) is sort else None
        return out

    def check(self, e: Expr, env: Mapping[str, PSort]) -> PSort:
        if isinstance(e, Lit):
            return _FROM_SORT[e.sort]
        if isinstance(e, ObjectConst):
            return ANY_OBJECT
        if isinstance(e, Var):
            if e.name not in env:
                return self.fail(e, f"unbound variable {e.name}")
            return env[e.name]
        if isinstance(e, Member):
            return self.fail(e, f"unresolved member {e.name}")
        if isinstance(e, Attr):
            target = self.check(e.target, env)
            if target.kind is Kind.ANY:
                return ANY
            if target.kind is not Kind.OBJECT:
                return self.fail(e, f"{target} has no attribute {e.name}")
            attrs = self.visible_attributes(target.templates)
            if e.name not in attrs:
                where = ", ".join(sorted(target.templates)) if target.templates else "any template"
                return self.fail(e, f"attribute {e.name} is not declared by {where}")
            sort = attrs[e.name]
            return ANY if sort is None else _FROM_SORT[sort]
        if isinstance(e, Nav):
            target = self.check(e.target, env)
            if target.kind not in (Kind.OBJECT, Kind.ANY):
                return self.fail(e, f"{target} used as object")
            role = self.m.roles.get(e.role)
            if role is None:
                return self.fail(e, f"unknown role {e.role}")
            ends = role.source_templates if e.inverse else role.target_templates
            return PSort(Kind.SET, frozenset(ends))
        if isinstance(e, Arith):
            self.expect(e.left, self.check(e.left, env), INT)
            self.expect(e.right, self.check(e.right, env), INT)
            return INT
        if isinstance(e, Compare):
            left = self.check(e.left, env)
            right = self.check(e.right, env)
            if e.op in ("=", "<>"):
                if Kind.ANY not in (left.kind, right.kind) and left.kind is not right.kind:
                    self.fail(e, f"cannot compare {left} with {right}")
            else:
                self.expect(e.left, left, INT)
                self.expect(e.right, right, INT)
            return BOOL
        if isinstance(e, Not):
            self.expect(e.operand, self.check(e.operand, env), BOOL)
            return BOOL
        if isinstance(e, BoolOp):
            self.expect(e.left, self.check(e.left, env), BOOL)
            self.expect(e.right, self.check(e.right, env), BOOL)
            return BOOL
        if isinstance(e, Quant):
            kind = e.domain_kind or self.m.domains.get(e.domain)
            if kind is None:
                self.fail(e, f"unknown quantifier domain {e.domain}")
                bound = ANY
            elif kind is DomainKind.TEMPLATE:
                bound = object_of(e.domain)
            else:
                bound = ANY_OBJECT
            if e.var in env:
                self.fail(e, f"variable {e.var} shadows an outer binding")
            self.expect(e.body, self.check(e.body, {**env, e.var: bound}), BOOL)
            return BOOL
        if isinstance(e, SetOp):
            target = self.check(e.target, env)
            if target.kind not in (Kind.SET, Kind.OBJECT, Kind.ANY):
                self.fail(e.target, f"{target} used as set")
            if e.op == "size":
                return INT
            if e.op in ("isEmpty", "notEmpty"):
                return BOOL
            arg = self.check(e.arg, env) if e.arg is not None else ANY
            if e.op == "includesAll":
                if arg.kind not in (Kind.SET, Kind.OBJECT, Kind.ANY):
                    self.fail(e.arg, f"{arg} used as set")
            else:
                self.expect(e.arg, arg, ANY_OBJECT)
            return BOOL
        return self.fail(e, f"unexpected node {type(e).__name__}")


def typecheck_expr(e: Expr, m: "Model", env: Optional[Mapping[str, PSort]] = None):
    """Sort of ``e`` together with the errors found on the way."""
    checker = _Checker(m)
    sort = checker.check(e, dict(env or {}))
    return sort, checker.errors


def typecheck_predicate(
    p: Expr, m: "Model", env: Optional[Mapping[str, PSort]] = None
) -> List[PredicateTypeError]:
    """Empty list iff ``p`` is a well-sorted boolean predicate under ``env``."""
    checker = _Checker(m)
    sort = checker.check(p, dict(env or {}))
    checker.expect(p, sort, BOOL)
    return checker.errors


def sort_psort(sort: Sort) -> PSort:
    return _FROM_SORT[sort]
