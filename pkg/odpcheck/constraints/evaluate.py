"""Two-valued evaluator for predicates over a system.

Connectives short-circuit left to right; quantifiers enumerate their domain
in object-id order and stop at the first decisive element. Errors are raised
as ``EvalError`` instead of producing an undefined value.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, FrozenSet, Iterator, Mapping, Optional, Union

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
from odpcheck.errors import EvalError, EvalErrorKind
from odpcheck.sorts import sort_of

if TYPE_CHECKING:
    from odpcheck.instance import System
    from odpcheck.metamodel import Model


@dataclass(frozen=True, order=True)
class ObjRef:
    id: str

    def __str__(self) -> str:
        return f"@{self.id}"


EvalValue = Union[int, bool, str, ObjRef, FrozenSet[ObjRef]]


class Binding(Mapping[str, EvalValue]):
    """Variable environment. A name is bound at most once."""

    def __init__(self, values: Optional[Mapping[str, EvalValue]] = None):
        self._values: Dict[str, EvalValue] = dict(values or {})

    def bind(self, name: str, value: EvalValue) -> "Binding":
        if name in self._values:
            raise EvalError(EvalErrorKind.SHADOWED_VARIABLE, f"variable {name} is already bound")
        return Binding({**self._values, name: value})

    def __getitem__(self, key: str) -> EvalValue:
        return self._values[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __hash__(self) -> int:
        return hash(frozenset(self._values.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v}" for k, v in sorted(self._values.items()))
        return f"Binding({inner})"


def _kind_name(v: EvalValue) -> str:
    if isinstance(v, ObjRef):
        return "object"
    if isinstance(v, frozenset):
        return "set"
    return sort_of(v).value


class Evaluator:
    def __init__(self, system: "System", model: Optional["Model"] = None):
        self.system = system
        self.model = model
        self._extensions: Dict[str, FrozenSet[str]] = {}

    # ---- helpers -----------------------------------------------------------------
    def _int(self, v: EvalValue, e: Expr) -> int:
        if isinstance(v, bool) or not isinstance(v, int):
            raise EvalError(EvalErrorKind.SORT_MISMATCH, f"{_kind_name(v)} used as int at {e.span}")
        return v

    def _bool(self, v: EvalValue, e: Expr) -> bool:
        if not isinstance(v, bool):
            raise EvalError(EvalErrorKind.SORT_MISMATCH, f"{_kind_name(v)} used as bool at {e.span}")
        return v

    def _obj(self, v: EvalValue, e: Expr) -> ObjRef:
        if not isinstance(v, ObjRef):
            raise EvalError(EvalErrorKind.SORT_MISMATCH, f"{_kind_name(v)} used as object at {e.span}")
        if v.id not in self.system.objects:
            raise EvalError(EvalErrorKind.UNKNOWN_OBJECT, f"object {v.id} is not in system {self.system.name}")
        return v

    def _set(self, v: EvalValue, e: Expr) -> FrozenSet[ObjRef]:
        if isinstance(v, ObjRef):
            return frozenset({v})
        if not isinstance(v, frozenset):
            raise EvalError(EvalErrorKind.SORT_MISMATCH, f"{_kind_name(v)} used as set at {e.span}")
        return v

    def domain(self, q: Quant) -> list:
        kind = q.domain_kind
        if kind is None and self.model is not None:
            kind = self.model.domains.get(q.domain)
        if kind is None or kind is DomainKind.TEMPLATE:
            return self.system.objects_of(q.domain)
        if self.model is None or q.domain not in self.model.types:
            raise EvalError(EvalErrorKind.UNKNOWN_DOMAIN, f"type {q.domain} needs its model to be evaluated")
        if q.domain not in self._extensions:
            from odpcheck.metamodel import extension

            self._extensions[q.domain] = extension(self.model.types[q.domain], self.system, self.model)
        return sorted(self._extensions[q.domain])

    # ---- evaluation --------------------------------------------------------------
    def eval(self, e: Expr, b: Binding) -> EvalValue:
        if isinstance(e, Lit):
            return e.value
        if isinstance(e, ObjectConst):
            return self._obj(ObjRef(e.object_id), e)
        if isinstance(e, Var):
            if e.name not in b:
                raise EvalError(EvalErrorKind.UNBOUND_VARIABLE, f"variable {e.name} is unbound")
            return b[e.name]
        if isinstance(e, Attr):
            ref = self._obj(self.eval(e.target, b), e)
            state = self.system.objects[ref.id].state
            if state is None or e.name not in state:
                raise EvalError(EvalErrorKind.MISSING_ATTRIBUTE, f"object {ref.id} has no attribute {e.name}")
            return state[e.name]
        if isinstance(e, Nav):
            ref = self._obj(self.eval(e.target, b), e)
            if e.inverse:
                return frozenset(
                    ObjRef(l.source) for l in self.system.links.values() if l.of == e.role and l.target == ref.id
                )
            return frozenset(
                ObjRef(l.target) for l in self.system.links.values() if l.of == e.role and l.source == ref.id
            )
        if isinstance(e, Member):
            raise EvalError(EvalErrorKind.SORT_MISMATCH, f"unresolved member {e.name} at {e.span}")
        if isinstance(e, Arith):
            left = self._int(self.eval(e.left, b), e.left)
            right = self._int(self.eval(e.right, b), e.right)
            if e.op == "+":
                return left + right
            if e.op == "-":
                return left - right
            return left * right
        if isinstance(e, Compare):
            return self._compare(e, b)
        if isinstance(e, Not):
            return not self._bool(self.eval(e.operand, b), e.operand)
        if isinstance(e, BoolOp):
            left = self._bool(self.eval(e.left, b), e.left)
            if e.op == "and":
                return left and self._bool(self.eval(e.right, b), e.right)
            if e.op == "or":
                return left or self._bool(self.eval(e.right, b), e.right)
            return (not left) or self._bool(self.eval(e.right, b), e.right)
        if isinstance(e, Quant):
            for oid in self.domain(e):
                holds = self._bool(self.eval(e.body, b.bind(e.var, ObjRef(oid))), e.body)
                if e.kind == "forall" and not holds:
                    return False
                if e.kind == "exists" and holds:
                    return True
            return e.kind == "forall"
        if isinstance(e, SetOp):
            return self._set_op(e, b)
        raise TypeError(f"not a predicate node: {e!r}")

    def _compare(self, e: Compare, b: Binding) -> bool:
        left = self.eval(e.left, b)
        right = self.eval(e.right, b)
        if e.op in ("=", "<>"):
            if _kind_name(left) != _kind_name(right):
                raise EvalError(
                    EvalErrorKind.SORT_MISMATCH,
                    f"cannot compare {_kind_name(left)} with {_kind_name(right)} at {e.span}",
                )
            return (left == right) == (e.op == "=")
        l, r = self._int(left, e.left), self._int(right, e.right)
        return {"<": l < r, "<=": l <= r, ">": l > r, ">=": l >= r}[e.op]

    def _set_op(self, e: SetOp, b: Binding) -> EvalValue:
        items = self._set(self.eval(e.target, b), e.target)
        if e.op == "size":
            return len(items)
        if e.op == "isEmpty":
            return not items
        if e.op == "notEmpty":
            return bool(items)
        arg = self.eval(e.arg, b)  # type: ignore[arg-type]
        if e.op == "includesAll":
            return self._set(arg, e.arg).issubset(items)  # type: ignore[arg-type]
        if not isinstance(arg, ObjRef):
            raise EvalError(EvalErrorKind.SORT_MISMATCH, f"{_kind_name(arg)} used as object at {e.span}")
        return (arg in items) == (e.op == "includes")


def eval_expr(e: Expr, s: "System", b: Optional[Binding] = None, model: Optional["Model"] = None) -> EvalValue:
    return Evaluator(s, model).eval(e, b or Binding())


def eval_predicate(p: Expr, s: "System", b: Optional[Binding] = None, model: Optional["Model"] = None) -> bool:
    value = eval_expr(p, s, b, model)
    if not isinstance(value, bool):
        raise EvalError(EvalErrorKind.SORT_MISMATCH, f"predicate evaluates to {_kind_name(value)}, not bool")
    return value
