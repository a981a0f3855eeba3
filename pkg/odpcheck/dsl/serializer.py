"""Canonical text form of models, systems, traces and predicates.

Declarations are grouped by category and sorted by name; names inside
id-lists and attribute maps are sorted. Sequences whose order carries
meaning (action participants, effects, time points, trace steps) keep it.
"""
from __future__ import annotations

from typing import Iterable, List, Mapping, Union

from odpcheck.constraints.ast import (
    Arith,
    Attr,
    BoolOp,
    Compare,
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
from odpcheck.dsl.lexer import quote
from odpcheck.dynamics.schema import AddLink, Assign, Create, Delete, DynamicRule, Reclassify, RemoveLink
from odpcheck.dynamics.trace import Step, Trace
from odpcheck.instance import ObjectInstance, System
from odpcheck.metamodel import CountingScope, Model, Role
from odpcheck.sorts import Value

INDENT = "    "

_BOOL_PREC = {"implies": 1, "or": 2, "and": 3}
NOT_PREC, CMP_PREC, ADD_PREC, MUL_PREC, UNARY_PREC, POSTFIX_PREC, ATOM_PREC = 4, 5, 6, 7, 8, 9, 10


def _prec(e: Expr) -> int:
    if isinstance(e, Quant):
        return 0
    if isinstance(e, BoolOp):
        return _BOOL_PREC[e.op]
    if isinstance(e, Not):
        return NOT_PREC
    if isinstance(e, Compare):
        return CMP_PREC
    if isinstance(e, Arith):
        return MUL_PREC if e.op == "*" else ADD_PREC
    if isinstance(e, Lit) and isinstance(e.value, int) and not isinstance(e.value, bool) and e.value < 0:
        return UNARY_PREC
    if isinstance(e, (Member, Attr, Nav, SetOp)):
        return POSTFIX_PREC
    return ATOM_PREC


def _wrap(e: Expr, parens: bool) -> str:
    text = print_predicate(e)
    return f"({text})" if parens else text


def value_text(v: Value) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    return quote(v)


def print_predicate(e: Expr) -> str:
    if isinstance(e, Lit):
        return value_text(e.value)
    if isinstance(e, ObjectConst):
        return f"@{e.object_id}"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, (Member, Attr, Nav)):
        name = e.role if isinstance(e, Nav) else e.name
        inverse = "~" if getattr(e, "inverse", False) else ""
        return f"{_wrap(e.target, _prec(e.target) < POSTFIX_PREC)}.{name}{inverse}"
    if isinstance(e, SetOp):
        target = _wrap(e.target, _prec(e.target) < POSTFIX_PREC)
        arg = f"({print_predicate(e.arg)})" if e.arg is not None else ""
        return f"{target}.{e.op}{arg}"
    if isinstance(e, Not):
        return f"not {_wrap(e.operand, _prec(e.operand) < NOT_PREC)}"
    if isinstance(e, Quant):
        return f"{e.kind} {e.var}: {e.domain} . {print_predicate(e.body)}"
    if isinstance(e, BoolOp):
        p = _BOOL_PREC[e.op]
        if e.op == "implies":
            left, right = _prec(e.left) <= p, _prec(e.right) < p
        else:
            left, right = _prec(e.left) < p, _prec(e.right) <= p
        return f"{_wrap(e.left, left)} {e.op} {_wrap(e.right, right)}"
    if isinstance(e, Compare):
        return f"{_wrap(e.left, _prec(e.left) <= CMP_PREC)} {e.op} {_wrap(e.right, _prec(e.right) <= CMP_PREC)}"
    if isinstance(e, Arith):
        p = _prec(e)
        return f"{_wrap(e.left, _prec(e.left) < p)} {e.op} {_wrap(e.right, _prec(e.right) <= p)}"
    raise TypeError(f"cannot print {e!r}")


def _ids(names: Iterable[str]) -> str:
    return ", ".join(sorted(names))


def _is_true(e: Expr) -> bool:
    return isinstance(e, Lit) and e.value is True


class _Writer:
    def __init__(self):
        self.lines: List[str] = []
        self.depth = 0

    def line(self, text: str = "") -> None:
        self.lines.append(f"{INDENT * self.depth}{text}" if text else "")

    def open(self, text: str) -> None:
        self.line(f"{text} {{")
        self.depth += 1

    def close(self, suffix: str = "") -> None:
        self.depth -= 1
        self.line("}" + suffix)

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


# ---- models -----------------------------------------------------------------


def _role_body(w: _Writer, r: Role) -> None:
    w.line(f"source: {_ids(r.source_templates)};")
    w.line(f"target: {_ids(r.target_templates)};")
    if r.lower_bound != 0 or r.upper_bound is not None:
        upper = "*" if r.upper_bound is None else str(r.upper_bound)
        w.line(f"card: {r.lower_bound} .. {upper};")
    if r.inverse:
        w.line(f"inverse: {r.inverse};")
    if r.scope is not CountingScope.GLOBAL:
        w.line(f"scope: {r.scope.value};")


def _inits(w: _Writer, head: str, inits: Mapping[str, Expr]) -> None:
    if not inits:
        w.line(f"{head};")
        return
    w.open(head)
    for attr in sorted(inits):
        w.line(f"{attr} = {print_predicate(inits[attr])};")
    w.close()


def _rule(w: _Writer, r: DynamicRule) -> None:
    params = ", ".join(f"{v}: {t}" for v, t in r.participants)
    w.open(f"rule {r.name} : {r.action} ({params})")
    if not _is_true(r.pre):
        w.line(f"pre: {print_predicate(r.pre)};")
    if r.effects:
        w.open("effects")
        for eff in r.effects:
            if isinstance(eff, Assign):
                w.line(f"{eff.var}.{eff.attr} := {print_predicate(eff.expr)};")
            elif isinstance(eff, Create):
                _inits(w, f"create {eff.var} : {eff.template}", eff.inits)
            elif isinstance(eff, Delete):
                w.line(f"delete {eff.var};")
            elif isinstance(eff, Reclassify):
                _inits(w, f"reclassify {eff.var} as {eff.template}", eff.inits)
            elif isinstance(eff, AddLink):
                w.line(f"link {eff.role} ({eff.source} -> {eff.target});")
            elif isinstance(eff, RemoveLink):
                w.line(f"unlink {eff.role} ({eff.source} -> {eff.target});")
        w.close()
    if not _is_true(r.post):
        w.line(f"post: {print_predicate(r.post)};")
    w.close()


def _model(w: _Writer, m: Model) -> None:
    w.open(f"model {m.name}")
    for name in sorted(m.templates):
        t = m.templates[name]
        w.open(f"template {name}")
        if t.parents:
            w.line(f"parents: {_ids(t.parents)};")
        if t.attributes:
            w.open("attrs")
            for attr in sorted(t.attributes):
                w.line(f"{attr}: {t.attributes[attr].value};")
            w.close()
        for label, names in (
            ("types", t.types),
            ("actions", t.actions),
            ("dynamic", t.dynamic_schemas),
            ("static", t.static_schemas),
            ("invariant", t.invariant_schemas),
        ):
            if names:
                w.line(f"{label}: {_ids(names)};")
        if t.tags:
            w.line(f"tags: {', '.join(sorted(tag.label for tag in t.tags))};")
        w.close()
    for name in sorted(m.action_templates):
        a = m.action_templates[name]
        w.open(f"action {name}")
        w.line(f"participants: {', '.join(a.participants)};")
        w.line(f"start: {a.start_label};")
        w.line(f"end: {a.end_label};")
        if a.types:
            w.line(f"types: {_ids(a.types)};")
        w.close()
    for name in sorted(m.types):
        t = m.types[name]
        w.open(f"type {name}")
        if not _is_true(t.predicate):
            w.line(f"predicate: {print_predicate(t.predicate)};")
        if t.declared_subtypes:
            w.line(f"subtypes: {_ids(t.declared_subtypes)};")
        if t.declared_supertypes:
            w.line(f"supertypes: {_ids(t.declared_supertypes)};")
        w.close()
    for name in sorted(m.roles):
        w.open(f"role {name}")
        _role_body(w, m.roles[name])
        w.close()
    for name in sorted(m.constrainer):
        w.open(f"invariant {name}")
        w.line(print_predicate(m.constrainer[name].predicate))
        w.close()
    for name in sorted(m.describer):
        s = m.describer[name]
        w.open(f"static {name} at {s.at_time}")
        w.line(print_predicate(s.predicate))
        w.close()
    for name in sorted(m.specifier):
        w.open(f"dynamic {name}")
        rules = m.specifier[name].rules
        for rule_name in sorted(rules):
            _rule(w, rules[rule_name])
        w.close()
    w.close()


# ---- systems ----------------------------------------------------------------


def _state(w: _Writer, head: str, state: Mapping[str, Value]) -> None:
    if not state:
        w.line(f"{head} {{ }}")
        return
    w.open(head)
    for attr in sorted(state):
        w.line(f"{attr} = {value_text(state[attr])};")
    w.close()


def _object(w: _Writer, o: ObjectInstance) -> None:
    head = f"object {o.id} : {_ids(o.of)}"
    if o.state is None:
        w.line(f"{head};")
    else:
        _state(w, head, o.state)


def _system(w: _Writer, s: System) -> None:
    w.open(f"system {s.name} conforms {s.model_ref}")
    for oid in sorted(s.objects):
        _object(w, s.objects[oid])
    for lid in sorted(s.links):
        link = s.links[lid]
        w.line(f"link {lid} : {link.of} ({link.source} -> {link.target});")
    for label in s.time_points:
        snapshot = s.explicit_snapshots.get(label)
        if snapshot is None:
            w.line(f"time {label};")
            continue
        w.open(f"time {label}")
        for oid in sorted(snapshot):
            _state(w, oid, snapshot[oid])
        w.close()
    for name in sorted(s.containment.nodes):
        node = s.containment.nodes[name]
        accepts = f" accepts {', '.join(quote(a) for a in sorted(node.accepts))}" if node.accepts else ""
        w.open(f"node {name}{accepts}")
        for cname in sorted(node.capsules):
            capsule = node.capsules[cname]
            w.open(f"capsule {cname}")
            for kname in sorted(capsule.clusters):
                members = _ids(capsule.clusters[kname].objects)
                w.line(f"cluster {kname} {{ {members} }}" if members else f"cluster {kname} {{ }}")
            w.close()
        w.close()
    for t in s.travel_log:
        p = t.source_path
        origin = f"{p.node}.{p.capsule}.{p.cluster}" if p else t.source
        source = f" from {origin}" if origin else ""
        w.line(f"travel {t.entity}{source} to {t.destination};")
    w.close()


# ---- traces -----------------------------------------------------------------


def _step(w: _Writer, step: Step) -> None:
    binding = ", ".join(f"{v} = {step.binding[v]}" for v in sorted(step.binding))
    head = f"step {step.rule} ({binding}) {step.kind.value}"
    if not step.conditions:
        w.line(f"{head};")
        return
    w.open(head)
    for c in step.conditions:
        w.line(f"{c.condition.value} {c.rule_ref} {c.object_ref} {c.bound_state.value};")
    w.close()


def _trace(w: _Writer, t: Trace) -> None:
    seed = f" seed {t.seed}" if t.seed is not None else ""
    w.open(f"trace {t.name} of {t.model_ref}{seed} steps {len(t.steps)}")
    _system(w, t.snapshots[0])
    for step, snapshot in zip(t.steps, t.snapshots[1:]):
        _step(w, step)
        _system(w, snapshot)
    w.close()


def serialize(value: Union[Model, System, Trace, Expr]) -> str:
    """Canonical text; byte-stable for structurally equal values."""
    if isinstance(value, Expr):
        return print_predicate(value)
    w = _Writer()
    if isinstance(value, Model):
        _model(w, value)
    elif isinstance(value, System):
        _system(w, value)
    elif isinstance(value, Trace):
        _trace(w, value)
    else:
        raise TypeError(f"cannot serialize {type(value).__name__}")
    return w.text()

