"""Rule enabling and rule application.

A participant binding maps each rule variable to an object id. Effects run
in declaration order, each one on the state left by the previous ones.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Set, Tuple

from odpcheck.constraints.evaluate import Binding, ObjRef, eval_expr, eval_predicate
from odpcheck.dynamics.schema import AddLink, Assign, Create, Delete, DynamicRule, Reclassify, RemoveLink
from odpcheck.errors import (
    DeleteDanglingLink,
    EffectError,
    EvalError,
    InvariantBroken,
    OdpCheckError,
    PostconditionFailed,
    RuleNotEnabled,
)
from odpcheck.instance import Link, ObjectInstance, System
from odpcheck.metamodel import Model
from odpcheck.sorts import Value, sort_of

logger = logging.getLogger(__name__)

RuleBinding = Mapping[str, str]
LinkKey = Tuple[str, str, str]


@dataclass(frozen=True)
class SkippedBinding:
    """A candidate whose precondition could not be evaluated."""

    rule: str
    binding: Tuple[Tuple[str, str], ...]
    error: EvalError


@dataclass
class Footprint:
    """Everything the effects of one rule application touched."""

    assigned: Set[Tuple[str, str]] = field(default_factory=set)
    created: Set[str] = field(default_factory=set)
    deleted: Set[str] = field(default_factory=set)
    reclassified: Set[str] = field(default_factory=set)
    links_added: Set[LinkKey] = field(default_factory=set)
    links_removed: Set[LinkKey] = field(default_factory=set)

    def touches_object(self, oid: str) -> bool:
        return oid in self.created | self.deleted | self.reclassified


@dataclass(frozen=True)
class Transition:
    system: System
    footprint: Footprint
    binding: Mapping[str, str]


def env_of(b: RuleBinding) -> Binding:
    return Binding({var: ObjRef(oid) for var, oid in b.items()})


def _candidates(r: DynamicRule, s: System) -> Iterator[Dict[str, str]]:
    pools = [s.objects_of(template) for _, template in r.participants]
    for combo in itertools.product(*pools):
        if len(set(combo)) == len(combo):
            yield dict(zip(r.variables, combo))


def enabled_rules(
    s: System, m: Model, diagnostics: Optional[List[SkippedBinding]] = None
) -> List[Tuple[DynamicRule, Dict[str, str]]]:
    """All enabled (rule, binding) pairs, by rule name then by the bound ids in variable order.

    A precondition that fails to evaluate disables its binding; the error is
    appended to ``diagnostics`` when given.
    """
    out = []
    for name, rule in m.rules.items():
        for b in _candidates(rule, s):
            try:
                if eval_predicate(rule.pre, s, env_of(b), model=m):
                    out.append((rule, b))
            except EvalError as err:
                logger.debug("rule %s disabled for %s: %s", name, b, err)
                if diagnostics is not None:
                    diagnostics.append(SkippedBinding(name, tuple(b.items()), err))
    return out


def is_enabled(s: System, r: DynamicRule, b: RuleBinding, m: Model) -> bool:
    if set(b) != set(r.variables) or len(set(b.values())) != len(b):
        return False
    for var, template in r.participants:
        obj = s.objects.get(b[var])
        if obj is None or template not in obj.of:
            return False
    return eval_predicate(r.pre, s, env_of(b), model=m)


class _Effects:
    """Mutable cursor over the intermediate systems of one rule application."""

    def __init__(self, s: System, r: DynamicRule, b: RuleBinding, m: Model):
        self.system = s
        self.rule = r
        self.model = m
        self.env = env_of(b)
        self.footprint = Footprint()

    def _oid(self, var: str) -> str:
        ref = self.env.get(var)
        if not isinstance(ref, ObjRef):
            raise EffectError(f"rule {self.rule.name}: variable {var} is unbound")
        return ref.id

    def _value(self, e) -> Value:
        value = eval_expr(e, self.system, self.env, model=self.model)
        if isinstance(value, (ObjRef, frozenset)):
            raise EffectError(f"rule {self.rule.name}: attributes hold int, bool or string values, not {value}")
        return value

    def _object(self, var: str) -> ObjectInstance:
        oid = self._oid(var)
        obj = self.system.objects.get(oid)
        if obj is None:
            raise EffectError(f"rule {self.rule.name}: object {oid} no longer exists")
        return obj

    def _initial_state(self, of: FrozenSet[str], inits: Mapping, keep: Mapping[str, Value], what: str) -> Dict[str, Value]:
        declared = self.model.attributes_of(of)
        state = {a: v for a, v in keep.items() if a in declared}
        for attr in sorted(inits):
            state[attr] = self._value(inits[attr])
        missing = sorted(set(declared) - set(state))
        if missing:
            raise EffectError(f"rule {self.rule.name}: {what} leaves {', '.join(missing)} without a value")
        for attr, value in state.items():
            if sort_of(value) is not declared[attr]:
                raise EffectError(f"rule {self.rule.name}: {attr} expects {declared[attr].value}, got {sort_of(value).value}")
        return state

    def assign(self, eff: Assign) -> None:
        obj = self._object(eff.var)
        value = self._value(eff.expr)
        expected = self.model.attributes_of(obj.of).get(eff.attr)
        if expected is None:
            raise EffectError(f"rule {self.rule.name}: {obj.id} has no attribute {eff.attr}")
        if sort_of(value) is not expected:
            raise EffectError(f"rule {self.rule.name}: {eff.attr} expects {expected.value}, got {sort_of(value).value}")
        state = {**(obj.state or {}), eff.attr: value}
        self.system = self.system.with_object(replace(obj, state=state))
        self.footprint.assigned.add((obj.id, eff.attr))

    def create(self, eff: Create) -> None:
        of = self.model.closure(eff.template)
        oid = self.system.fresh_id(eff.template.lower())
        state = self._initial_state(of, eff.inits, {}, f"create {eff.var} : {eff.template}")
        self.system = self.system.with_object(ObjectInstance(oid, of, state))
        self.env = self.env.bind(eff.var, ObjRef(oid))
        self.footprint.created.add(oid)

    def delete(self, eff: Delete) -> None:
        obj = self._object(eff.var)
        objects = {k: v for k, v in self.system.objects.items() if k != obj.id}
        self.system = replace(self.system, objects=objects, containment=self.system.containment.remove_object(obj.id))
        self.footprint.deleted.add(obj.id)

    def reclassify(self, eff: Reclassify) -> None:
        obj = self._object(eff.var)
        of = self.model.closure(eff.template)
        state = self._initial_state(of, eff.inits, obj.state or {}, f"reclassify {eff.var} as {eff.template}")
        self.system = self.system.with_object(replace(obj, of=of, state=state))
        self.footprint.reclassified.add(obj.id)

    def add_link(self, eff: AddLink) -> None:
        source, target = self._oid(eff.source), self._oid(eff.target)
        if self.system.find_link(eff.role, source, target) is not None:
            raise EffectError(f"rule {self.rule.name}: {eff.role} link {source} -> {target} already exists")
        lid = self.system.fresh_id(eff.role)
        self.system = self.system.with_link(Link(lid, eff.role, source, target))
        self.footprint.links_added.add((eff.role, source, target))

    def remove_link(self, eff: RemoveLink) -> None:
        source, target = self._oid(eff.source), self._oid(eff.target)
        link = self.system.find_link(eff.role, source, target)
        if link is None:
            raise EffectError(f"rule {self.rule.name}: no {eff.role} link {source} -> {target} to remove")
        links = {k: v for k, v in self.system.links.items() if k != link.id}
        self.system = replace(self.system, links=links)
        self.footprint.links_removed.add(link.key)

    def run(self) -> None:
        handlers = {
            Assign: self.assign,
            Create: self.create,
            Delete: self.delete,
            Reclassify: self.reclassify,
            AddLink: self.add_link,
            RemoveLink: self.remove_link,
        }
        for eff in self.rule.effects:
            try:
                handlers[type(eff)](eff)
            except EvalError as err:
                raise EffectError(f"rule {self.rule.name}: {err}") from err
        for oid in sorted(self.footprint.deleted):
            dangling = [link.id for link in self.system.links_touching(oid)]
            if dangling:
                raise DeleteDanglingLink(self.rule.name, oid, dangling)


def _check_invariants(result: System, r: DynamicRule, m: Model) -> None:
    for name in sorted(m.constrainer):
        try:
            holds = eval_predicate(m.constrainer[name].predicate, result, Binding(), model=m)
        except EvalError as err:
            logger.debug("invariant %s cannot be evaluated after %s: %s", name, r.name, err)
            holds = False
        if not holds:
            raise InvariantBroken(r.name, name)


def execute(s: System, r: DynamicRule, b: RuleBinding, m: Model, check_invariants: bool = True) -> Transition:
    """Applies ``r`` under ``b`` and reports what its effects touched.

    Trace verification passes ``check_invariants=False``: it reports broken
    invariants per snapshot instead of rejecting the step.
    """
    try:
        enabled = is_enabled(s, r, b, m)
    except EvalError as err:
        raise RuleNotEnabled(f"rule {r.name}: precondition cannot be evaluated: {err}") from err
    if not enabled:
        raise RuleNotEnabled(f"rule {r.name} is not enabled for {dict(sorted(b.items()))}")
    effects = _Effects(s, r, b, m)
    try:
        effects.run()
    except (EffectError, DeleteDanglingLink):
        raise
    except OdpCheckError as err:
        raise EffectError(f"rule {r.name}: {err}") from err
    result = effects.system
    try:
        post = eval_predicate(r.post, result, effects.env, model=m)
    except EvalError as err:
        logger.debug("postcondition of %s cannot be evaluated: %s", r.name, err)
        post = False
    if not post:
        raise PostconditionFailed(r.name)
    if check_invariants:
        _check_invariants(result, r, m)
    bound = {var: ref.id for var, ref in effects.env.items() if isinstance(ref, ObjRef)}
    return Transition(result, effects.footprint, bound)


def apply_rule(s: System, r: DynamicRule, b: RuleBinding, m: Model) -> System:
    return execute(s, r, b, m).system
