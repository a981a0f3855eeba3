"""Meaning function: is a system a valid instance of the model it claims?"""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, List, Tuple

from odpcheck.checks.rules import RuleId, Violation, sort_violations
from odpcheck.constraints.evaluate import Binding, eval_predicate
from odpcheck.errors import EvalError, OdpCheckError
from odpcheck.instance import System
from odpcheck.metamodel import CountingScope, Model, Role, extension

logger = logging.getLogger(__name__)

GLOBAL_KEY = "global"


class Verdict(str, Enum):
    CONFORMS = "CONFORMS"
    VIOLATES = "VIOLATES"


@dataclass(frozen=True)
class ConformanceReport:
    system_name: str
    model_name: str
    violations: Tuple[Violation, ...] = ()

    @property
    def verdict(self) -> Verdict:
        return Verdict.VIOLATES if self.violations else Verdict.CONFORMS

    @property
    def conforms(self) -> bool:
        return not self.violations


def cardinality_count(r: Role, s: System) -> Dict[str, int]:
    """Number of ``r``-links per counting key.

    Per-source counting gives every object eligible as a source a key, even
    without links, so lower bounds bind.
    """
    links = s.links_of(r.name)
    if r.scope is CountingScope.GLOBAL:
        return {GLOBAL_KEY: len(links)}
    counts: Counter = Counter({oid: 0 for oid, o in s.objects.items() if o.of & r.source_templates})
    counts.update(link.source for link in links)
    return dict(sorted(counts.items()))


def _closure_or_none(m: Model, t: str) -> FrozenSet[str] | None:
    try:
        return m.closure(t)
    except OdpCheckError:
        return None


def _closure_rule(s: System, m: Model) -> List[Violation]:
    out = []
    for oid in sorted(s.objects):
        o = s.objects[oid]
        if not o.of <= set(m.templates):
            continue
        closures = [_closure_or_none(m, t) for t in sorted(o.of)]
        if any(c is None for c in closures):
            continue
        if not any(o.of == c for c in closures):
            out.append(Violation(
                RuleId.C1, (oid,),
                f"object {oid} instantiates {{{', '.join(sorted(o.of))}}}, "
                f"which is not a single template together with all its ancestors",
                o.span,
            ))
    return out


def _link_endpoints(s: System, m: Model) -> List[Violation]:
    out = []
    for lid in sorted(s.links):
        link = s.links[lid]
        role = m.roles.get(link.of)
        if role is None or link.source not in s.objects or link.target not in s.objects:
            continue
        problems = []
        if not s.objects[link.source].of & role.source_templates:
            problems.append(f"source {link.source} instantiates none of {', '.join(sorted(role.source_templates))}")
        if not s.objects[link.target].of & role.target_templates:
            problems.append(f"target {link.target} instantiates none of {', '.join(sorted(role.target_templates))}")
        if problems:
            out.append(Violation(RuleId.C2, (lid,), f"link {lid} of role {role.name}: {'; '.join(problems)}", link.span))
    return out


def _coverage(s: System, m: Model) -> List[Violation]:
    out = []
    used = set()
    for oid in sorted(s.objects):
        o = s.objects[oid]
        for t in sorted(o.of):
            if t not in m.templates:
                out.append(Violation(RuleId.C3, (oid, t), f"object {oid} instantiates {t}, which {m.name} does not declare", o.span))
            else:
                used |= _closure_or_none(m, t) or {t}
    for t in sorted(used):
        for ty in sorted(m.templates[t].types - set(m.types)):
            out.append(Violation(RuleId.C4, (t, ty), f"template {t} in use references type {ty}, which {m.name} does not declare"))
    for lid in sorted(s.links):
        link = s.links[lid]
        if link.of not in m.roles:
            out.append(Violation(RuleId.C5, (lid, link.of), f"link {lid} instantiates role {link.of}, which {m.name} does not declare", link.span))
    return out


def _cardinality(s: System, m: Model, paper_literal_c6: bool) -> List[Violation]:
    out = []
    for name in sorted(m.roles):
        r = m.roles[name]
        for key, n in cardinality_count(r, s).items():
            subjects = (name,) if r.scope is CountingScope.GLOBAL else (name, key)
            where = "" if r.scope is CountingScope.GLOBAL else f" from {key}"
            if r.upper_bound is not None and n > r.upper_bound:
                out.append(Violation(RuleId.C6, subjects, f"role {name} has {n} links{where}, above the upper bound {r.upper_bound}", r.span))
            if paper_literal_c6:
                if r.upper_bound is not None and n < r.upper_bound:
                    out.append(Violation(
                        RuleId.C6, subjects,
                        f"role {name} has {n} links{where}; the literal reading requires at least the upper bound {r.upper_bound}",
                        r.span,
                    ))
            elif n < r.lower_bound:
                out.append(Violation(RuleId.C6, subjects, f"role {name} has {n} links{where}, below the lower bound {r.lower_bound}", r.span))
    return out


def _inverses(s: System, m: Model) -> List[Violation]:
    out = []
    for lid in sorted(s.links):
        link = s.links[lid]
        role = m.roles.get(link.of)
        if role is None or role.inverse is None:
            continue
        reverse = [
            other.id for other in s.links.values()
            if other.of == role.inverse and other.source == link.target and other.target == link.source
        ]
        if len(reverse) != 1:
            found = "no" if not reverse else f"{len(reverse)}"
            out.append(Violation(
                RuleId.C7, (lid,),
                f"link {lid} ({link.source} -> {link.target}) has {found} reverse {role.inverse} links; exactly one is required",
                link.span,
            ))
    return out


def _subtype_pairs(m: Model) -> List[Tuple[str, str]]:
    pairs = set()
    for name, t in m.types.items():
        pairs |= {(sub, name) for sub in t.declared_subtypes if sub in m.types}
        pairs |= {(name, sup) for sup in t.declared_supertypes if sup in m.types}
    return sorted(pairs)


def _subclassing(s: System, m: Model) -> List[Violation]:
    out = []
    for sub, sup in _subtype_pairs(m):
        try:
            extra = extension(m.types[sub], s, m) - extension(m.types[sup], s, m)
        except EvalError as err:
            out.append(Violation(RuleId.C8, (sub, sup), f"cannot compare the classes of {sub} and {sup}: {err}"))
            continue
        if extra:
            out.append(Violation(
                RuleId.C8, (sub, sup),
                f"{sub} is declared a subtype of {sup}, but {', '.join(sorted(extra))} satisfy {sub} and not {sup}",
            ))
    return out


def _schemas(s: System, m: Model) -> List[Violation]:
    out = []
    for name in sorted(m.constrainer):
        schema = m.constrainer[name]
        try:
            if not eval_predicate(schema.predicate, s, Binding(), model=m):
                out.append(Violation(RuleId.S1, (name,), f"invariant schema {name} is false on {s.name}", schema.span))
        except EvalError as err:
            out.append(Violation(RuleId.S1, (name,), f"invariant schema {name} cannot be evaluated: {err}", schema.span))
    for name in sorted(m.describer):
        schema = m.describer[name]
        if schema.at_time not in s.time_points:
            continue
        try:
            if not eval_predicate(schema.predicate, s.at(schema.at_time), Binding(), model=m):
                out.append(Violation(RuleId.S2, (name, schema.at_time), f"static schema {name} is false at {schema.at_time}", schema.span))
        except EvalError as err:
            out.append(Violation(RuleId.S2, (name, schema.at_time), f"static schema {name} cannot be evaluated: {err}", schema.span))
    return out


def conform(s: System, m: Model, paper_literal_c6: bool = False) -> ConformanceReport:
    if s.model_ref != m.name:
        logger.warning("system %s claims model %s but is checked against %s", s.name, s.model_ref, m.name)
    violations = (
        _closure_rule(s, m)
        + _link_endpoints(s, m)
        + _coverage(s, m)
        + _cardinality(s, m, paper_literal_c6)
        + _inverses(s, m)
        + _subclassing(s, m)
        + _schemas(s, m)
    )
    report = ConformanceReport(s.name, m.name, tuple(sort_violations(violations)))
    logger.debug("conformance of %s to %s: %s", s.name, m.name, report.verdict.value)
    return report


def is_subclass(t1: str, t2: str, s: System, m: Model) -> bool:
    """Whether the class of type ``t1`` in ``s`` is included in the class of ``t2``."""
    return extension(m.types[t1], s, m) <= extension(m.types[t2], s, m)
