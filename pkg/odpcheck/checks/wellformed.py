"""Well-formedness of models (W-rules) and of systems and traces in isolation (I-rules).

Every check reports all of its violations; results come back sorted by
(rule, subjects).
"""
from __future__ import annotations

import logging
from collections import defaultdict
from typing import Dict, List, Mapping, Tuple

import networkx as nx

from odpcheck.checks.rules import RuleId, Violation, rotate_cycle, sort_violations
from odpcheck.dynamics.trace import Step, Trace
from odpcheck.instance import BoundState, ConditionKind, System
from odpcheck.metamodel import Model

logger = logging.getLogger(__name__)


# ---- model rules -------------------------------------------------------------

_SCHEMA_RULES = (
    (RuleId.W1, "dynamic_schemas", "specifier", "dynamic schema"),
    (RuleId.W2, "static_schemas", "describer", "static schema"),
    (RuleId.W3, "invariant_schemas", "constrainer", "invariant schema"),
)


def _missing_references(m: Model) -> List[Violation]:
    out: List[Violation] = []
    for name in sorted(m.templates):
        t = m.templates[name]
        for rule, ref_attr, model_attr, what in _SCHEMA_RULES:
            declared: Mapping = getattr(m, model_attr)
            for ref in sorted(getattr(t, ref_attr) - set(declared)):
                out.append(Violation(
                    rule, (name, ref),
                    f"template {name} references {what} {ref}, which the model does not declare; "
                    f"adding {what} {ref} to the model resolves this",
                    t.span,
                ))
        for ref in sorted(t.actions - set(m.action_templates)):
            out.append(Violation(
                RuleId.W4, (name, ref),
                f"template {name} references action {ref}, which is not a declared action template",
                t.span,
            ))
        for ref in sorted(t.types - set(m.types)):
            out.append(Violation(RuleId.W5, (name, ref), f"template {name} references undeclared type {ref}", t.span))
    for name in sorted(m.action_templates):
        a = m.action_templates[name]
        for ref in sorted(a.types - set(m.types)):
            out.append(Violation(RuleId.W5, (name, ref), f"action {name} references undeclared type {ref}", a.span))
    return out


def _type_hierarchy(m: Model, rule: RuleId, own: str, other: str, relation: str) -> List[Violation]:
    """Checks the ``own`` declarations (subtypes or supertypes) against ``other``."""
    out: List[Violation] = []
    g = nx.DiGraph()
    for name in sorted(m.types):
        t = m.types[name]
        g.add_node(name)
        for ref in sorted(getattr(t, own)):
            g.add_edge(name, ref)
            target = m.types.get(ref)
            if target is None:
                out.append(Violation(rule, (name, ref), f"type {name} declares undeclared {relation} {ref}", t.span))
            elif name not in getattr(target, other):
                out.append(Violation(
                    rule, (name, ref),
                    f"type {name} declares {ref} as {relation}, but {ref} does not declare {name} back",
                    t.span,
                ))
    for cycle in nx.simple_cycles(g):
        subjects = rotate_cycle(list(cycle))
        out.append(Violation(rule, subjects, f"cyclic {relation} declarations: {' -> '.join(subjects + subjects[:1])}"))
    return out


def _start_end(m: Model) -> List[Violation]:
    return [
        Violation(RuleId.W8, (name,), f"action {name} starts and ends in the same state {a.start_label}", a.span)
        for name, a in sorted(m.action_templates.items())
        if a.start_label == a.end_label
    ]


def _parenthood(m: Model) -> List[Violation]:
    out: List[Violation] = []
    for cycle in nx.simple_cycles(m.parenthood_graph):
        subjects = rotate_cycle(list(cycle))
        t = m.templates.get(subjects[0])
        if len(subjects) == 1:
            message = f"template {subjects[0]} is its own parent"
        else:
            message = f"cyclic parenthood: {' -> '.join(subjects + subjects[:1])}"
        out.append(Violation(RuleId.W9, subjects, message, t.span if t else None))
    return out


def check_model(m: Model) -> List[Violation]:
    violations = (
        _missing_references(m)
        + _type_hierarchy(m, RuleId.W6, "declared_subtypes", "declared_supertypes", "subtype")
        + _type_hierarchy(m, RuleId.W7, "declared_supertypes", "declared_subtypes", "supertype")
        + _start_end(m)
        + _parenthood(m)
    )
    logger.debug("model %s: %d well-formedness violations", m.name, len(violations))
    return sort_violations(violations)


# ---- system rules ------------------------------------------------------------


def _dangling_links(s: System) -> List[Violation]:
    out = []
    for lid in sorted(s.links):
        link = s.links[lid]
        missing = [end for end in (link.source, link.target) if end not in s.objects]
        if missing:
            out.append(Violation(
                RuleId.I1, (lid,), f"link {lid} refers to objects absent from {s.name}: {', '.join(missing)}", link.span,
            ))
    return out


def _duplicate_links(s: System) -> List[Violation]:
    groups: Dict[Tuple[str, str, str], List[str]] = defaultdict(list)
    for lid in sorted(s.links):
        groups[s.links[lid].key].append(lid)
    out = []
    for (role, source, target), ids in sorted(groups.items()):
        if len(ids) > 1:
            out.append(Violation(
                RuleId.I2, tuple(ids), f"{len(ids)} links of role {role} from {source} to {target}",
                s.links[ids[1]].span,
            ))
    return out


def _stateless_objects(s: System) -> List[Violation]:
    out = []
    if not s.time_points:
        return out
    for label in s.time_points:
        explicit = s.explicit_snapshots.get(label)
        for oid in sorted(s.objects):
            obj = s.objects[oid]
            absent = oid not in explicit if explicit is not None else obj.state is None
            if absent:
                out.append(Violation(RuleId.I3, (oid, label), f"object {oid} has no state at time {label}", obj.span))
    return out


def check_system_wf(s: System) -> List[Violation]:
    violations = _dangling_links(s) + _duplicate_links(s) + _stateless_objects(s)
    logger.debug("system %s: %d well-formedness violations", s.name, len(violations))
    return sort_violations(violations)


def check_condition_bindings(step: Step, index: int = 0) -> List[Violation]:
    """Precondition bindings must point at the start state and postconditions at the end state."""
    out = []
    participants = set(step.binding.values())
    for c in step.conditions:
        rule, expected = (RuleId.I4, BoundState.START) if c.condition is ConditionKind.PRE else (RuleId.I5, BoundState.END)
        subjects = (f"step{index}", c.rule_ref, c.object_ref)
        if c.bound_state is not expected:
            out.append(Violation(
                rule, subjects,
                f"{c.condition.value}condition of {c.rule_ref} on {c.object_ref} is bound to the "
                f"{c.bound_state.value} state instead of the {expected.value} state",
                c.span,
            ))
        elif c.rule_ref != step.rule or c.object_ref not in participants:
            out.append(Violation(
                rule, subjects,
                f"{c.condition.value}condition binding names {c.rule_ref} on {c.object_ref}, "
                f"but step {index} executes {step.rule} on {', '.join(sorted(participants)) or 'no objects'}",
                c.span,
            ))
    return out


def check_trace_wf(trace: Trace) -> List[Violation]:
    out: List[Violation] = []
    for i, snapshot in enumerate(trace.snapshots):
        for v in check_system_wf(snapshot):
            out.append(Violation(v.rule, (f"snapshot{i}",) + v.subjects, f"snapshot {i}: {v.message}", v.span))
    for i, step in enumerate(trace.steps):
        out.extend(check_condition_bindings(step, i))
    return sort_violations(out)

