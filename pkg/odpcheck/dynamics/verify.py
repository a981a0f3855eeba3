"""Replays a recorded trace against its model and reports D-rule violations.

Created objects are matched to the ids the engine would have chosen by
template and id order, so a trace may name them freely. Links are compared
by (role, source, target), not by id.
"""
from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import replace
from typing import Dict, List, Optional

from odpcheck.checks.rules import RuleId, Violation, sort_violations
from odpcheck.constraints.evaluate import Binding, eval_predicate
from odpcheck.dsl.serializer import value_text
from odpcheck.dynamics.engine import Footprint, Transition, execute
from odpcheck.dynamics.trace import Step, Trace
from odpcheck.errors import DynamicsError, EvalError, OdpCheckError
from odpcheck.instance import Link, System
from odpcheck.metamodel import Model, action_kind
from odpcheck.sorts import same_value

logger = logging.getLogger(__name__)


def _link_label(key) -> str:
    role, source, target = key
    return f"{role}({source}->{target})"


def _rename(s: System, mapping: Dict[str, str]) -> System:
    if not mapping:
        return s
    objects = {mapping.get(oid, oid): replace(o, id=mapping.get(oid, oid)) for oid, o in s.objects.items()}
    links = {
        lid: Link(lid, l.of, mapping.get(l.source, l.source), mapping.get(l.target, l.target), l.span)
        for lid, l in s.links.items()
    }
    containment = s.containment
    for old, new in mapping.items():
        containment = containment.rename_object(old, new)
    return replace(s, objects=objects, links=links, containment=containment)


def _text(v) -> str:
    return "nothing" if v is None else value_text(v)


def _same_state(a, b) -> bool:
    if a is None or b is None:
        return a is b
    return set(a) == set(b) and all(same_value(a[k], b[k]) for k in a)


class _StepCheck:
    def __init__(self, index: int, step: Step, before: System, after: System, m: Model):
        self.index = index
        self.step = step
        self.before = before
        self.after = after
        self.model = m
        self.out: List[Violation] = []
        self.tag = f"step{index}"

    def report(self, rule: RuleId, subject: str, message: str) -> None:
        self.out.append(Violation(rule, (self.tag, subject), f"step {self.index} ({self.step.rule}): {message}", self.step.span))

    def justify(self) -> Optional[Transition]:
        """The engine's replay of the step, or None after reporting why it is not justified."""
        rule = self.model.rules.get(self.step.rule)
        if rule is None:
            self.report(RuleId.D1, self.step.rule, f"the model has no rule {self.step.rule}")
            return None
        expected_kind = action_kind(self.model.action_templates[rule.action]) if rule.action in self.model.action_templates else None
        if expected_kind is not None and self.step.kind is not expected_kind:
            self.report(RuleId.D1, self.step.rule, f"recorded as {self.step.kind.value}, but action {rule.action} is {expected_kind.value}")
            return None
        try:
            return execute(self.before, rule, self.step.binding, self.model, check_invariants=False)
        except (DynamicsError, EvalError) as err:
            self.report(RuleId.D1, self.step.rule, str(err))
            return None

    def _match_created(self, expected: System, fp: Footprint) -> Dict[str, str]:
        actual_new = sorted(set(self.after.objects) - set(self.before.objects))
        by_template_actual = defaultdict(list)
        by_template_expected = defaultdict(list)
        for oid in actual_new:
            by_template_actual[self.after.objects[oid].of].append(oid)
        for oid in sorted(fp.created):
            by_template_expected[expected.objects[oid].of].append(oid)
        mapping = {}
        for of in sorted(set(by_template_actual) | set(by_template_expected), key=sorted):
            got, want = by_template_actual[of], by_template_expected[of]
            if len(got) != len(want):
                self.report(RuleId.D4, ", ".join(sorted(of)), f"{len(got)} objects of {{{', '.join(sorted(of))}}} appear, the effects create {len(want)}")
            mapping.update(zip(got, want))
        return mapping

    def compare(self, expected: System, fp: Footprint) -> None:
        mapping = self._match_created(expected, fp)
        after = _rename(self.after, mapping)
        gone = set(self.before.objects) - set(self.after.objects)
        for oid in sorted(gone ^ fp.deleted):
            if oid in fp.deleted:
                self.report(RuleId.D4, oid, f"the effects delete {oid}, but it is still present")
            else:
                self.report(RuleId.D4, oid, f"{oid} disappears without a delete effect")
        for oid in sorted(set(expected.objects) & set(after.objects)):
            want, got = expected.objects[oid], after.objects[oid]
            if got.of != want.of:
                self.report(
                    RuleId.D4, oid,
                    f"{oid} instantiates {{{', '.join(sorted(got.of))}}}, the effects give {{{', '.join(sorted(want.of))}}}",
                )
                continue
            if _same_state(want.state, got.state):
                continue
            attrs = sorted(set(want.state or {}) | set(got.state or {}))
            for attr in attrs:
                w, g = (want.state or {}).get(attr), (got.state or {}).get(attr)
                if w is not None and g is not None and same_value(w, g):
                    continue
                covered = (oid, attr) in fp.assigned or fp.touches_object(oid)
                if covered:
                    self.report(RuleId.D1, f"{oid}.{attr}", f"the effects give {oid}.{attr} = {_text(w)}, the next snapshot has {_text(g)}")
                else:
                    self.report(RuleId.D5, f"{oid}.{attr}", f"{oid}.{attr} changes from {_text(w)} to {_text(g)} but no effect names it")
        want_links = {l.key for l in expected.links.values()}
        got_links = {l.key for l in after.links.values()}
        for key in sorted(want_links ^ got_links):
            if key in fp.links_added or key in fp.links_removed:
                self.report(RuleId.D1, _link_label(key), f"link {_link_label(key)} does not match the link effects")
            else:
                verb = "disappears" if key in want_links else "appears"
                self.report(RuleId.D5, _link_label(key), f"link {_link_label(key)} {verb} but no effect names it")
        if expected.containment != after.containment:
            self.report(RuleId.D5, "containment", "the containment tree changes but no effect names it")
        if (expected.time_points, expected.explicit_snapshots, expected.travel_log) != (
            after.time_points, after.explicit_snapshots, after.travel_log
        ):
            self.report(RuleId.D5, "timeline", "time points, snapshots or travel records change but no effect names them")


def _schema_checks(m: Model, t: Trace) -> List[Violation]:
    out = []
    for i, snapshot in enumerate(t.snapshots):
        for name in sorted(m.constrainer):
            schema = m.constrainer[name]
            try:
                ok = eval_predicate(schema.predicate, snapshot, Binding(), model=m)
                detail = "is false"
            except EvalError as err:
                ok, detail = False, f"cannot be evaluated: {err}"
            if not ok:
                out.append(Violation(RuleId.D2, (f"snapshot{i}", name), f"invariant schema {name} {detail} at snapshot {i}", schema.span))
    labels = t.snapshots[0].time_points
    for name in sorted(m.describer):
        schema = m.describer[name]
        if schema.at_time not in labels:
            continue
        index = labels.index(schema.at_time)
        if index >= len(t.snapshots):
            continue
        try:
            ok = eval_predicate(schema.predicate, t.snapshots[index], Binding(), model=m)
            detail = "is false"
        except EvalError as err:
            ok, detail = False, f"cannot be evaluated: {err}"
        if not ok:
            out.append(Violation(
                RuleId.D3, (name, schema.at_time),
                f"static schema {name} {detail} at time {schema.at_time} (snapshot {index})", schema.span,
            ))
    return out


def verify_trace(m: Model, t: Trace) -> List[Violation]:
    if t.model_ref != m.name:
        logger.warning("trace %s claims model %s but is checked against %s", t.name, t.model_ref, m.name)
    out: List[Violation] = []
    for i, (before, step, after) in enumerate(t.transitions()):
        if before == after:
            logger.warning(
                "step %d (%s) leaves the system unchanged: its start and end states coincide (see W8)", i, step.rule,
            )
        check = _StepCheck(i, step, before, after, m)
        transition = check.justify()
        if transition is not None:
            try:
                check.compare(transition.system, transition.footprint)
            except OdpCheckError as err:
                check.report(RuleId.D1, step.rule, str(err))
        out.extend(check.out)
    out.extend(_schema_checks(m, t))
    return sort_violations(out)
