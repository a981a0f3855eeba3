from __future__ import annotations

import pytest

from odpcheck.constraints.typecheck import ANY_OBJECT, Kind, object_of, typecheck_expr, typecheck_predicate
from odpcheck.dsl.parser import parse_predicate
from odpcheck.dsl.spans import ParseReport


def _check(text, m, env=None):
    return typecheck_predicate(parse_predicate(text, m), m, env or {})


@pytest.mark.parametrize(
    "text",
    [
        "forall s: Server . s.load <= s.capacity",
        "exists c: ClientMgr . c.ref.notEmpty and c.authorized",
        "forall x: Session . x.owns~.size = 1",
        "forall c: ClientMgr . c.ref.includesAll(c.servedBy)",
        "forall b: Busy . exists s: Server . s = b",
        'forall c: ClientMgr . c.authority <> ""',
    ],
)
def test_well_sorted_predicates(dbms, text):
    assert _check(text, dbms) == []


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("forall s: Server . s.load", "int used as bool"),
        ("forall s: Server . s.load + true > 0", "bool used as int"),
        ("forall s: Server . s.authorized = 1", "cannot compare bool with int"),
        ("forall s: Server . s.nickname = 1", "attribute nickname is not declared"),
        ("forall s: Server . forall s: Server . true", "shadows"),
        ("y.load > 0", "unbound variable y"),
        ("forall c: ClientMgr . c.ref.includes(1)", "int used as object"),
    ],
)
def test_sort_errors(dbms, text, fragment):
    errors = _check(text, dbms)
    assert errors, f"{text} should not typecheck"
    assert any(fragment in e.message for e in errors), [e.message for e in errors]


def test_errors_carry_spans(dbms):
    (err,) = _check("forall s: Server . s.load", dbms)
    assert err.span is not None
    assert err.span.start_col > 1


def test_navigation_yields_a_set_of_role_targets(dbms):
    sort, errors = typecheck_expr(parse_predicate("c.servedBy", dbms), dbms, {"c": object_of("ClientMgr")})
    assert errors == []
    assert sort.kind is Kind.SET
    assert sort.templates == frozenset({"Server"})


def test_attributes_are_inherited(dbms):
    env = {"r": object_of("ReplicaServer")}
    assert _check("r.authorized and r.lag >= 0 and r.load >= 0", dbms, env) == []


def test_untyped_object_sees_every_template_attribute(dbms):
    assert _check("self.load >= 1", dbms, {"self": ANY_OBJECT}) == []


def test_unknown_domain_is_reported_while_resolving(dbms):
    report = parse_predicate("forall s: Nowhere . true", dbms)
    assert isinstance(report, ParseReport)
    assert "unknown quantifier domain Nowhere" in str(report)


def test_unresolved_domain_is_a_sort_error(dbms):
    errors = typecheck_predicate(parse_predicate("forall s: Nowhere . true"), dbms)
    assert any("unknown quantifier domain Nowhere" in e.message for e in errors)
