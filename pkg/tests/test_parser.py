from __future__ import annotations

import pytest

from conftest import CORPUS, FIXTURES, source_files
from odpcheck.constraints.ast import Attr, BoolOp, Compare, Nav, Quant, SetOp, Var
from odpcheck.dsl.lexer import TT, tokenize
from odpcheck.dsl.parser import parse_model, parse_predicate, parse_system, read_any, read_model, read_system, read_trace
from odpcheck.dsl.spans import ParseReport
from odpcheck.dynamics.schema import AddLink, Create
from odpcheck.dynamics.trace import Trace
from odpcheck.engineering.tags import EngineeringTag
from odpcheck.instance import BoundState, ConditionKind, System
from odpcheck.metamodel import ActionKind, CountingScope, Model


def _errors(report: ParseReport):
    return [d.message for d in report.errors]


@pytest.mark.parametrize("path", source_files(), ids=lambda p: p.name)
def test_every_shipped_file_parses(path):
    result = read_any(path.read_text(encoding="utf-8"), str(path))
    assert result.ok, str(result.report)
    assert not result.report.errors


def test_at_least_fifty_shipped_files():
    assert len(source_files()) >= 50


def test_dbms_model_structure(dbms):
    assert isinstance(dbms, Model)
    assert dbms.name == "DBMS"
    assert dbms.templates["Server"].parents == frozenset({"DbmsObject"})
    assert dbms.closure("ReplicaServer") == frozenset({"ReplicaServer", "Server", "DbmsObject"})
    owns = dbms.roles["owns"]
    assert (owns.lower_bound, owns.upper_bound, owns.scope) == (0, 2, CountingScope.PER_SOURCE)
    assert dbms.roles["servedBy"].inverse == "serves"
    assert EngineeringTag.MANAGEMENT_OBJECT in dbms.templates["Binder"].tags
    assert list(dbms.rules) == sorted(dbms.rules)


def test_rule_effects_keep_declaration_order(dbms):
    open_rule = dbms.rules["open"]
    assert [type(e) for e in open_rule.effects] == [Create, AddLink]
    assert open_rule.participants == (("c", "ClientMgr"),)


def test_predicates_resolve_members_against_the_model(dbms):
    pred = dbms.constrainer["SessionsOwned"].predicate
    assert isinstance(pred, Quant)
    assert pred.domain == "Session"
    size_cmp = pred.body
    assert isinstance(size_cmp, Compare)
    nav = size_cmp.left.target
    assert isinstance(nav, Nav) and nav.role == "owns" and nav.inverse


def test_system_items(dbms_base):
    assert isinstance(dbms_base, System)
    assert dbms_base.model_ref == "DBMS"
    assert dbms_base.objects["c1"].of == frozenset({"ClientMgr", "DbmsObject"})
    assert dbms_base.objects["c1"].state["authorized"] is True
    assert dbms_base.links["r1"].key == ("ref", "c1", "s1")
    assert dbms_base.time_points == ("t0",)
    assert dbms_base.containment.nodes["serverNode"].accepts == frozenset({"tok-client", "tok-server"})


def test_trace_items():
    text = (FIXTURES / "i4_ok.odpt").read_text(encoding="utf-8")
    result = read_trace(text, "i4_ok.odpt")
    assert result.ok
    trace = result.value
    assert isinstance(trace, Trace)
    assert len(trace.snapshots) == 2
    step = trace.steps[0]
    assert step.rule == "bump"
    assert step.binding == {"c": "a"}
    assert step.kind is ActionKind.INTERNAL
    assert [(c.condition, c.bound_state) for c in step.conditions] == [
        (ConditionKind.PRE, BoundState.START),
        (ConditionKind.POST, BoundState.END),
    ]


def test_operator_precedence():
    e = parse_predicate("a or b and not c implies d")
    assert isinstance(e, BoolOp) and e.op == "implies"
    assert isinstance(e.left, BoolOp) and e.left.op == "or"
    assert isinstance(e.left.right, BoolOp) and e.left.right.op == "and"


def test_implies_is_right_associative():
    e = parse_predicate("a implies b implies c")
    assert e.op == "implies"
    assert isinstance(e.right, BoolOp) and e.right.op == "implies"


def test_unicode_operators_are_accepted():
    assert parse_predicate("1 ≤ 2") == parse_predicate("1 <= 2")
    assert parse_predicate("1 ≠ 2") == parse_predicate("1 <> 2")


def test_standalone_predicate_without_model_reads_members_as_attributes():
    e = parse_predicate("x.load >= 1")
    assert isinstance(e.left, Attr)
    assert isinstance(e.left.target, Var)


def test_standalone_predicate_with_model_resolves_roles(dbms):
    e = parse_predicate("forall c: ClientMgr . c.ref.notEmpty", dbms)
    assert isinstance(e.body, SetOp)
    assert isinstance(e.body.target, Nav)


def test_syntax_error_carries_a_span():
    report = parse_model("model M {\n    template T {\n        parents P;\n    }\n}\n", "m.odpm")
    assert isinstance(report, ParseReport)
    err = report.errors[0]
    assert err.span.file == "m.odpm"
    assert err.span.start_line == 3


def test_parser_resumes_after_a_broken_declaration():
    text = "model M {\n template A { parents B }\n template C { oops }\n template D { }\n}\n"
    result = read_model(text)
    assert not result.ok
    assert len(result.report.errors) >= 2


def test_link_to_undeclared_object_is_rejected():
    report = parse_system("system S conforms M {\n object a : T;\n link l : r (a -> b);\n}\n")
    assert isinstance(report, ParseReport)
    assert any("unknown object b" in m for m in _errors(report))


def test_duplicate_declarations_are_rejected():
    report = parse_model("model M { template T { } template T { } }")
    assert any("duplicate template T" in m for m in _errors(report))


def test_unresolved_template_reference():
    report = parse_model("model M { template T { parents: Nope; } }")
    assert any("unresolved template Nope" in m for m in _errors(report))


def test_inverse_roles_must_agree():
    report = parse_model(
        "model M { template T { } "
        "role a { source: T; target: T; inverse: b; } "
        "role b { source: T; target: T; } }"
    )
    assert any("not vice versa" in m for m in _errors(report))


def test_sort_errors_in_schemas_are_parse_errors():
    report = parse_model(
        "model M { template T { attrs { n: int; } } invariant I { forall t: T . t.n and true } }"
    )
    assert isinstance(report, ParseReport)
    assert any(m.startswith("type error") for m in _errors(report))


def test_create_must_initialise_every_attribute():
    report = parse_model(
        "model M { template T { attrs { n: int; } } "
        "action A { participants: T; start: s; end: e; } "
        "dynamic D { rule r : A (t: T) { effects { create x : T; } } } }"
    )
    assert any("does not initialise n" in m for m in _errors(report))


def test_rule_without_effects_warns():
    result = read_model(
        "model M { template T { } action A { participants: T; start: s; end: e; } "
        "dynamic D { rule r : A (t: T) { } } }"
    )
    assert result.ok
    assert any("has no effects" in d.message for d in result.report.warnings)


def test_trace_step_count_must_match():
    text = (FIXTURES / "d1_ok.odpt").read_text(encoding="utf-8").replace("steps 1", "steps 2")
    result = read_trace(text)
    assert not result.ok
    assert any("declares 2 steps but records 1" in d.message for d in result.report.errors)


def test_trace_snapshots_must_claim_the_trace_model():
    text = (FIXTURES / "d2_ok.odpt").read_text(encoding="utf-8").replace("conforms Counter", "conforms Other")
    assert not read_trace(text).ok


def test_read_any_dispatches_on_the_first_keyword():
    assert isinstance(read_any((CORPUS / "dbms.odpm").read_text(encoding="utf-8")).value, Model)
    assert isinstance(read_any((CORPUS / "dbms_base.odps").read_text(encoding="utf-8")).value, System)
    assert isinstance(read_any((FIXTURES / "d1_ok.odpt").read_text(encoding="utf-8")).value, Trace)


def test_keywords_may_name_tag_functions():
    result = read_model("model M { template T { tags: management.node, management.cluster; } }")
    assert result.ok, str(result.report)
    assert result.value.templates["T"].tags == frozenset(
        {EngineeringTag.MANAGEMENT_NODE, EngineeringTag.MANAGEMENT_CLUSTER}
    )


def test_unknown_tag_is_an_error():
    assert not read_model("model M { template T { tags: management.spaceship; } }").ok


def test_lexer_reports_unterminated_comment():
    report = ParseReport()
    tokens = tokenize("model /* never closed", "x", report)
    assert report.failed
    assert tokens[-1].type == TT.EOF


def test_spans_do_not_affect_equality():
    a = read_system("system S conforms M { object a : T; }", "one.odps").value
    b = read_system("system S conforms M {\n\n    object a : T;\n}", "two.odps").value
    assert a == b
