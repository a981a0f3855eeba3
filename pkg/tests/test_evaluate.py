from __future__ import annotations

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from odpcheck.constraints.ast import (
    Arith,
    Attr,
    BoolOp,
    Compare,
    DomainKind,
    Lit,
    Nav,
    Not,
    Quant,
    SetOp,
    Var,
)
from odpcheck.constraints.evaluate import Binding, ObjRef, eval_expr, eval_predicate
from odpcheck.dsl.parser import parse_predicate
from odpcheck.errors import EvalError, EvalErrorKind
from odpcheck.instance import Link, ObjectInstance, System
from reference_interpreter import interpret

# ---- hand-picked cases ------------------------------------------------------


def _holds(text, system, model, **binding):
    env = Binding({k: ObjRef(v) for k, v in binding.items()})
    return eval_predicate(parse_predicate(text, model), system, env, model=model)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("forall s: Server . s.load <= s.capacity", True),
        ("exists s: Server . s.load = s.capacity", False),
        ("forall c: ClientMgr . c.ref.size = 1", True),
        ("@c1.ref.includes(@s1)", True),
        ("@c1.ref.includes(@s2)", False),
        ("@s1.serves.includesAll(@s1.servedBy~)", True),
        ("@c2.servedBy.isEmpty", True),
        ("@c1.servedBy.excludes(@s1)", False),
        ("@s2.load * 3 - 1 = 2", True),
        ("forall b: Busy . b = @s2", True),
        ("exists e: Engaged . e = @s1", True),
        ('@c1.authority = "alice" implies @c1.authorized', True),
        ("not @c2.authorized and @c1.authorized", True),
    ],
)
def test_predicates_on_the_corpus_system(dbms, dbms_base, text, expected):
    assert _holds(text, dbms_base, dbms) is expected


def test_bound_variables(dbms, dbms_base):
    assert _holds("c.ref.includes(s)", dbms_base, dbms, c="c1", s="s1")
    assert not _holds("c.ref.includes(s)", dbms_base, dbms, c="c2", s="s1")


def test_connectives_short_circuit(dbms, dbms_base):
    # c1 has no load attribute; the right operands are never evaluated
    assert _holds("false and @c1.load > 0", dbms_base, dbms) is False
    assert _holds("true or @c1.load > 0", dbms_base, dbms) is True
    assert _holds("false implies @c1.load > 0", dbms_base, dbms) is True


def test_quantifiers_stop_at_the_first_decisive_element(dbms, dbms_base):
    # c1 comes before c2 and decides the exists; c2 has no lag either way
    assert _holds("exists c: ClientMgr . c.authorized or c.lag > 0", dbms_base, dbms) is True


@pytest.mark.parametrize(
    "text, kind",
    [
        ("@c1.load > 0", EvalErrorKind.MISSING_ATTRIBUTE),
        ("@ghost.load > 0", EvalErrorKind.UNKNOWN_OBJECT),
        ("y.load > 0", EvalErrorKind.UNBOUND_VARIABLE),
    ],
)
def test_evaluation_errors(dbms, dbms_base, text, kind):
    with pytest.raises(EvalError) as info:
        _holds(text, dbms_base, dbms)
    assert info.value.kind is kind


def test_type_domains_need_the_model(dbms, dbms_base):
    pred = parse_predicate("forall b: Busy . true", dbms)
    with pytest.raises(EvalError) as info:
        eval_predicate(pred, dbms_base)
    assert info.value.kind is EvalErrorKind.UNKNOWN_DOMAIN


def test_sort_mismatch_is_an_error_not_false(dbms_base):
    with pytest.raises(EvalError) as info:
        eval_predicate(Compare("=", Lit(1), Lit(True)), dbms_base)
    assert info.value.kind is EvalErrorKind.SORT_MISMATCH


def test_non_boolean_predicate_is_rejected(dbms_base):
    with pytest.raises(EvalError):
        eval_predicate(Lit(3), dbms_base)
    assert eval_expr(Lit(3), dbms_base) == 3


def test_binding_refuses_shadowing():
    b = Binding().bind("x", ObjRef("a"))
    with pytest.raises(EvalError) as info:
        b.bind("x", ObjRef("b"))
    assert info.value.kind is EvalErrorKind.SHADOWED_VARIABLE
    assert dict(b.bind("y", 1)) == {"x": ObjRef("a"), "y": 1}


# ---- random predicates against the reference interpreter --------------------

VAR_NAMES = ("p", "q", "u", "v")


def _var_refs(names):
    return st.sampled_from(names).map(Var)


def _int_expr(names, depth):
    leaves = [st.integers(min_value=-3, max_value=3).map(Lit)]
    if names:
        refs = _var_refs(names)
        leaves += [
            refs.map(lambda v: Attr(v, "n")),
            st.builds(lambda v, inv: SetOp("size", Nav(v, "r", inv)), refs, st.booleans()),
        ]
    leaf = st.one_of(*leaves)
    if depth <= 0:
        return leaf
    sub = st.deferred(lambda: _int_expr(names, depth - 1))
    return st.one_of(leaf, st.builds(Arith, st.sampled_from(["+", "-", "*"]), sub, sub))


def _bool_expr(names, depth):
    cmp = st.builds(Compare, st.sampled_from(["=", "<>", "<", "<=", ">", ">="]), _int_expr(names, 1), _int_expr(names, 1))
    leaves = [st.booleans().map(Lit), cmp]
    if names:
        refs = _var_refs(names)
        leaves += [
            refs.map(lambda v: Attr(v, "b")),
            st.builds(Compare, st.sampled_from(["=", "<>"]), refs, refs),
            st.builds(
                lambda v, w, op, inv: SetOp(op, Nav(v, "r", inv), w),
                refs, refs, st.sampled_from(["includes", "excludes"]), st.booleans(),
            ),
            st.builds(lambda v, op: SetOp(op, Nav(v, "r")), refs, st.sampled_from(["isEmpty", "notEmpty"])),
            st.builds(lambda v, w: SetOp("includesAll", Nav(v, "r"), Nav(w, "r")), refs, refs),
        ]
    leaf = st.one_of(*leaves)
    if depth <= 0:
        return leaf
    sub = st.deferred(lambda: _bool_expr(names, depth - 1))
    options = [
        leaf,
        st.builds(Not, sub),
        st.builds(BoolOp, st.sampled_from(["and", "or", "implies"]), sub, sub),
    ]
    free = [n for n in VAR_NAMES if n not in names]
    if free:
        fresh = free[0]
        options.append(st.builds(
            lambda kind, body: Quant(kind, fresh, "T", body, DomainKind.TEMPLATE),
            st.sampled_from(["forall", "exists"]),
            st.deferred(lambda: _bool_expr(names + (fresh,), depth - 1)),
        ))
    return st.one_of(*options)


@st.composite
def small_systems(draw):
    count = draw(st.integers(min_value=0, max_value=4))
    ids = [f"o{i}" for i in range(count)]
    objects = {
        oid: ObjectInstance(oid, frozenset({"T"}), {
            "n": draw(st.integers(min_value=-3, max_value=3)),
            "b": draw(st.booleans()),
        })
        for oid in ids
    }
    pairs = draw(st.sets(st.tuples(st.sampled_from(ids), st.sampled_from(ids)), max_size=6)) if ids else set()
    links = {f"l{i}": Link(f"l{i}", "r", s, t) for i, (s, t) in enumerate(sorted(pairs))}
    return System("Random", "Tiny", objects, links)


CLOSED = _bool_expr((), 4)


@settings(max_examples=500, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(CLOSED, small_systems())
def test_evaluator_agrees_with_reference_interpreter(pred, system):
    assert eval_predicate(pred, system) == interpret(pred, system)


@settings(max_examples=500, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(_bool_expr(("p",), 3), small_systems())
def test_quantifier_duality(body, system):
    forall = Quant("forall", "p", "T", body, DomainKind.TEMPLATE)
    exists_not = Quant("exists", "p", "T", Not(body), DomainKind.TEMPLATE)
    assert eval_predicate(Not(forall), system) == eval_predicate(exists_not, system)
    exists = Quant("exists", "p", "T", body, DomainKind.TEMPLATE)
    forall_not = Quant("forall", "p", "T", Not(body), DomainKind.TEMPLATE)
    assert eval_predicate(Not(exists), system) == eval_predicate(forall_not, system)


def test_nested_quantifiers_over_one_name_fail_evaluation(dbms_base):
    inner = Quant("forall", "s", "Server", Lit(True), DomainKind.TEMPLATE)
    outer = Quant("exists", "s", "Server", inner, DomainKind.TEMPLATE)
    with pytest.raises(EvalError) as info:
        eval_predicate(outer, dbms_base)
    assert info.value.kind is EvalErrorKind.SHADOWED_VARIABLE
