from __future__ import annotations

import pytest

from odpcheck.dsl.parser import parse_model, parse_system
from odpcheck.dynamics.engine import SkippedBinding, apply_rule, enabled_rules, execute, is_enabled
from odpcheck.errors import (
    DeleteDanglingLink,
    EffectError,
    EvalErrorKind,
    InvariantBroken,
    PostconditionFailed,
    RuleNotEnabled,
)

LAB_MODEL = """
model Lab {
    template Cell {
        attrs {
            v: int;
        }
    }
    action Poke {
        participants: Cell;
        start: before;
        end: after;
    }
    action Pair {
        participants: Cell, Cell;
        start: apart;
        end: paired;
    }
    role pair {
        source: Cell;
        target: Cell;
    }
    invariant Small {
        forall c: Cell . c.v < 5
    }
    dynamic Probe {
        rule drop : Poke (c: Cell) {
            effects {
                delete c;
            }
        }
        rule grow : Poke (c: Cell) {
            effects {
                c.v := c.v + 10;
            }
        }
        rule settle : Poke (c: Cell) {
            pre: c.v > 0;
            effects {
                c.v := 0;
            }
        }
        rule shrink : Poke (c: Cell) {
            effects {
                c.v := c.v - 1;
            }
            post: c.v > 100;
        }
        rule twin : Pair (c: Cell, d: Cell) {
            effects {
                link pair (c -> d);
            }
        }
    }
}
"""

LAB_SYSTEM = """
system Bench conforms Lab {
    object a : Cell {
        v = 1;
    }
    object b : Cell {
        v = 2;
    }
    link p1 : pair (a -> b);
}
"""


@pytest.fixture(scope="module")
def lab():
    return parse_model(LAB_MODEL)


@pytest.fixture(scope="module")
def bench():
    return parse_system(LAB_SYSTEM)


def _pairs(enabled):
    return [(rule.name, b) for rule, b in enabled]


def test_enabled_rules_are_ordered_by_rule_then_binding(dbms, dbms_base):
    assert _pairs(enabled_rules(dbms_base, dbms)) == [
        ("drain", {"s": "s2"}),
        ("invoke", {"c": "c1", "s": "s1"}),
        ("open", {"c": "c1"}),
        ("open", {"c": "c2"}),
        ("promote", {"s": "s1"}),
        ("serve", {"s": "s1"}),
        ("serve", {"s": "s2"}),
    ]


def test_open_then_close_restores_the_system(dbms, dbms_base):
    opened = execute(dbms_base, dbms.rules["open"], {"c": "c1"}, dbms)
    assert "session1" in opened.system.objects
    assert opened.system.links["owns1"].key == ("owns", "c1", "session1")
    assert opened.binding == {"c": "c1", "x": "session1"}
    assert opened.footprint.created == {"session1"}
    assert opened.footprint.links_added == {("owns", "c1", "session1")}

    closed = execute(opened.system, dbms.rules["close"], {"c": "c1", "x": "session1"}, dbms)
    assert closed.footprint.deleted == {"session1"}
    assert closed.footprint.links_removed == {("owns", "c1", "session1")}
    assert closed.system == dbms_base


def test_serve_until_capacity(dbms, dbms_base):
    served = apply_rule(dbms_base, dbms.rules["serve"], {"s": "s2"}, dbms)
    assert served.objects["s2"].state["load"] == 2
    assert dbms_base.objects["s2"].state["load"] == 1
    with pytest.raises(RuleNotEnabled):
        apply_rule(served, dbms.rules["serve"], {"s": "s2"}, dbms)


def test_promote_then_demote_round_trips(dbms, dbms_base):
    promoted = execute(dbms_base, dbms.rules["promote"], {"s": "s1"}, dbms)
    s1 = promoted.system.objects["s1"]
    assert "ReplicaServer" in s1.of
    assert s1.state == {"authorized": False, "capacity": 3, "load": 0, "lag": 0}
    assert promoted.footprint.reclassified == {"s1"}
    assert not is_enabled(promoted.system, dbms.rules["promote"], {"s": "s1"}, dbms)

    demoted = apply_rule(promoted.system, dbms.rules["demote"], {"s": "s1"}, dbms)
    assert demoted == dbms_base


def test_assignment_footprint(dbms, dbms_base):
    t = execute(dbms_base, dbms.rules["invoke"], {"c": "c1", "s": "s1"}, dbms)
    assert t.footprint.assigned == {("c1", "requests")}
    assert not t.footprint.touches_object("c1")
    assert t.system.objects["c1"].state["requests"] == 1


@pytest.mark.parametrize(
    "rule, binding",
    [
        ("invoke", {"c": "c2", "s": "s2"}),  # c2 is not authorized
        ("invoke", {"c": "s1", "s": "s1"}),  # repeated participant of the wrong template
        ("serve", {"s": "c1"}),
        ("serve", {"s": "ghost"}),
        ("open", {}),
    ],
)
def test_rule_not_enabled(dbms, dbms_base, rule, binding):
    with pytest.raises(RuleNotEnabled):
        execute(dbms_base, dbms.rules[rule], binding, dbms)


def test_postcondition_failure(lab, bench):
    with pytest.raises(PostconditionFailed) as info:
        execute(bench, lab.rules["shrink"], {"c": "a"}, lab)
    assert info.value.rule == "shrink"


def test_invariant_broken_unless_checks_are_off(lab, bench):
    with pytest.raises(InvariantBroken) as info:
        execute(bench, lab.rules["grow"], {"c": "a"}, lab)
    assert info.value.schema_name == "Small"
    t = execute(bench, lab.rules["grow"], {"c": "a"}, lab, check_invariants=False)
    assert t.system.objects["a"].state["v"] == 11


def test_delete_must_not_leave_links(lab, bench):
    with pytest.raises(DeleteDanglingLink) as info:
        execute(bench, lab.rules["drop"], {"c": "a"}, lab)
    assert (info.value.object_id, info.value.link_ids) == ("a", ["p1"])


def test_duplicate_link_is_an_effect_error(lab, bench):
    with pytest.raises(EffectError):
        execute(bench, lab.rules["twin"], {"c": "a", "d": "b"}, lab)
    reverse = apply_rule(bench, lab.rules["twin"], {"c": "b", "d": "a"}, lab)
    assert reverse.links["pair1"].key == ("pair", "b", "a")


def test_unevaluable_precondition_disables_the_binding(lab, bench):
    stateless = parse_system("system Bare conforms Lab {\n object z : Cell;\n}\n")
    skipped = []
    names = [rule.name for rule, _ in enabled_rules(stateless, lab, skipped)]
    assert "settle" not in names
    (skip,) = skipped
    assert isinstance(skip, SkippedBinding)
    assert (skip.rule, skip.binding) == ("settle", (("c", "z"),))
    assert skip.error.kind is EvalErrorKind.MISSING_ATTRIBUTE
    with pytest.raises(RuleNotEnabled):
        execute(stateless, lab.rules["settle"], {"c": "z"}, lab)


def test_systems_are_not_mutated(dbms, dbms_base):
    before = dict(dbms_base.objects)
    apply_rule(dbms_base, dbms.rules["open"], {"c": "c2"}, dbms)
    assert dict(dbms_base.objects) == before
    assert "session1" not in dbms_base.objects
