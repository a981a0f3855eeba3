from __future__ import annotations

from dataclasses import replace

import pytest

from odpcheck.checks.conformance import conform
from odpcheck.dsl.serializer import serialize
from odpcheck.dynamics.engine import execute
from odpcheck.dynamics.simulate import simulate
from odpcheck.dynamics.verify import verify_trace
from odpcheck.errors import InitialNonConforming
from odpcheck.instance import BoundState, ConditionKind
from odpcheck.metamodel import ActionKind

SEEDS = range(10)


def test_same_seed_same_trace(dbms, dbms_base):
    first = simulate(dbms, dbms_base, 40, seed=7)
    second = simulate(dbms, dbms_base, 40, seed=7)
    assert first == second
    assert serialize(first) == serialize(second)


def test_trace_metadata(dbms, dbms_base):
    t = simulate(dbms, dbms_base, 5, seed=1)
    assert t.name == "DbmsBase_run"
    assert t.model_ref == "DBMS"
    assert t.seed == 1
    assert t.snapshots[0] == dbms_base
    assert simulate(dbms, dbms_base, 5, seed=1, name="walk").name == "walk"


def test_steps_record_condition_bindings(dbms, dbms_base):
    t = simulate(dbms, dbms_base, 20, seed=3)
    for step in t.steps:
        participants = [step.binding[var] for var in dbms.rules[step.rule].variables]
        pre = [c.object_ref for c in step.conditions if c.condition is ConditionKind.PRE]
        post = [c.object_ref for c in step.conditions if c.condition is ConditionKind.POST]
        assert pre == post == participants
        assert all(
            c.bound_state is (BoundState.START if c.condition is ConditionKind.PRE else BoundState.END)
            for c in step.conditions
        )
        expected = ActionKind.INTERACTION if len(participants) > 1 else ActionKind.INTERNAL
        assert step.kind is expected


def _frame_holds(m, before, step, after):
    t = execute(before, m.rules[step.rule], step.binding, m)
    if t.system != after:
        return False
    touched = {oid for oid, _ in t.footprint.assigned} | t.footprint.created | t.footprint.deleted | t.footprint.reclassified
    return all(before.objects[oid] == after.objects[oid] for oid in before.objects if oid not in touched)


@pytest.mark.parametrize("seed", SEEDS)
def test_dbms_walks_verify_and_conform(dbms, dbms_base, seed):
    t = simulate(dbms, dbms_base, 100, seed)
    assert verify_trace(dbms, t) == []
    assert all(conform(s, dbms).conforms for s in t.snapshots)
    assert all(_frame_holds(dbms, *transition) for transition in t.transitions())


@pytest.mark.parametrize("seed", SEEDS)
def test_counter_walks_verify_and_conform(counter, counter_start, seed):
    t = simulate(counter, counter_start, 100, seed)
    assert len(t.steps) == 100  # mint is always enabled
    assert verify_trace(counter, t) == []
    assert all(conform(s, counter).conforms for s in t.snapshots)
    assert all(_frame_holds(counter, *transition) for transition in t.transitions())
    assert t.snapshots[-1].objects["a"].state["value"] <= 3


def test_different_seeds_usually_differ(counter, counter_start):
    traces = {serialize(simulate(counter, counter_start, 12, seed)) for seed in SEEDS}
    assert len(traces) > 1


def test_walk_stops_when_nothing_is_enabled(counter, counter_start):
    # without mint, three bumps exhaust the counter
    bump_only = replace(counter, specifier={
        name: replace(d, rules={"bump": d.rules["bump"]}) for name, d in counter.specifier.items()
    })
    t = simulate(bump_only, counter_start, 10, seed=0)
    assert [s.rule for s in t.steps] == ["bump"] * 3
    assert t.snapshots[-1].objects["a"].state["value"] == 3


def test_non_conforming_start_is_refused(dbms, dbms_base):
    s1 = dbms_base.objects["s1"]
    overloaded = dbms_base.with_object(replace(s1, state={**s1.state, "load": 9}))
    with pytest.raises(InitialNonConforming) as info:
        simulate(dbms, overloaded, 5, seed=0)
    assert not info.value.report.conforms
