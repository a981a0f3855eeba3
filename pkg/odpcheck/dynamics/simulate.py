from __future__ import annotations

import logging
import random
from typing import Optional

from odpcheck.checks.conformance import conform
from odpcheck.dynamics.engine import enabled_rules, execute
from odpcheck.dynamics.schema import DynamicRule
from odpcheck.dynamics.trace import Step, Trace
from odpcheck.errors import DynamicsError, InitialNonConforming
from odpcheck.instance import BoundState, ConditionBinding, ConditionKind, System
from odpcheck.metamodel import Model, action_kind

logger = logging.getLogger(__name__)


def _step(rule: DynamicRule, binding, m: Model) -> Step:
    participants = [binding[var] for var in rule.variables]
    conditions = tuple(
        ConditionBinding(kind, rule.name, oid, state)
        for kind, state in ((ConditionKind.PRE, BoundState.START), (ConditionKind.POST, BoundState.END))
        for oid in participants
    )
    kind = action_kind(m.action_templates[rule.action])
    return Step(rule.name, dict(binding), kind, conditions)


def simulate(m: Model, s0: System, steps: int, seed: int, name: Optional[str] = None) -> Trace:
    """Seeded random walk of at most ``steps`` transitions from ``s0``.

    Each step draws uniformly among the enabled (rule, binding) pairs with one
    ``randrange`` call. A drawn pair whose application fails, or whose result
    does not conform, is dropped and another one is drawn. The walk stops
    early when no candidate is left.
    """
    report = conform(s0, m)
    if report.violations:
        raise InitialNonConforming(report)
    rng = random.Random(seed)
    snapshots = [s0]
    recorded = []
    current = s0
    for i in range(steps):
        candidates = enabled_rules(current, m)
        chosen = None
        while candidates and chosen is None:
            rule, binding = candidates.pop(rng.randrange(len(candidates)))
            try:
                transition = execute(current, rule, binding, m)
            except DynamicsError as err:
                logger.debug("step %d: %s rejected: %s", i, rule.name, err)
                continue
            if conform(transition.system, m).violations:
                logger.debug("step %d: %s yields a non-conforming system", i, rule.name)
                continue
            chosen = rule, binding, transition.system
        if chosen is None:
            logger.info("simulation of %s stops after %d steps: no rule applies", s0.name, i)
            break
        rule, binding, current = chosen
        recorded.append(_step(rule, binding, m))
        snapshots.append(current)
    return Trace(name or f"{s0.name}_run", m.name, tuple(snapshots), tuple(recorded), seed=seed)
