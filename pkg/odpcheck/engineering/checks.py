"""Engineering rules over a system's deployment (E-rules), plus location queries."""
from __future__ import annotations

import logging
from collections import defaultdict
from typing import Dict, FrozenSet, List, Optional, Set

from odpcheck.checks.rules import RuleId, Violation, sort_violations
from odpcheck.engineering.containment import ContainmentPath
from odpcheck.engineering.mobility import PAYLOAD_FIELDS
from odpcheck.engineering.tags import EngineeringTag
from odpcheck.instance import System
from odpcheck.metamodel import Model

logger = logging.getLogger(__name__)


def locate(object_id: str, s: System) -> Optional[ContainmentPath]:
    return s.containment.locate(object_id)


def domain_members(node: str, s: System) -> FrozenSet[str]:
    return s.containment.domain_members(node)


def _strict_tree(s: System) -> List[Violation]:
    out = []
    for oid, paths in sorted(s.containment.placements().items()):
        if len(paths) > 1:
            out.append(Violation(RuleId.E1, (oid,), f"object {oid} is placed in {len(paths)} clusters: {', '.join(map(str, paths))}"))
    capsule_parents: Dict[str, Set[str]] = defaultdict(set)
    cluster_parents: Dict[str, Set[str]] = defaultdict(set)
    for node_name, node in s.containment.nodes.items():
        for capsule_name, capsule in node.capsules.items():
            capsule_parents[capsule_name].add(node_name)
            for cluster_name in capsule.clusters:
                cluster_parents[cluster_name].add(f"{node_name}/{capsule_name}")
    for kind, parents in (("capsule", capsule_parents), ("cluster", cluster_parents)):
        for name in sorted(parents):
            if len(parents[name]) > 1:
                out.append(Violation(RuleId.E1, (name,), f"{kind} {name} appears under {', '.join(sorted(parents[name]))}"))
    return out


def _unknown_members(s: System) -> List[Violation]:
    return [
        Violation(RuleId.E2, (oid,), f"containment places {oid}, which is not an object of {s.name}")
        for oid in sorted(s.containment.contained_objects() - set(s.objects))
    ]


def _managed(s: System, m: Model) -> List[Violation]:
    placed = s.containment.contained_objects()
    out = []
    for oid in sorted(s.objects):
        obj = s.objects[oid]
        tagged = any(
            EngineeringTag.MANAGEMENT_OBJECT in m.templates[t].tags for t in obj.of if t in m.templates
        )
        if tagged and oid not in placed:
            out.append(Violation(RuleId.E3, (oid,), f"managed engineering object {oid} is not placed in any cluster", obj.span))
    return out


def _travel(s: System) -> List[Violation]:
    out = []
    for t in s.travel_log:
        if t.entity not in s.objects:
            out.append(Violation(RuleId.E4, (t.entity,), f"travel record names unknown entity {t.entity}", t.span))
        for node in (t.source, t.destination):
            if node is not None and node not in s.containment.nodes:
                out.append(Violation(RuleId.E4, (t.entity, node), f"travel record of {t.entity} names unknown node {node}", t.span))
    return out


def _payloads(s: System) -> List[Violation]:
    out = []
    for oid in sorted(s.objects):
        obj = s.objects[oid]
        state = obj.state or {}
        if not all(f in state for f in PAYLOAD_FIELDS):
            continue
        for f in PAYLOAD_FIELDS:
            if state[f] in ("", None):
                out.append(Violation(RuleId.E5, (oid, f), f"software entity {oid} has an empty {f}", obj.span))
    return out


def check_engineering(s: System, m: Model) -> List[Violation]:
    violations = _strict_tree(s) + _unknown_members(s) + _managed(s, m) + _travel(s) + _payloads(s)
    logger.debug("system %s: %d engineering violations", s.name, len(violations))
    return sort_violations(violations)
