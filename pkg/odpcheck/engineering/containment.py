"""Node / capsule / cluster deployment tree.

Values are immutable; every operation returns a new ``Containment``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Tuple


@dataclass(frozen=True)
class Cluster:
    name: str
    objects: FrozenSet[str] = frozenset()


@dataclass(frozen=True)
class Capsule:
    name: str
    clusters: Mapping[str, Cluster] = field(default_factory=dict)


@dataclass(frozen=True)
class Node:
    name: str
    accepts: FrozenSet[str] = frozenset()
    capsules: Mapping[str, Capsule] = field(default_factory=dict)

    def accepts_credential(self, credential: str) -> bool:
        return credential in self.accepts


@dataclass(frozen=True, order=True)
class ContainmentPath:
    node: str
    capsule: str
    cluster: str

    def __str__(self) -> str:
        return f"{self.node}/{self.capsule}/{self.cluster}"


@dataclass(frozen=True)
class Containment:
    nodes: Mapping[str, Node] = field(default_factory=dict)

    def clusters(self) -> Iterator[Tuple[ContainmentPath, Cluster]]:
        for n in sorted(self.nodes):
            node = self.nodes[n]
            for c in sorted(node.capsules):
                capsule = node.capsules[c]
                for k in sorted(capsule.clusters):
                    yield ContainmentPath(n, c, k), capsule.clusters[k]

    def placements(self) -> Dict[str, List[ContainmentPath]]:
        out: Dict[str, List[ContainmentPath]] = {}
        for path, cluster in self.clusters():
            for oid in sorted(cluster.objects):
                out.setdefault(oid, []).append(path)
        return out

    def locate(self, object_id: str) -> Optional[ContainmentPath]:
        for path, cluster in self.clusters():
            if object_id in cluster.objects:
                return path
        return None

    def contained_objects(self) -> FrozenSet[str]:
        return frozenset(oid for _, c in self.clusters() for oid in c.objects)

    def domain_members(self, node: str) -> FrozenSet[str]:
        return frozenset(
            oid for path, c in self.clusters() if path.node == node for oid in c.objects
        )

    def has_cluster(self, path: ContainmentPath) -> bool:
        node = self.nodes.get(path.node)
        capsule = node.capsules.get(path.capsule) if node else None
        return capsule is not None and path.cluster in capsule.clusters

    def designated_cluster(self, node: str) -> Optional[ContainmentPath]:
        """First cluster of the first capsule of ``node``, in name order."""
        for path, _ in self.clusters():
            if path.node == node:
                return path
        return None

    # ---- persistent updates ----------------------------------------------------
    def _update_cluster(self, path: ContainmentPath, objects: FrozenSet[str]) -> "Containment":
        node = self.nodes[path.node]
        capsule = node.capsules[path.capsule]
        cluster = replace(capsule.clusters[path.cluster], objects=objects)
        capsule = replace(capsule, clusters={**capsule.clusters, path.cluster: cluster})
        node = replace(node, capsules={**node.capsules, path.capsule: capsule})
        return replace(self, nodes={**self.nodes, path.node: node})

    def remove_object(self, object_id: str) -> "Containment":
        out = self
        for path, cluster in self.clusters():
            if object_id in cluster.objects:
                out = out._update_cluster(path, cluster.objects - {object_id})
        return out

    def place(self, object_id: str, path: ContainmentPath) -> "Containment":
        cluster = self.nodes[path.node].capsules[path.capsule].clusters[path.cluster]
        return self._update_cluster(path, cluster.objects | {object_id})

    def rename_object(self, old: str, new: str) -> "Containment":
        out = self
        for path, cluster in self.clusters():
            if old in cluster.objects:
                out = out._update_cluster(path, (cluster.objects - {old}) | {new})
        return out
