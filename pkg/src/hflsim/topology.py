"""Infrastructure model: nodes with roles and symmetric pairwise link costs.

A topology is an immutable value. Every operation that changes it returns a
new instance, so snapshots can be shared freely between components. Link
costs are stored as an explicit pairwise map in units per MB; pairs that were
never specified fall back to the topology's default cost rate. There is no
multi-hop routing: the cost between two nodes is always the direct entry.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Optional

from .errors import (
    CannotRemoveArtifactServer,
    DuplicateNode,
    InvalidTopology,
    UnknownNode,
)

NodeId = str

_LinkKey = tuple[NodeId, NodeId]


def _pair(a: NodeId, b: NodeId) -> _LinkKey:
    """Canonical unordered key for a link."""
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class DataProfile:
    """Per-class sample counts held by a trainable node."""

    class_counts: Mapping[int, int]

    def __post_init__(self):
        counts = {int(k): int(v) for k, v in dict(self.class_counts).items()}
        if any(v < 0 for v in counts.values()):
            raise InvalidTopology("class sample counts must be >= 0")
        if sum(counts.values()) < 1:
            raise InvalidTopology("a data profile needs at least one sample")
        object.__setattr__(self, "class_counts", counts)

    @property
    def total_samples(self) -> int:
        return sum(self.class_counts.values())

    @property
    def classes(self) -> frozenset[int]:
        return frozenset(k for k, v in self.class_counts.items() if v > 0)


@dataclass(frozen=True)
class NodeSpec:
    """One node of the computing continuum and its capabilities.

    ``has_service_artifacts`` tracks whether the service image is already
    present; it starts false for joining nodes and is flipped to true
    permanently after the first artifact download.
    """

    id: NodeId
    can_train: bool = False
    can_aggregate: bool = False
    has_service_artifacts: bool = False
    data_profile: Optional[DataProfile] = None

    def __post_init__(self):
        if not self.id:
            raise InvalidTopology("node id must be non-empty")
        if not (self.can_train or self.can_aggregate):
            raise InvalidTopology(
                f"node {self.id!r} must be trainable or aggregation-capable"
            )
        if self.can_train and self.data_profile is None:
            raise InvalidTopology(f"trainable node {self.id!r} needs a data profile")
        if not self.can_train and self.data_profile is not None:
            raise InvalidTopology(
                f"node {self.id!r} has a data profile but cannot train"
            )


@dataclass(frozen=True)
class Topology:
    """Node set plus symmetric link-cost map.

    Invariants enforced at construction: node ids unique, artifact server and
    GA candidate are members, all link endpoints exist, all costs finite and
    non-negative. Self links are implicitly zero and never stored.
    """

    nodes: Mapping[NodeId, NodeSpec]
    links: Mapping[_LinkKey, float]
    default_link_cost: float
    artifact_server: NodeId
    ga_candidate: NodeId

    def __post_init__(self):
        nodes = dict(self.nodes)
        for node_id, spec in nodes.items():
            if node_id != spec.id:
                raise InvalidTopology(f"node map key {node_id!r} != spec id {spec.id!r}")
        if self.default_link_cost < 0:
            raise InvalidTopology("default_link_cost must be >= 0")
        for anchor in (self.artifact_server, self.ga_candidate):
            if anchor not in nodes:
                raise InvalidTopology(f"anchor node {anchor!r} is not in the topology")
        links = {}
        for (a, b), cost in dict(self.links).items():
            if a == b:
                raise InvalidTopology(f"self link on {a!r}; self cost is fixed at 0")
            for end in (a, b):
                if end not in nodes:
                    raise InvalidTopology(f"link endpoint {end!r} is not a node")
            cost = float(cost)
            if not cost >= 0:
                raise InvalidTopology(f"link cost for ({a!r}, {b!r}) must be >= 0")
            links[_pair(a, b)] = cost
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "links", links)
        object.__setattr__(self, "default_link_cost", float(self.default_link_cost))

    @classmethod
    def build(
        cls,
        specs: Iterable[NodeSpec],
        links: Iterable[tuple[NodeId, NodeId, float]],
        *,
        default_link_cost: float,
        artifact_server: NodeId,
        ga_candidate: NodeId,
    ) -> "Topology":
        nodes: dict[NodeId, NodeSpec] = {}
        for spec in specs:
            if spec.id in nodes:
                raise DuplicateNode(f"node {spec.id!r} defined twice")
            nodes[spec.id] = spec
        link_map = {_pair(a, b): float(cost) for a, b, cost in links}
        return cls(
            nodes=nodes,
            links=link_map,
            default_link_cost=default_link_cost,
            artifact_server=artifact_server,
            ga_candidate=ga_candidate,
        )

    def has_node(self, node_id: NodeId) -> bool:
        return node_id in self.nodes

    def node(self, node_id: NodeId) -> NodeSpec:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNode(f"unknown node {node_id!r}") from None

    def profile(self, node_id: NodeId) -> DataProfile:
        spec = self.node(node_id)
        if spec.data_profile is None:
            raise InvalidTopology(f"node {node_id!r} has no data profile")
        return spec.data_profile

    def trainable_nodes(self) -> list[NodeId]:
        return sorted(n for n, s in self.nodes.items() if s.can_train)

    def aggregation_capable_nodes(self) -> list[NodeId]:
        return sorted(n for n, s in self.nodes.items() if s.can_aggregate)


def link_cost_between(topology: Topology, a: NodeId, b: NodeId) -> float:
    """Symmetric cost rate between two nodes; zero for a node and itself.

    Pairs without an explicit entry use the topology's default cost rate.
    """
    for end in (a, b):
        if not topology.has_node(end):
            raise UnknownNode(f"unknown node {end!r}")
    if a == b:
        return 0.0
    return topology.links.get(_pair(a, b), topology.default_link_cost)


def add_node(
    topology: Topology, spec: NodeSpec, links: Mapping[NodeId, float]
) -> Topology:
    """Return a topology extended with ``spec`` and its explicit links."""
    if topology.has_node(spec.id):
        raise DuplicateNode(f"node {spec.id!r} already exists")
    for target in links:
        if not topology.has_node(target):
            raise UnknownNode(f"link target {target!r} is not a node")
    new_nodes = dict(topology.nodes)
    new_nodes[spec.id] = spec
    new_links = dict(topology.links)
    for target, cost in links.items():
        cost = float(cost)
        if not cost >= 0:
            raise InvalidTopology(f"link cost to {target!r} must be >= 0")
        new_links[_pair(spec.id, target)] = cost
    return replace(topology, nodes=new_nodes, links=new_links)


def remove_node(topology: Topology, node_id: NodeId) -> Topology:
    """Return a topology without ``node_id`` and all its incident links."""
    if not topology.has_node(node_id):
        raise UnknownNode(f"unknown node {node_id!r}")
    if node_id == topology.artifact_server:
        raise CannotRemoveArtifactServer(
            f"node {node_id!r} is the artifact server and cannot be removed"
        )
    if node_id == topology.ga_candidate:
        raise InvalidTopology(
            f"node {node_id!r} is the GA candidate and cannot be removed"
        )
    new_nodes = {n: s for n, s in topology.nodes.items() if n != node_id}
    new_links = {
        pair: cost for pair, cost in topology.links.items() if node_id not in pair
    }
    return replace(topology, nodes=new_nodes, links=new_links)


def set_link_cost(topology: Topology, a: NodeId, b: NodeId, cost: float) -> Topology:
    """Return a topology with the cost for one pair replaced."""
    for end in (a, b):
        if not topology.has_node(end):
            raise UnknownNode(f"unknown node {end!r}")
    if a == b:
        raise InvalidTopology("self link cost is fixed at 0")
    cost = float(cost)
    if not cost >= 0:
        raise InvalidTopology("link cost must be >= 0")
    new_links = dict(topology.links)
    new_links[_pair(a, b)] = cost
    return replace(topology, links=new_links)


def mark_artifacts_downloaded(
    topology: Topology, node_ids: Iterable[NodeId]
) -> Topology:
    """Flag nodes as having the service artifacts; the flag never reverts."""
    new_nodes = dict(topology.nodes)
    for node_id in node_ids:
        spec = topology.node(node_id)
        if not spec.has_service_artifacts:
            new_nodes[node_id] = replace(spec, has_service_artifacts=True)
    return replace(topology, nodes=new_nodes)
