"""Pipeline configurations, best-fit strategies, and configuration diffs.

A configuration names the global aggregator, the client clusters under each
local aggregator, and the aggregation frequency. Strategies that compute a
best-fit configuration for a topology are looked up in a registry by name so
new placement policies can be added without touching the validation logic.
Diffing two configurations yields the change set that a reconfiguration has
to apply; the change set is what the cost model prices.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional

from .errors import (
    InsufficientAggregators,
    InvalidConfiguration,
    NoTrainableNodes,
    StrategyFailure,
    UnknownStrategy,
)
from .topology import NodeId, Topology, link_cost_between


@dataclass(frozen=True)
class AggregationFrequency:
    """Client epochs per local round and local rounds per global round."""

    local_epochs: int
    local_rounds: int

    def __post_init__(self):
        if self.local_epochs < 1:
            raise ValueError("local_epochs must be >= 1")
        if self.local_rounds < 1:
            raise ValueError("local_rounds must be >= 1")


@dataclass(frozen=True)
class HflConfiguration:
    """Deployable pipeline layout: GA node, client clusters per LA, frequency.

    Construction only normalizes the cluster map; invariant checking lives in
    :func:`validate_configuration` so that invalid candidates can be built,
    inspected, and reported instead of failing opaquely.
    """

    ga: NodeId
    clusters: Mapping[NodeId, frozenset[NodeId]]
    frequency: AggregationFrequency

    def __post_init__(self):
        normalized = {la: frozenset(members) for la, members in dict(self.clusters).items()}
        object.__setattr__(self, "clusters", normalized)

    def clients(self) -> frozenset[NodeId]:
        out: set[NodeId] = set()
        for members in self.clusters.values():
            out.update(members)
        return frozenset(out)

    def aggregators(self) -> frozenset[NodeId]:
        return frozenset(self.clusters)

    def parent_of(self, client: NodeId) -> NodeId:
        for la, members in self.clusters.items():
            if client in members:
                return la
        raise InvalidConfiguration(f"node {client!r} is not a client here")

    def key(self) -> tuple:
        """Canonical hashable identity, used to deduplicate deployed configs."""
        return (
            self.ga,
            tuple(sorted((la, tuple(sorted(m))) for la, m in self.clusters.items())),
            (self.frequency.local_epochs, self.frequency.local_rounds),
        )


class ChangeKind(enum.Enum):
    CLIENT_ASSIGNED = "client_assigned"
    CLIENT_REASSIGNED = "client_reassigned"
    CLIENT_REMOVED = "client_removed"
    AGGREGATOR_ADDED = "aggregator_added"
    AGGREGATOR_REMOVED = "aggregator_removed"


_REMOVALS = (ChangeKind.CLIENT_REMOVED, ChangeKind.AGGREGATOR_REMOVED)


@dataclass(frozen=True)
class ChangeItem:
    """One per-node change; ``new_parent`` is the parent aggregator afterwards.

    The global aggregator has no parent, so a GA-level AGGREGATOR_ADDED item
    carries the node itself as ``new_parent`` (its model-download leg is over
    a zero-cost self link).
    """

    node: NodeId
    kind: ChangeKind
    new_parent: Optional[NodeId] = None

    def __post_init__(self):
        if self.kind in _REMOVALS:
            if self.new_parent is not None:
                raise InvalidConfiguration("removal items carry no new parent")
        elif self.new_parent is None:
            raise InvalidConfiguration(f"{self.kind.value} item needs a new parent")


@dataclass(frozen=True)
class ChangeSet:
    items: tuple[ChangeItem, ...] = ()

    def __post_init__(self):
        items = tuple(self.items)
        seen: set[NodeId] = set()
        for item in items:
            if item.node in seen:
                raise InvalidConfiguration(
                    f"node {item.node!r} appears twice in one change set"
                )
            seen.add(item.node)
        object.__setattr__(self, "items", items)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __bool__(self) -> bool:
        return bool(self.items)


def internal_violations(config: HflConfiguration) -> list[str]:
    """Configuration-internal invariant violations, topology not consulted."""
    violations = []
    if not config.clusters:
        violations.append("configuration has no clusters")
    assignments: dict[NodeId, int] = {}
    for la, members in config.clusters.items():
        if not members:
            violations.append(f"cluster of {la!r} is empty")
        for client in members:
            assignments[client] = assignments.get(client, 0) + 1
    for client, count in assignments.items():
        if count > 1:
            violations.append(f"client {client!r} appears in {count} clusters")
        if client in config.clusters:
            violations.append(f"node {client!r} is both a client and an aggregator")
    if config.ga in config.clusters:
        violations.append(f"GA {config.ga!r} is also a local aggregator")
    if config.ga in assignments:
        violations.append(f"GA {config.ga!r} is also a client")
    return violations


def validate_configuration(config: HflConfiguration, topology: Topology) -> list[str]:
    """All violations of the configuration against itself and the topology.

    Empty list means the configuration is deployable.
    """
    violations = internal_violations(config)
    if not topology.has_node(config.ga):
        violations.append(f"GA {config.ga!r} is not in the topology")
    elif not topology.nodes[config.ga].can_aggregate:
        violations.append(f"GA {config.ga!r} cannot aggregate")
    for la in sorted(config.clusters):
        if not topology.has_node(la):
            violations.append(f"aggregator {la!r} is not in the topology")
        elif not topology.nodes[la].can_aggregate:
            violations.append(f"aggregator {la!r} cannot aggregate")
    for client in sorted(config.clients()):
        if not topology.has_node(client):
            violations.append(f"client {client!r} is not in the topology")
        elif not topology.nodes[client].can_train:
            violations.append(f"client {client!r} cannot train")
    return violations


# --- strategy registry --------------------------------------------------------

StrategyFn = Callable[[Topology, AggregationFrequency, int], HflConfiguration]

_STRATEGIES: dict[str, StrategyFn] = {}


def register_strategy(name: str):
    def wrap(fn: StrategyFn) -> StrategyFn:
        _STRATEGIES[name] = fn
        return fn

    return wrap


def strategy_names() -> list[str]:
    return sorted(_STRATEGIES)


def resolve_strategy(name: str) -> StrategyFn:
    try:
        return _STRATEGIES[name]
    except KeyError:
        raise UnknownStrategy(
            f"unknown strategy {name!r}; registered: {strategy_names()}"
        ) from None


def calc_best_fit_config(
    topology: Topology,
    strategy: str,
    frequency: AggregationFrequency,
    la_count: int,
) -> HflConfiguration:
    """Run the named strategy and return its configuration."""
    fn = resolve_strategy(strategy)
    try:
        return fn(topology, frequency, la_count)
    except (InsufficientAggregators, NoTrainableNodes, InvalidConfiguration):
        raise
    except Exception as exc:  # registered strategies are third-party code
        raise StrategyFailure(f"strategy {strategy!r} failed: {exc}") from exc


@register_strategy("minCommCost")
def min_comm_cost(
    topology: Topology, frequency: AggregationFrequency, la_count: int
) -> HflConfiguration:
    """Minimize client-to-aggregator communication cost.

    Local aggregators are the ``la_count`` aggregation-capable nodes with the
    cheapest link to the GA candidate; every trainable node joins the LA with
    the cheapest link to it. Ties break on lexicographic node id, so the
    result is deterministic. Aggregators that end up without clients are not
    deployed.
    """
    if la_count < 1:
        raise InsufficientAggregators("la_count must be >= 1")
    ga = topology.ga_candidate
    candidates = [n for n in topology.aggregation_capable_nodes() if n != ga]
    if len(candidates) < la_count:
        raise InsufficientAggregators(
            f"need {la_count} aggregation-capable nodes besides the GA, "
            f"found {len(candidates)}"
        )
    las = sorted(candidates, key=lambda n: (link_cost_between(topology, n, ga), n))
    las = las[:la_count]
    la_set = set(las)
    clients = [n for n in topology.trainable_nodes() if n not in la_set and n != ga]
    if not clients:
        raise NoTrainableNodes("no trainable node available as a client")
    clusters: dict[NodeId, set[NodeId]] = {la: set() for la in las}
    for client in sorted(clients):
        best = min(las, key=lambda la: (link_cost_between(topology, client, la), la))
        clusters[best].add(client)
    populated = {la: members for la, members in clusters.items() if members}
    return HflConfiguration(ga=ga, clusters=populated, frequency=frequency)


# --- diff / patch -------------------------------------------------------------

_Role = tuple[str, Optional[NodeId]]


def _roles(config: HflConfiguration) -> dict[NodeId, _Role]:
    roles: dict[NodeId, _Role] = {config.ga: ("ga", None)}
    for la, members in config.clusters.items():
        roles[la] = ("la", config.ga)
        for client in members:
            roles[client] = ("client", la)
    return roles


def diff_configurations(
    orig: HflConfiguration, new: HflConfiguration
) -> ChangeSet:
    """Change set turning ``orig`` into ``new``: one item per differing node.

    A node changing role (for example client to aggregator) yields a single
    item describing its role in ``new``; nodes absent from ``new`` yield the
    removal item for their old role.
    """
    roles_orig = _roles(orig)
    roles_new = _roles(new)
    items: list[ChangeItem] = []
    for node in sorted(roles_orig.keys() | roles_new.keys()):
        before = roles_orig.get(node)
        after = roles_new.get(node)
        if before == after:
            continue
        if after is None:
            kind = (
                ChangeKind.CLIENT_REMOVED
                if before[0] == "client"
                else ChangeKind.AGGREGATOR_REMOVED
            )
            items.append(ChangeItem(node, kind))
        elif after[0] == "client":
            if before is not None and before[0] == "client":
                items.append(ChangeItem(node, ChangeKind.CLIENT_REASSIGNED, after[1]))
            else:
                items.append(ChangeItem(node, ChangeKind.CLIENT_ASSIGNED, after[1]))
        elif after[0] == "la":
            items.append(ChangeItem(node, ChangeKind.AGGREGATOR_ADDED, after[1]))
        else:  # new GA; the root has no parent, see ChangeItem
            items.append(ChangeItem(node, ChangeKind.AGGREGATOR_ADDED, node))
    return ChangeSet(tuple(items))


def apply_change_set(
    config: HflConfiguration, changes: ChangeSet
) -> HflConfiguration:
    """Patch ``config`` with ``changes``; inverse of :func:`diff_configurations`.

    ``apply_change_set(a, diff_configurations(a, b)) == b`` for valid pairs.
    """
    ga = config.ga
    clusters: dict[NodeId, set[NodeId]] = {
        la: set(members) for la, members in config.clusters.items()
    }

    def displace(node: NodeId) -> None:
        clusters.pop(node, None)
        for members in clusters.values():
            members.discard(node)

    ga_items = [
        i
        for i in changes
        if i.kind is ChangeKind.AGGREGATOR_ADDED and i.new_parent == i.node
    ]
    la_items = [
        i
        for i in changes
        if i.kind is ChangeKind.AGGREGATOR_ADDED and i.new_parent != i.node
    ]
    client_items = [
        i
        for i in changes
        if i.kind in (ChangeKind.CLIENT_ASSIGNED, ChangeKind.CLIENT_REASSIGNED)
    ]
    removals = [i for i in changes if i.kind in _REMOVALS]

    for item in ga_items:
        displace(item.node)
        ga = item.node
    for item in la_items:
        if item.node not in clusters:
            # an aggregator that is merely re-parented keeps its cluster
            displace(item.node)
            clusters[item.node] = set()
    for item in client_items:
        displace(item.node)
        if item.new_parent not in clusters:
            raise InvalidConfiguration(
                f"change set assigns {item.node!r} under missing aggregator "
                f"{item.new_parent!r}"
            )
        clusters[item.new_parent].add(item.node)
    for item in removals:
        displace(item.node)
    return HflConfiguration(ga=ga, clusters=clusters, frequency=config.frequency)


def without_node(config: HflConfiguration, node: NodeId) -> HflConfiguration:
    """Configuration with one node pruned, used when a node leaves mid-run.

    A departed client leaves its cluster (the cluster is dropped if that
    empties it); a departed aggregator takes its whole cluster out of the
    pipeline until the next reconfiguration.
    """
    if node == config.ga:
        raise InvalidConfiguration("the global aggregator cannot be pruned")
    clusters = {la: set(members) for la, members in config.clusters.items()}
    clusters.pop(node, None)
    for la in list(clusters):
        clusters[la].discard(node)
        if not clusters[la]:
            del clusters[la]
    return HflConfiguration(ga=config.ga, clusters=clusters, frequency=config.frequency)
