"""Communication cost model and budget ledger.

All sizes are in MB and all link costs in units per MB, so every product in
this module is in plain cost units. Reconfiguration changes are priced per
affected node (artifact download plus model download from the new parent);
each global round is priced from the client-to-LA and LA-to-GA legs. The
ledger is an append-only value whose total uses compensated summation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from .config import ChangeItem, ChangeKind, ChangeSet, HflConfiguration, validate_configuration
from .errors import (
    InvalidConfiguration,
    MonotonicityViolation,
    NegativeCharge,
    NonPositivePerRoundCost,
)
from .topology import Topology, link_cost_between


@dataclass(frozen=True)
class CostParams:
    """Transfer sizes in MB. The model update defaults to the full model."""

    service_artifact_size: float
    model_size: float
    model_update_size: Optional[float] = None

    def __post_init__(self):
        if not self.service_artifact_size > 0:
            raise ValueError("service_artifact_size must be > 0")
        if not self.model_size > 0:
            raise ValueError("model_size must be > 0")
        update = self.model_update_size
        if update is None:
            update = float(self.model_size)
        if not update > 0:
            raise ValueError("model_update_size must be > 0")
        object.__setattr__(self, "service_artifact_size", float(self.service_artifact_size))
        object.__setattr__(self, "model_size", float(self.model_size))
        object.__setattr__(self, "model_update_size", float(update))


@dataclass(frozen=True)
class LedgerEntry:
    round: int
    label: str
    amount: float


@dataclass(frozen=True)
class CostLedger:
    """Budget plus the append-only list of charges against it."""

    budget: float
    entries: tuple[LedgerEntry, ...] = ()

    @property
    def total_cost(self) -> float:
        return math.fsum(entry.amount for entry in self.entries)

    @property
    def remaining(self) -> float:
        return self.budget - self.total_cost

    @property
    def last_round(self) -> int:
        return self.entries[-1].round if self.entries else 0


def ledger_charge(
    ledger: CostLedger, round_index: int, label: str, amount: float
) -> CostLedger:
    """Append one charge; amounts are non-negative, rounds non-decreasing."""
    if amount < 0:
        raise NegativeCharge(f"charge of {amount} for {label!r} is negative")
    if round_index < ledger.last_round:
        raise MonotonicityViolation(
            f"charge at round {round_index} after round {ledger.last_round}"
        )
    entry = LedgerEntry(round=round_index, label=label, amount=float(amount))
    return replace(ledger, entries=ledger.entries + (entry,))


@dataclass(frozen=True)
class ReconfigurationCost:
    """One-time change cost paired with the signed per-round delta."""

    change_cost: float
    post_cost_delta: float

    def __post_init__(self):
        if self.change_cost < 0:
            raise ValueError("change_cost must be >= 0")


def change_item_cost(
    item: ChangeItem, topology: Topology, params: CostParams
) -> float:
    """Cost of one reconfiguration change.

    The affected node downloads the service artifacts from the artifact
    server (skipped when it already has them) and the current model from its
    new parent aggregator. Removals are free: a node that leaves the pipeline
    transfers nothing.
    """
    if item.kind in (ChangeKind.CLIENT_REMOVED, ChangeKind.AGGREGATOR_REMOVED):
        return 0.0
    spec = topology.node(item.node)
    artifact_leg = 0.0
    if not spec.has_service_artifacts:
        artifact_leg = params.service_artifact_size * link_cost_between(
            topology, item.node, topology.artifact_server
        )
    model_leg = params.model_size * link_cost_between(
        topology, item.node, item.new_parent
    )
    return artifact_leg + model_leg


def change_set_cost(
    changes: ChangeSet, topology: Topology, params: CostParams
) -> float:
    return math.fsum(change_item_cost(item, topology, params) for item in changes)


def per_round_cost_parts(
    config: HflConfiguration, topology: Topology, params: CostParams
) -> tuple[float, float]:
    """(global aggregation cost, local aggregation cost) for one global round.

    Local aggregation runs ``local_rounds`` times per global round, so the
    client-to-LA leg scales with the aggregation frequency while the LA-to-GA
    leg is paid once.
    """
    violations = validate_configuration(config, topology)
    if violations:
        raise InvalidConfiguration("; ".join(violations))
    size = params.model_update_size
    ga_cost = math.fsum(
        link_cost_between(topology, la, config.ga) * size
        for la in sorted(config.clusters)
    )
    la_cost = config.frequency.local_rounds * math.fsum(
        link_cost_between(topology, client, la) * size
        for la in sorted(config.clusters)
        for client in sorted(config.clusters[la])
    )
    return ga_cost, la_cost


def per_round_cost(
    config: HflConfiguration, topology: Topology, params: CostParams
) -> float:
    ga_cost, la_cost = per_round_cost_parts(config, topology, params)
    return ga_cost + la_cost


def post_reconfiguration_cost(
    orig: HflConfiguration,
    new: HflConfiguration,
    topology: Topology,
    params: CostParams,
) -> float:
    """Signed per-round cost delta of the new configuration over the old."""
    return per_round_cost(new, topology, params) - per_round_cost(
        orig, topology, params
    )


def final_round(
    current_round: int,
    remaining_budget: float,
    revert_change_cost: float,
    per_round: float,
) -> float:
    """Round at which the remaining budget runs out, as a real number.

    Pass ``revert_change_cost=0`` when the current configuration keeps
    running; pass the revert cost when the remaining budget must first fund a
    switch back. Callers floor the result when they need a whole round index.
    The value is clamped to ``current_round`` when the budget cannot even
    fund the revert.
    """
    if not per_round > 0:
        raise NonPositivePerRoundCost(f"per-round cost {per_round} must be > 0")
    numerator = remaining_budget - revert_change_cost
    if numerator < 0:
        return float(current_round)
    return current_round + numerator / per_round
