"""Reconfiguration decision engine.

The orchestrator reacts to infrastructure events by computing a best-fit
configuration, pricing the switch, deploying it at the end of the current
round, and scheduling a validation ``validation_window`` rounds later. The
validation fits one regression to the accuracy observed before the
reconfiguration and one to the accuracy observed after it, predicts both
curves at the round where the remaining budget runs out, and reverts to the
original configuration when its predicted final accuracy is strictly higher.

Node departures are handled with a delay: the pipeline first runs the old
configuration minus the departed node for ``validation_window`` rounds, so
the pre-switch regression reflects behavior without that node, and only then
deploys the recomputed configuration.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .config import (
    AggregationFrequency,
    ChangeKind,
    ChangeSet,
    HflConfiguration,
    calc_best_fit_config,
    diff_configurations,
    without_node,
)
from .cost import (
    CostLedger,
    CostParams,
    change_set_cost,
    final_round,
    ledger_charge,
    per_round_cost,
)
from .errors import DegenerateDesign, InsufficientPoints
from .simevents import Event, LinkCostChanged, NodeJoined, NodeLeft
from .topology import (
    NodeId,
    Topology,
    add_node,
    mark_artifacts_downloaded,
    remove_node,
    set_link_cost,
)

logger = logging.getLogger(__name__)


class RegressionKind(enum.Enum):
    LOGARITHMIC = "logarithmic"
    LINEAR = "linear"


@dataclass(frozen=True)
class OrchestratorSettings:
    """Validation window, regression family, strategy, and budget."""

    validation_window: int
    budget: float
    regression: RegressionKind = RegressionKind.LOGARITHMIC
    strategy: str = "minCommCost"
    la_count: int = 1

    def __post_init__(self):
        if self.validation_window < 1:
            raise ValueError("validation_window must be >= 1")
        if self.regression is RegressionKind.LOGARITHMIC and self.validation_window < 2:
            raise ValueError(
                "validation_window must be >= 2 with the logarithmic regression"
            )
        if self.la_count < 1:
            raise ValueError("la_count must be >= 1")
        if not self.budget > 0:
            raise ValueError("budget must be > 0")


@dataclass(frozen=True)
class RegressionFit:
    kind: RegressionKind
    a: float
    b: float
    fitted_points: int


def _design(rounds: np.ndarray, kind: RegressionKind) -> np.ndarray:
    return np.log(rounds) if kind is RegressionKind.LOGARITHMIC else rounds


def fit_regression(
    points: Sequence[tuple[int, float]], kind: RegressionKind
) -> RegressionFit:
    """Least-squares fit of accuracy = a + b * x(round).

    x is ln(round) for the logarithmic family and the round itself for the
    linear one. Needs at least two points on at least two distinct rounds.
    """
    if len(points) < 2:
        raise InsufficientPoints(f"regression needs >= 2 points, got {len(points)}")
    rounds = np.array([r for r, _ in points], dtype=np.float64)
    values = np.array([a for _, a in points], dtype=np.float64)
    if np.any(rounds < 1):
        raise ValueError("regression rounds must be >= 1")
    if np.unique(rounds).size < 2:
        raise DegenerateDesign("all observations share the same round")
    x = _design(rounds, kind)
    x_mean = x.mean()
    y_mean = values.mean()
    sxx = float(np.sum((x - x_mean) ** 2))
    sxy = float(np.sum((x - x_mean) * (values - y_mean)))
    b = sxy / sxx
    a = y_mean - b * x_mean
    return RegressionFit(kind=kind, a=float(a), b=float(b), fitted_points=len(points))


def predict(fit: RegressionFit, round_index: float) -> float:
    """Fitted accuracy at a (possibly fractional) round, clamped to [0, 1]."""
    x = math.log(round_index) if fit.kind is RegressionKind.LOGARITHMIC else round_index
    return float(min(1.0, max(0.0, fit.a + fit.b * x)))


@dataclass(frozen=True)
class ProgressTrace:
    """Accuracy history plus the configuration currently deployed."""

    accuracies: tuple[tuple[int, float], ...]
    current_round: int
    active_config: HflConfiguration

    def extended(
        self, round_index: int, accuracy: float, active_config: HflConfiguration
    ) -> "ProgressTrace":
        if self.accuracies and round_index <= self.accuracies[-1][0]:
            raise ValueError("trace rounds must be strictly increasing")
        return ProgressTrace(
            accuracies=self.accuracies + ((round_index, float(accuracy)),),
            current_round=round_index,
            active_config=active_config,
        )

    def with_config(self, active_config: HflConfiguration) -> "ProgressTrace":
        return replace(self, active_config=active_config)


@dataclass(frozen=True)
class PendingValidation:
    due_round: int
    orig_config: HflConfiguration
    reconfig_round: int
    event_label: str = "event"


class Decision(enum.Enum):
    KEEP = "keep"
    REVERT = "revert"


@dataclass(frozen=True)
class ValidationDecision:
    """Everything needed to recompute one keep-or-revert decision by hand."""

    round: int
    reconfig_round: int
    event: str
    decision: Decision
    revert_change_cost: float
    per_round_cost_orig: float
    per_round_cost_new: float
    remaining_budget: float
    final_round_orig: float
    final_round_new: float
    final_accuracy_orig: float
    final_accuracy_new: float
    fit_orig: Optional[RegressionFit] = None
    fit_new: Optional[RegressionFit] = None
    forced: bool = False
    warning: Optional[str] = None


def validate_reconfiguration(
    pending: PendingValidation,
    trace: ProgressTrace,
    ledger: CostLedger,
    settings: OrchestratorSettings,
    topology: Topology,
    cost_params: CostParams,
) -> ValidationDecision:
    """Decide whether to keep the deployed configuration or revert.

    Pure function: it computes the decision and its full evidence but does
    not charge the ledger or redeploy; the orchestrator applies the outcome.
    A segment too short to fit yields KEEP with a warning, since there is no
    regression to justify paying for a revert.
    """
    new_config = trace.active_config
    orig_config = pending.orig_config
    revert_changes = diff_configurations(new_config, orig_config)
    revert_cost = change_set_cost(revert_changes, topology, cost_params)
    psi_orig = per_round_cost(orig_config, topology, cost_params)
    psi_new = per_round_cost(new_config, topology, cost_params)
    remaining = max(0.0, ledger.budget - ledger.total_cost)
    current = trace.current_round
    r_final_orig = final_round(current, remaining, revert_cost, psi_orig)
    r_final_new = final_round(current, remaining, 0.0, psi_new)

    points_orig = [(r, a) for r, a in trace.accuracies if r <= pending.reconfig_round]
    points_new = [(r, a) for r, a in trace.accuracies if r > pending.reconfig_round]
    fit_orig = fit_new = None
    warning = None
    try:
        fit_orig = fit_regression(points_orig, settings.regression)
        fit_new = fit_regression(points_new, settings.regression)
    except (InsufficientPoints, DegenerateDesign) as exc:
        warning = f"validation kept the new configuration without a forecast: {exc}"
        logger.warning(warning)
        return ValidationDecision(
            round=current,
            reconfig_round=pending.reconfig_round,
            event=pending.event_label,
            decision=Decision.KEEP,
            revert_change_cost=revert_cost,
            per_round_cost_orig=psi_orig,
            per_round_cost_new=psi_new,
            remaining_budget=remaining,
            final_round_orig=r_final_orig,
            final_round_new=r_final_new,
            final_accuracy_orig=float("nan"),
            final_accuracy_new=float("nan"),
            fit_orig=fit_orig,
            fit_new=fit_new,
            warning=warning,
        )

    a_final_orig = predict(fit_orig, r_final_orig)
    a_final_new = predict(fit_new, r_final_new)
    # Revert only on a strictly better forecast for the original configuration.
    decision = Decision.REVERT if a_final_orig > a_final_new else Decision.KEEP
    return ValidationDecision(
        round=current,
        reconfig_round=pending.reconfig_round,
        event=pending.event_label,
        decision=decision,
        revert_change_cost=revert_cost,
        per_round_cost_orig=psi_orig,
        per_round_cost_new=psi_new,
        remaining_budget=remaining,
        final_round_orig=r_final_orig,
        final_round_new=r_final_new,
        final_accuracy_orig=a_final_orig,
        final_accuracy_new=a_final_new,
        fit_orig=fit_orig,
        fit_new=fit_new,
    )


DECISION_CSV_FIELDS = [
    "round",
    "event",
    "decision",
    "psi_rc",
    "psi_gr_orig",
    "psi_gr_new",
    "r_final_orig",
    "r_final_new",
    "a_final_orig",
    "a_final_new",
]


def decision_csv_row(decision: ValidationDecision) -> dict:
    return {
        "round": decision.round,
        "event": decision.event,
        "decision": decision.decision.value,
        "psi_rc": decision.revert_change_cost,
        "psi_gr_orig": decision.per_round_cost_orig,
        "psi_gr_new": decision.per_round_cost_new,
        "r_final_orig": decision.final_round_orig,
        "r_final_new": decision.final_round_new,
        "a_final_orig": decision.final_accuracy_orig,
        "a_final_new": decision.final_accuracy_new,
    }


def decision_report(decision: ValidationDecision) -> str:
    """Human-readable block with every input of the decision."""

    def fit_line(label: str, fit: Optional[RegressionFit]) -> str:
        if fit is None:
            return f"  fit {label}: unavailable"
        return (
            f"  fit {label}: {fit.kind.value} a={fit.a:.6f} b={fit.b:.6f} "
            f"({fit.fitted_points} points)"
        )

    lines = [
        f"validation at round {decision.round} "
        f"(reconfiguration at round {decision.reconfig_round}, "
        f"event {decision.event})",
        fit_line("orig", decision.fit_orig),
        fit_line("new", decision.fit_new),
        f"  per-round cost: orig={decision.per_round_cost_orig:.6f} "
        f"new={decision.per_round_cost_new:.6f}",
        f"  revert change cost: {decision.revert_change_cost:.6f}",
        f"  remaining budget: {decision.remaining_budget:.6f}",
        f"  final round: orig={decision.final_round_orig:.3f} "
        f"new={decision.final_round_new:.3f}",
        f"  final accuracy: orig={decision.final_accuracy_orig:.6f} "
        f"new={decision.final_accuracy_new:.6f}",
        f"  decision: {decision.decision.value}"
        + (" (forced)" if decision.forced else ""),
    ]
    if decision.warning:
        lines.append(f"  warning: {decision.warning}")
    return "\n".join(lines)


# --- orchestrator ------------------------------------------------------------


@dataclass(frozen=True)
class ReconfigurationOutcome:
    """What the orchestrator did (or planned) in response to one event."""

    round: int
    event_kind: str
    status: str  # "scheduled" | "postponed" | "no_change" | "queued"
    deploy_round: Optional[int] = None
    validation_round: Optional[int] = None
    change_set: Optional[ChangeSet] = None
    change_cost: Optional[float] = None


@dataclass(frozen=True)
class DeploymentRecord:
    round: int
    event_label: str
    change_set: ChangeSet
    change_cost: float
    config: HflConfiguration


@dataclass
class _PlannedDeployment:
    deploy_round: int
    event_label: str
    config: Optional[HflConfiguration] = None  # None: recompute at deploy time


class Orchestrator:
    """Single-actor control loop state: environment, active config, plans.

    Events that arrive while a reconfiguration cycle (pending deployment or
    pending validation) is still open are queued and processed right after
    the cycle resolves, so the before/after trace segmentation of one
    validation never interleaves with another reconfiguration.
    """

    def __init__(
        self,
        topology: Topology,
        settings: OrchestratorSettings,
        cost_params: CostParams,
        frequency: AggregationFrequency,
        rva_enabled: bool = True,
    ):
        self.settings = settings
        self.cost_params = cost_params
        self.frequency = frequency
        self.rva_enabled = rva_enabled
        self.topology = topology
        self.active_config = calc_best_fit_config(
            topology, settings.strategy, frequency, settings.la_count
        )
        # The initial deployment is outside the runtime budget; afterwards
        # every participant holds the service artifacts.
        self.topology = mark_artifacts_downloaded(
            self.topology, self._participants(self.active_config)
        )
        self.pending_deployment: Optional[_PlannedDeployment] = None
        self.pending_validation: Optional[PendingValidation] = None
        self.queued_events: list[Event] = []

    @staticmethod
    def _participants(config: HflConfiguration) -> set[NodeId]:
        return {config.ga, *config.aggregators(), *config.clients()}

    def busy(self) -> bool:
        return self.pending_deployment is not None or self.pending_validation is not None

    # -- event intake --

    def on_event(self, event: Event) -> ReconfigurationOutcome:
        """React to a single event; see ``deliver_events`` for batches."""
        return self.deliver_events(event.at_round, [event])[0]

    def deliver_events(
        self, round_index: int, events: Sequence[Event]
    ) -> list[ReconfigurationOutcome]:
        """Process all events due in one round as a single reconfiguration.

        Same-round events share one best-fit computation and one deployment,
        mirroring how a batch of joins is handled as one change set. If any
        event in the batch is a departure, the whole deployment is postponed
        by the validation window.
        """
        if not events:
            return []
        if self.busy():
            self.queued_events.extend(events)
            return [
                ReconfigurationOutcome(
                    round=round_index, event_kind=_kind_label(e), status="queued"
                )
                for e in events
            ]
        return self._process_batch(round_index, list(events))

    def _process_batch(
        self, round_index: int, events: list[Event]
    ) -> list[ReconfigurationOutcome]:
        label = ",".join(sorted({_kind_label(e) for e in events}))
        any_left = False
        for event in events:
            change = event.change
            if isinstance(change, NodeJoined):
                self.topology = add_node(self.topology, change.spec, change.links)
            elif isinstance(change, NodeLeft):
                any_left = True
                self.topology = remove_node(self.topology, change.node)
                if change.node in self._participants(self.active_config):
                    self.active_config = without_node(self.active_config, change.node)
            elif isinstance(change, LinkCostChanged):
                self.topology = set_link_cost(
                    self.topology, change.a, change.b, change.new_cost
                )
            else:
                raise TypeError(f"unknown event change {change!r}")

        window = self.settings.validation_window
        if any_left and self.active_config.clusters:
            # Run the pruned original for a window first, to observe how it
            # behaves without the departed node before judging a switch.
            deploy_round = round_index + window
            self.pending_deployment = _PlannedDeployment(
                deploy_round=deploy_round, event_label=label, config=None
            )
            return [
                ReconfigurationOutcome(
                    round=round_index,
                    event_kind=_kind_label(e),
                    status="postponed",
                    deploy_round=deploy_round,
                    validation_round=deploy_round + window if self.rva_enabled else None,
                )
                for e in events
            ]

        new_config = calc_best_fit_config(
            self.topology, self.settings.strategy, self.frequency, self.settings.la_count
        )
        changes = diff_configurations(self.active_config, new_config)
        if not changes:
            return [
                ReconfigurationOutcome(
                    round=round_index,
                    event_kind=_kind_label(e),
                    status="no_change",
                    change_set=changes,
                    change_cost=0.0,
                )
                for e in events
            ]
        cost = change_set_cost(changes, self.topology, self.cost_params)
        self.pending_deployment = _PlannedDeployment(
            deploy_round=round_index, event_label=label, config=new_config
        )
        return [
            ReconfigurationOutcome(
                round=round_index,
                event_kind=_kind_label(e),
                status="scheduled",
                deploy_round=round_index,
                validation_round=round_index + window if self.rva_enabled else None,
                change_set=changes,
                change_cost=cost,
            )
            for e in events
        ]

    # -- deployment / validation boundaries --

    def apply_due_deployment(
        self, round_index: int, ledger: CostLedger
    ) -> tuple[CostLedger, Optional[DeploymentRecord]]:
        """At the end of ``round_index``: deploy if a plan is due.

        Charges the change cost, flips the artifact flags of every node that
        received a download, installs the new configuration, and schedules
        the validation ``validation_window`` rounds ahead.
        """
        plan = self.pending_deployment
        if plan is None or plan.deploy_round != round_index:
            return ledger, None
        self.pending_deployment = None
        new_config = plan.config
        if new_config is None:
            new_config = calc_best_fit_config(
                self.topology,
                self.settings.strategy,
                self.frequency,
                self.settings.la_count,
            )
        changes = diff_configurations(self.active_config, new_config)
        if not changes:
            logger.info("round %d: recomputed configuration is unchanged", round_index)
            return ledger, None
        cost = change_set_cost(changes, self.topology, self.cost_params)
        ledger = ledger_charge(ledger, round_index, "reconfiguration", cost)
        self._absorb_downloads(changes)
        if self.rva_enabled:
            self.pending_validation = PendingValidation(
                due_round=round_index + self.settings.validation_window,
                orig_config=self.active_config,
                reconfig_round=round_index,
                event_label=plan.event_label,
            )
        record = DeploymentRecord(
            round=round_index,
            event_label=plan.event_label,
            change_set=changes,
            change_cost=cost,
            config=new_config,
        )
        self.active_config = new_config
        return ledger, record

    def run_due_validation(
        self,
        round_index: int,
        trace: ProgressTrace,
        ledger: CostLedger,
        force_revert: bool = False,
    ) -> tuple[CostLedger, Optional[ValidationDecision]]:
        """Fire the pending validation if due; applies revert side effects."""
        pending = self.pending_validation
        if pending is None or round_index < pending.due_round:
            return ledger, None
        self.pending_validation = None
        decision = validate_reconfiguration(
            pending, trace, ledger, self.settings, self.topology, self.cost_params
        )
        if force_revert and decision.decision is Decision.KEEP:
            decision = replace(decision, decision=Decision.REVERT, forced=True)
        if decision.decision is Decision.REVERT:
            revert_changes = diff_configurations(self.active_config, pending.orig_config)
            ledger = ledger_charge(
                ledger, round_index, "revert", decision.revert_change_cost
            )
            self._absorb_downloads(revert_changes)
            self.active_config = pending.orig_config
        return ledger, decision

    def drain_queued_events(self, round_index: int) -> list[ReconfigurationOutcome]:
        """Process events held back during the last reconfiguration cycle."""
        if self.busy() or not self.queued_events:
            return []
        batch = self.queued_events
        self.queued_events = []
        return self._process_batch(round_index, batch)

    def _absorb_downloads(self, changes: ChangeSet) -> None:
        touched = [
            item.node
            for item in changes
            if item.kind
            not in (ChangeKind.CLIENT_REMOVED, ChangeKind.AGGREGATOR_REMOVED)
        ]
        self.topology = mark_artifacts_downloaded(self.topology, touched)


def _kind_label(event: Event) -> str:
    change = event.change
    if isinstance(change, NodeJoined):
        return "node_joined"
    if isinstance(change, NodeLeft):
        return "node_left"
    if isinstance(change, LinkCostChanged):
        return "link_cost_changed"
    return type(change).__name__
