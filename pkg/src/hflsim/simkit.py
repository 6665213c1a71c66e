"""Discrete-event simulation kernel.

Time advances in global rounds. Each round the kernel:

1. refuses to start if the round's cost would push the ledger past the
   budget (stop reason ``budget_exhausted``),
2. delivers the round's scheduled events to the orchestrator,
3. runs one global training round,
4. charges the round's communication cost,
5. applies a deployment due at the end of the round, then fires a due
   validation (skipped entirely when RVA is disabled, forced to revert for
   the baseline arm), and finally
6. checks convergence if the scenario configured it.

The kernel is single-threaded and fully deterministic: rerunning the same
scenario and seed reproduces the ledger, trace, and decisions exactly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

from .config import HflConfiguration
from .cost import CostLedger, ledger_charge, per_round_cost
from .errors import ScenarioMismatch
from .learning import run_global_round
from .rva import (
    DeploymentRecord,
    Orchestrator,
    ProgressTrace,
    ReconfigurationOutcome,
    ValidationDecision,
)
from .simevents import Event, LinkCostChanged, NodeJoined, NodeLeft  # noqa: F401

RVA_ON = "on"
RVA_OFF = "off"
RVA_FORCE_REVERT = "force-revert"


class StopReason(enum.Enum):
    BUDGET_EXHAUSTED = "budget_exhausted"
    HORIZON_REACHED = "horizon_reached"
    CONVERGED = "converged"


def convergence_check(
    trace: ProgressTrace, threshold: Optional[float], patience: int
) -> bool:
    """True once accuracy reached the threshold or stopped improving.

    "Stopped improving" means the running best accuracy has not increased by
    more than 1e-4 for ``patience`` consecutive rounds.
    """
    if patience < 1:
        raise ValueError("patience must be >= 1")
    if not trace.accuracies:
        return False
    if threshold is not None and trace.accuracies[-1][1] >= threshold:
        return True
    best = float("-inf")
    last_improvement = 0
    for round_index, accuracy in trace.accuracies:
        if accuracy > best + 1e-4:
            best = accuracy
            last_improvement = round_index
    return trace.current_round - last_improvement >= patience


@dataclass(frozen=True)
class SimulationRun:
    """Everything one simulation produced."""

    scenario_name: str
    seed: int
    rva_mode: str
    ledger: CostLedger
    trace: ProgressTrace
    decisions: tuple[ValidationDecision, ...]
    stop_reason: StopReason
    outcomes: tuple[ReconfigurationOutcome, ...]
    deployments: tuple[DeploymentRecord, ...]
    round_configs: tuple[tuple[int, str], ...]
    configs: dict[str, HflConfiguration]

    @property
    def final_round(self) -> int:
        return self.trace.current_round

    @property
    def final_accuracy(self) -> float:
        return self.trace.accuracies[-1][1] if self.trace.accuracies else float("nan")

    @property
    def total_cost(self) -> float:
        return self.ledger.total_cost

    def config_at(self, round_index: int) -> HflConfiguration:
        for r, config_id in self.round_configs:
            if r == round_index:
                return self.configs[config_id]
        raise KeyError(f"no round {round_index} in this run")


class _ConfigRegistry:
    """Stable short ids for every distinct configuration a run deploys."""

    def __init__(self):
        self._ids: dict[tuple, str] = {}
        self.configs: dict[str, HflConfiguration] = {}

    def id_for(self, config: HflConfiguration) -> str:
        key = config.key()
        if key not in self._ids:
            config_id = f"cfg-{len(self._ids)}"
            self._ids[key] = config_id
            self.configs[config_id] = config
        return self._ids[key]


def run_simulation(
    scenario,
    rva_enabled: bool = True,
    force_revert: bool = False,
) -> SimulationRun:
    """Run one scenario to budget exhaustion, horizon, or convergence.

    ``rva_enabled=False`` deploys reconfigurations but never validates them;
    ``force_revert=True`` runs validations with the decision overridden to
    revert, reproducing a baseline that always restores the original
    configuration (with identical cost accounting to a genuine revert).
    """
    mode = RVA_FORCE_REVERT if force_revert else (RVA_ON if rva_enabled else RVA_OFF)
    rva_active = rva_enabled or force_revert
    learner = scenario.build_learner()
    orch = Orchestrator(
        topology=scenario.topology,
        settings=scenario.settings,
        cost_params=scenario.cost_params,
        frequency=scenario.frequency,
        rva_enabled=rva_active,
    )
    registry = _ConfigRegistry()
    ledger = CostLedger(budget=scenario.settings.budget)
    trace = ProgressTrace(
        accuracies=(), current_round=0, active_config=orch.active_config
    )
    model = learner.initial_model()
    events_by_round: dict[int, list[Event]] = {}
    for event in scenario.events:
        events_by_round.setdefault(event.at_round, []).append(event)

    decisions: list[ValidationDecision] = []
    outcomes: list[ReconfigurationOutcome] = []
    deployments: list[DeploymentRecord] = []
    round_configs: list[tuple[int, str]] = []
    stop_reason = StopReason.HORIZON_REACHED

    for round_index in range(1, scenario.horizon + 1):
        round_cost = per_round_cost(orch.active_config, orch.topology, scenario.cost_params)
        if ledger.total_cost + round_cost > ledger.budget:
            stop_reason = StopReason.BUDGET_EXHAUSTED
            break

        outcomes.extend(
            orch.deliver_events(round_index, events_by_round.get(round_index, []))
        )
        # A departure in this round's batch changes what actually runs.
        round_cost = per_round_cost(orch.active_config, orch.topology, scenario.cost_params)

        model, accuracy = run_global_round(
            model,
            orch.active_config,
            orch.topology,
            scenario.training,
            learner,
            round_index,
        )
        round_configs.append((round_index, registry.id_for(orch.active_config)))
        trace = trace.extended(round_index, accuracy, orch.active_config)
        ledger = ledger_charge(ledger, round_index, "global_round", round_cost)

        ledger, deployment = orch.apply_due_deployment(round_index, ledger)
        if deployment is not None:
            deployments.append(deployment)
        if rva_active:
            ledger, decision = orch.run_due_validation(
                round_index, trace.with_config(orch.active_config), ledger, force_revert
            )
            if decision is not None:
                decisions.append(decision)
                outcomes.extend(orch.drain_queued_events(round_index))
                ledger, deployment = orch.apply_due_deployment(round_index, ledger)
                if deployment is not None:
                    deployments.append(deployment)
        trace = trace.with_config(orch.active_config)

        if scenario.convergence is not None and convergence_check(
            trace, scenario.convergence.threshold, scenario.convergence.patience
        ):
            stop_reason = StopReason.CONVERGED
            break

    return SimulationRun(
        scenario_name=scenario.name,
        seed=scenario.seed,
        rva_mode=mode,
        ledger=ledger,
        trace=trace,
        decisions=tuple(decisions),
        stop_reason=stop_reason,
        outcomes=tuple(outcomes),
        deployments=tuple(deployments),
        round_configs=tuple(round_configs),
        configs=registry.configs,
    )


COMPARISON_FIELDS = [
    "label",
    "stop_reason",
    "final_round",
    "final_accuracy",
    "total_cost",
    "keeps",
    "reverts",
]


def comparison_row(run) -> dict:
    """One comparison-table row; works for live runs and loaded records."""
    decisions = list(run.decisions)
    keeps = sum(1 for d in decisions if _decision_value(d) == "keep")
    reverts = sum(1 for d in decisions if _decision_value(d) == "revert")
    return {
        "label": getattr(run, "label", run.rva_mode),
        "stop_reason": _stop_value(run.stop_reason),
        "final_round": run.final_round,
        "final_accuracy": run.final_accuracy,
        "total_cost": run.total_cost,
        "keeps": keeps,
        "reverts": reverts,
    }


def _decision_value(decision) -> str:
    if isinstance(decision, dict):
        return str(decision.get("decision"))
    value = getattr(decision, "decision", decision)
    return value.value if hasattr(value, "value") else str(value)


def _stop_value(stop_reason) -> str:
    return stop_reason.value if hasattr(stop_reason, "value") else str(stop_reason)


def compare_runs(runs: Sequence) -> list[dict]:
    """Comparison table across runs of the same scenario and seed."""
    if len(runs) < 2:
        raise ValueError("compare_runs needs at least two runs")
    first = runs[0]
    for run in runs[1:]:
        if (run.scenario_name, run.seed) != (first.scenario_name, first.seed):
            raise ScenarioMismatch(
                f"cannot compare {run.scenario_name!r} (seed {run.seed}) with "
                f"{first.scenario_name!r} (seed {first.seed})"
            )
    return [comparison_row(run) for run in runs]
