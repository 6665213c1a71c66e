"""Simulation kernel: stop conditions, event delivery, determinism."""

import math

import pytest

from hflsim.cost import per_round_cost
from hflsim.errors import ScenarioMismatch
from hflsim.rva import Decision, ProgressTrace
from hflsim.scenario import bundled_scenario_path, load_scenario
from hflsim.simkit import (
    StopReason,
    compare_runs,
    convergence_check,
    run_simulation,
)

from conftest import DATA_DIR, paper_config


def load_bundled(name, seed=None):
    return load_scenario(bundled_scenario_path(name), seed_override=seed)


def flat_trace(values, config):
    points = tuple((i + 1, v) for i, v in enumerate(values))
    return ProgressTrace(
        accuracies=points, current_round=len(values), active_config=config
    )


class TestConvergenceCheck:
    def test_threshold_reached(self, config):
        trace = flat_trace([0.2, 0.4, 0.6], config)
        assert convergence_check(trace, threshold=0.5, patience=10)

    def test_increasing_trace_not_converged(self, config):
        trace = flat_trace([0.1 * i for i in range(1, 9)], config)
        assert not convergence_check(trace, threshold=None, patience=5)

    def test_flat_trace_converges_after_patience(self, config):
        trace = flat_trace([0.5] * 6, config)
        assert convergence_check(trace, threshold=None, patience=5)
        assert not convergence_check(trace, threshold=None, patience=6)

    def test_patience_positive(self, config):
        with pytest.raises(ValueError):
            convergence_check(flat_trace([0.5], config), None, 0)


class TestStopConditions:
    def test_budget_exhaustion_matches_closed_form(self):
        # No events, constant per-round cost c: the run must stop after
        # exactly floor(B / c) completed rounds.
        scenario = load_scenario(DATA_DIR / "mini.yaml")
        run = run_simulation(scenario)
        cost = per_round_cost(
            run.configs["cfg-0"], scenario.topology, scenario.cost_params
        )
        expected = min(scenario.horizon, math.floor(scenario.settings.budget / cost))
        assert run.final_round == expected

    def test_budget_exhausted_flagged(self):
        scenario = load_scenario(DATA_DIR / "mini.yaml")
        import dataclasses

        tight = dataclasses.replace(
            scenario,
            settings=dataclasses.replace(scenario.settings, budget=10.0),
        )
        run = run_simulation(tight)
        assert run.stop_reason is StopReason.BUDGET_EXHAUSTED
        cost = per_round_cost(run.trace.active_config, tight.topology, tight.cost_params)
        assert run.total_cost + cost > tight.settings.budget
        assert run.total_cost <= tight.settings.budget

    def test_horizon_of_one(self):
        scenario = load_scenario(DATA_DIR / "mini.yaml")
        import dataclasses

        short = dataclasses.replace(scenario, horizon=1)
        run = run_simulation(short)
        assert run.final_round == 1
        assert run.stop_reason is StopReason.HORIZON_REACHED

    def test_convergence_stop(self):
        import dataclasses

        from hflsim.scenario import ConvergenceSettings

        scenario = load_scenario(DATA_DIR / "mini.yaml")
        converging = dataclasses.replace(
            scenario, convergence=ConvergenceSettings(threshold=None, patience=2)
        )
        run = run_simulation(converging)
        assert run.stop_reason is StopReason.CONVERGED
        assert run.final_round == 3  # flat curve: improvement only at round 1


class TestEventDelivery:
    def test_events_delivered_exactly_once(self):
        scenario = load_bundled("scenario_1a")
        run = run_simulation(scenario)
        joined = [o for o in run.outcomes if o.event_kind == "node_joined"]
        assert len(joined) == 2
        assert all(o.round == 10 for o in joined)

    def test_join_changes_next_round_config(self):
        scenario = load_bundled("scenario_1a")
        run = run_simulation(scenario)
        assert "c9" not in run.config_at(10).clients()
        assert "c9" in run.config_at(11).clients()

    def test_budget_safety_round_by_round(self):
        # Oracle replay of the ledger: no prefix that ends before the final
        # round may exceed the budget.
        scenario = load_bundled("scenario_1a")
        for run in (run_simulation(scenario), run_simulation(scenario, rva_enabled=False)):
            running = 0.0
            for entry in run.ledger.entries:
                running += entry.amount
                assert running <= run.ledger.budget + 1e-9


class TestArms:
    def test_disabled_never_decides(self):
        run = run_simulation(load_bundled("scenario_1a"), rva_enabled=False)
        assert run.decisions == ()

    def test_force_revert_overrides_keep(self):
        run = run_simulation(load_bundled("scenario_1b"), force_revert=True)
        assert [d.decision for d in run.decisions] == [Decision.REVERT]
        assert run.decisions[0].forced

    def test_force_revert_matches_genuine_revert_accounting(self):
        # In a scenario where validation genuinely reverts, forcing changes
        # nothing at all.
        scenario = load_bundled("scenario_1a")
        genuine = run_simulation(scenario)
        forced = run_simulation(scenario, force_revert=True)
        assert genuine.ledger == forced.ledger
        assert genuine.trace.accuracies == forced.trace.accuracies


class TestReplayDeterminism:
    @pytest.mark.parametrize("name", ["scenario_1a", "scenario_2b", "scenario_2b_linear"])
    def test_identical_reruns(self, name):
        scenario_a = load_bundled(name)
        scenario_b = load_bundled(name)
        run_a = run_simulation(scenario_a)
        run_b = run_simulation(scenario_b)
        assert run_a.trace.accuracies == run_b.trace.accuracies
        assert run_a.ledger == run_b.ledger
        assert run_a.decisions == run_b.decisions
        assert run_a.round_configs == run_b.round_configs


class TestCompareRuns:
    def test_identical_runs_identical_rows(self):
        scenario = load_bundled("scenario_1a")
        rows = compare_runs([run_simulation(scenario), run_simulation(scenario)])
        assert rows[0] == rows[1]

    def test_rva_beats_disabled_on_degrade(self):
        scenario = load_bundled("scenario_1a")
        rows = compare_runs(
            [run_simulation(scenario), run_simulation(scenario, rva_enabled=False)]
        )
        assert rows[0]["final_accuracy"] >= rows[1]["final_accuracy"]

    def test_rva_beats_forced_on_improve(self):
        scenario = load_bundled("scenario_1b")
        rows = compare_runs(
            [run_simulation(scenario), run_simulation(scenario, force_revert=True)]
        )
        assert rows[0]["final_accuracy"] >= rows[1]["final_accuracy"]

    def test_mismatched_scenarios_rejected(self):
        run_a = run_simulation(load_bundled("scenario_1a"))
        run_b = run_simulation(load_bundled("scenario_1b"))
        with pytest.raises(ScenarioMismatch):
            compare_runs([run_a, run_b])

    def test_needs_two_runs(self):
        with pytest.raises(ValueError):
            compare_runs([run_simulation(load_bundled("scenario_1a"))])
