"""Regression fits and the keep-or-revert decision machinery."""

import math
import random
from dataclasses import replace

import numpy as np
import pytest

from hflsim.config import HflConfiguration, diff_configurations
from hflsim.cost import CostLedger, CostParams, change_set_cost, final_round, ledger_charge, per_round_cost
from hflsim.errors import DegenerateDesign, InsufficientPoints
from hflsim.rva import (
    Decision,
    Orchestrator,
    OrchestratorSettings,
    PendingValidation,
    ProgressTrace,
    RegressionFit,
    RegressionKind,
    decision_csv_row,
    decision_report,
    fit_regression,
    predict,
    validate_reconfiguration,
)
from hflsim.simevents import Event, NodeJoined, NodeLeft
from hflsim.topology import NodeSpec, link_cost_between

from conftest import FREQ, iid_profile, paper_config, paper_topology

PARAMS = CostParams(service_artifact_size=30.0, model_size=3.3)
SETTINGS = OrchestratorSettings(validation_window=5, budget=100000.0, la_count=2)


class TestFitRegression:
    def test_recovers_logarithmic_generator(self):
        points = [(r, 0.3 + 0.1 * math.log(r)) for r in range(1, 11)]
        fit = fit_regression(points, RegressionKind.LOGARITHMIC)
        assert fit.a == pytest.approx(0.3, abs=1e-9)
        assert fit.b == pytest.approx(0.1, abs=1e-9)
        assert fit.fitted_points == 10

    def test_recovers_linear_generator(self):
        points = [(r, 0.2 + 0.01 * r) for r in range(1, 11)]
        fit = fit_regression(points, RegressionKind.LINEAR)
        assert fit.a == pytest.approx(0.2, abs=1e-9)
        assert fit.b == pytest.approx(0.01, abs=1e-9)

    def test_two_points_interpolate_exactly(self):
        points = [(2, 0.4), (6, 0.7)]
        fit = fit_regression(points, RegressionKind.LOGARITHMIC)
        for r, value in points:
            assert predict(fit, r) == pytest.approx(value, abs=1e-12)

    def test_constant_data_gives_zero_slope(self):
        points = [(r, 0.42) for r in range(1, 6)]
        fit = fit_regression(points, RegressionKind.LOGARITHMIC)
        assert fit.a == pytest.approx(0.42, abs=1e-12)
        assert fit.b == pytest.approx(0.0, abs=1e-12)

    def test_single_point_rejected(self):
        with pytest.raises(InsufficientPoints):
            fit_regression([(3, 0.5)], RegressionKind.LOGARITHMIC)

    def test_repeated_round_rejected(self):
        with pytest.raises(DegenerateDesign):
            fit_regression([(3, 0.5), (3, 0.6)], RegressionKind.LOGARITHMIC)

    def test_least_squares_beats_perturbations(self):
        rng = random.Random(5)
        points = [
            (r, 0.3 + 0.08 * math.log(r) + rng.gauss(0, 0.02)) for r in range(1, 15)
        ]
        fit = fit_regression(points, RegressionKind.LOGARITHMIC)

        def residual_sum(a, b):
            return sum((v - (a + b * math.log(r))) ** 2 for r, v in points)

        base = residual_sum(fit.a, fit.b)
        for _ in range(1000):
            a = fit.a + rng.gauss(0, 0.05)
            b = fit.b + rng.gauss(0, 0.05)
            assert residual_sum(a, b) >= base - 1e-12


class TestPredict:
    def test_log_point(self):
        fit = RegressionFit(RegressionKind.LOGARITHMIC, a=0.3, b=0.1, fitted_points=5)
        assert predict(fit, math.e) == pytest.approx(0.4, abs=1e-12)

    def test_constant(self):
        fit = RegressionFit(RegressionKind.LOGARITHMIC, a=0.7, b=0.0, fitted_points=5)
        for r in (1, 10, 1000):
            assert predict(fit, r) == 0.7

    def test_clamped(self):
        fit = RegressionFit(RegressionKind.LOGARITHMIC, a=0.9, b=0.5, fitted_points=5)
        assert predict(fit, 100) == 1.0
        fit = RegressionFit(RegressionKind.LOGARITHMIC, a=-0.5, b=0.0, fitted_points=5)
        assert predict(fit, 10) == 0.0


def trace_from_curves(orig_fn, new_fn, reconfig_round, current_round, active_config):
    points = []
    for r in range(1, current_round + 1):
        fn = orig_fn if r <= reconfig_round else new_fn
        points.append((r, fn(r)))
    return ProgressTrace(
        accuracies=tuple(points), current_round=current_round, active_config=active_config
    )


def joined_setup():
    """Paper-shaped topology with c9/c10 joined and assigned, plus configs."""
    from hflsim.topology import add_node

    topo = paper_topology(client_cost=10.0, la_cost=50.0, cross_cost=40.0)
    for name, home in (("c9", "la1"), ("c10", "la2")):
        spec = NodeSpec(name, can_train=True, data_profile=iid_profile())
        away = "la2" if home == "la1" else "la1"
        topo = add_node(topo, spec, {home: 25.0, away: 40.0, "cloud": 100.0})
    orig = paper_config()
    new = HflConfiguration(
        ga="cloud",
        clusters={
            "la1": orig.clusters["la1"] | {"c9"},
            "la2": orig.clusters["la2"] | {"c10"},
        },
        frequency=FREQ,
    )
    return topo, orig, new


class TestValidateReconfiguration:
    def test_equal_curves_and_costs_with_paid_revert_keeps(self):
        # Identical increasing curves and identical per-round costs: paying to
        # revert only shortens the original's horizon, so keep wins.
        from hflsim.topology import Topology

        specs = [
            NodeSpec("ga", can_aggregate=True, has_service_artifacts=True),
            NodeSpec("la1", can_aggregate=True, has_service_artifacts=True),
            NodeSpec("la2", can_aggregate=True, has_service_artifacts=True),
            NodeSpec("c1", can_train=True, has_service_artifacts=True,
                     data_profile=iid_profile(10)),
            NodeSpec("c2", can_train=True, has_service_artifacts=True,
                     data_profile=iid_profile(10)),
        ]
        topo = Topology.build(
            specs, [], default_link_cost=5.0, artifact_server="ga", ga_candidate="ga"
        )
        orig = HflConfiguration(ga="ga", clusters={"la1": {"c1", "c2"}}, frequency=FREQ)
        new = HflConfiguration(ga="ga", clusters={"la2": {"c1", "c2"}}, frequency=FREQ)
        assert per_round_cost(orig, topo, PARAMS) == per_round_cost(new, topo, PARAMS)
        trace = trace_from_curves(
            lambda r: 0.3 + 0.1 * math.log(r),
            lambda r: 0.3 + 0.1 * math.log(r),
            reconfig_round=10,
            current_round=15,
            active_config=new,
        )
        pending = PendingValidation(due_round=15, orig_config=orig, reconfig_round=10)
        ledger = ledger_charge(CostLedger(budget=100000.0), 15, "spent", 20000.0)
        decision = validate_reconfiguration(pending, trace, ledger, SETTINGS, topo, PARAMS)
        assert decision.revert_change_cost > 0.0
        assert decision.final_round_orig < decision.final_round_new
        assert decision.decision is Decision.KEEP

    def test_free_revert_to_cheaper_original_reverts(self):
        # Equal curves but the new configuration costs more per round and the
        # way back is free: the original's longer horizon wins.
        topo, orig, new = joined_setup()
        trace = trace_from_curves(
            lambda r: 0.3 + 0.1 * math.log(r),
            lambda r: 0.3 + 0.1 * math.log(r),
            reconfig_round=10,
            current_round=15,
            active_config=new,
        )
        pending = PendingValidation(
            due_round=15, orig_config=orig, reconfig_round=10, event_label="node_joined"
        )
        ledger = ledger_charge(CostLedger(budget=100000.0), 15, "spent", 20000.0)
        decision = validate_reconfiguration(pending, trace, ledger, SETTINGS, topo, PARAMS)
        assert decision.revert_change_cost == 0.0
        assert decision.final_round_orig > decision.final_round_new
        assert decision.decision is Decision.REVERT

    def test_plateau_after_reconfiguration_reverts(self):
        topo, orig, new = joined_setup()
        trace = trace_from_curves(
            lambda r: 0.3 + 0.1 * math.log(r),
            lambda r: 0.45,
            reconfig_round=10,
            current_round=15,
            active_config=new,
        )
        pending = PendingValidation(due_round=15, orig_config=orig, reconfig_round=10)
        ledger = ledger_charge(CostLedger(budget=100000.0), 15, "spent", 15000.0)
        decision = validate_reconfiguration(pending, trace, ledger, SETTINGS, topo, PARAMS)
        assert decision.decision is Decision.REVERT
        # manual oracle for the final accuracies
        remaining = 100000.0 - 15000.0
        psi_orig = per_round_cost(orig, topo, PARAMS)
        psi_new = per_round_cost(new, topo, PARAMS)
        r_orig = 15 + remaining / psi_orig
        r_new = 15 + remaining / psi_new
        assert decision.final_round_orig == pytest.approx(r_orig)
        assert decision.final_round_new == pytest.approx(r_new)
        assert decision.final_accuracy_orig == pytest.approx(
            0.3 + 0.1 * math.log(r_orig), abs=1e-6
        )
        assert decision.final_accuracy_new == pytest.approx(0.45, abs=1e-9)

    def test_jump_after_reconfiguration_keeps(self):
        topo, orig, new = joined_setup()
        trace = trace_from_curves(
            lambda r: 0.3 + 0.1 * math.log(r),
            lambda r: 0.45 + 0.1 * math.log(r),
            reconfig_round=10,
            current_round=15,
            active_config=new,
        )
        pending = PendingValidation(due_round=15, orig_config=orig, reconfig_round=10)
        decision = validate_reconfiguration(
            pending, trace, CostLedger(budget=100000.0), SETTINGS, topo, PARAMS
        )
        assert decision.decision is Decision.KEEP

    def test_exact_tie_keeps(self):
        # Flat identical curves, identical costs, free revert: a tie, and the
        # tie goes to the deployed configuration.
        topo, orig, new = joined_setup()
        trace = trace_from_curves(
            lambda r: 0.5, lambda r: 0.5, 10, 15, active_config=orig
        )
        pending = PendingValidation(due_round=15, orig_config=orig, reconfig_round=10)
        decision = validate_reconfiguration(
            pending, trace, CostLedger(budget=100000.0), SETTINGS, topo, PARAMS
        )
        assert decision.final_accuracy_orig == decision.final_accuracy_new
        assert decision.decision is Decision.KEEP

    def test_short_segment_keeps_with_warning(self):
        topo, orig, new = joined_setup()
        trace = trace_from_curves(
            lambda r: 0.5, lambda r: 0.6, reconfig_round=1, current_round=3,
            active_config=new,
        )
        pending = PendingValidation(due_round=3, orig_config=orig, reconfig_round=1)
        decision = validate_reconfiguration(
            pending, trace, CostLedger(budget=100000.0), SETTINGS, topo, PARAMS
        )
        assert decision.decision is Decision.KEEP
        assert decision.warning is not None

    def test_decision_depends_only_on_accuracy_difference(self):
        # Shifting every accuracy by a constant shifts both intercepts and
        # leaves the decision unchanged, as long as nothing clamps.
        topo, orig, new = joined_setup()
        for shift in (0.0, 0.05, 0.1):
            trace = trace_from_curves(
                lambda r: 0.25 + shift + 0.08 * math.log(r),
                lambda r: 0.30 + shift + 0.02 * math.log(r),
                10,
                15,
                active_config=new,
            )
            pending = PendingValidation(due_round=15, orig_config=orig, reconfig_round=10)
            decision = validate_reconfiguration(
                pending, trace, CostLedger(budget=100000.0), SETTINGS, topo, PARAMS
            )
            assert decision.decision is Decision.REVERT

    def test_determinism(self):
        topo, orig, new = joined_setup()
        trace = trace_from_curves(
            lambda r: 0.3 + 0.1 * math.log(r), lambda r: 0.45, 10, 15, active_config=new
        )
        pending = PendingValidation(due_round=15, orig_config=orig, reconfig_round=10)
        first = validate_reconfiguration(
            pending, trace, CostLedger(budget=100000.0), SETTINGS, topo, PARAMS
        )
        second = validate_reconfiguration(
            pending, trace, CostLedger(budget=100000.0), SETTINGS, topo, PARAMS
        )
        assert first == second


class TestDecisionReport:
    def _decision(self):
        topo, orig, new = joined_setup()
        trace = trace_from_curves(
            lambda r: 0.3 + 0.1 * math.log(r), lambda r: 0.45, 10, 15, active_config=new
        )
        pending = PendingValidation(due_round=15, orig_config=orig, reconfig_round=10)
        return validate_reconfiguration(
            pending, trace, CostLedger(budget=100000.0), SETTINGS, topo, PARAMS
        )

    def test_report_echoes_decision(self):
        decision = self._decision()
        text = decision_report(decision)
        assert decision.decision.value in text
        assert f"{decision.revert_change_cost:.6f}" in text

    def test_report_inputs_recompute_the_decision(self):
        # Independent checker: rebuild the final rounds and accuracies from
        # the reported inputs alone.
        decision = self._decision()
        r_orig = final_round(
            decision.round,
            decision.remaining_budget,
            decision.revert_change_cost,
            decision.per_round_cost_orig,
        )
        r_new = final_round(
            decision.round, decision.remaining_budget, 0.0, decision.per_round_cost_new
        )
        assert r_orig == pytest.approx(decision.final_round_orig)
        assert r_new == pytest.approx(decision.final_round_new)
        a_orig = predict(decision.fit_orig, r_orig)
        a_new = predict(decision.fit_new, r_new)
        recomputed = Decision.REVERT if a_orig > a_new else Decision.KEEP
        assert recomputed is decision.decision

    def test_csv_row_fields(self):
        row = decision_csv_row(self._decision())
        assert row["decision"] == "revert"
        assert row["round"] == 15


def join_event(name, home, at_round=10):
    away = "la2" if home == "la1" else "la1"
    spec = NodeSpec(name, can_train=True, data_profile=iid_profile())
    return Event(
        at_round=at_round,
        change=NodeJoined(spec, {home: 25.0, away: 40.0, "cloud": 100.0}),
    )


def make_orchestrator(**kwargs):
    topo = paper_topology(client_cost=10.0, la_cost=50.0)
    return Orchestrator(
        topology=topo,
        settings=SETTINGS,
        cost_params=PARAMS,
        frequency=FREQ,
        **kwargs,
    )


class TestOrchestrator:
    def test_initial_config_matches_strategy(self):
        orch = make_orchestrator()
        assert orch.active_config == paper_config()
        # initial participants hold the artifacts
        for node in ("cloud", "la1", "la2", "c1", "c8"):
            assert orch.topology.node(node).has_service_artifacts

    def test_join_schedules_deploy_and_validation(self):
        orch = make_orchestrator()
        outcomes = orch.deliver_events(10, [join_event("c9", "la1"), join_event("c10", "la2")])
        assert [o.status for o in outcomes] == ["scheduled", "scheduled"]
        assert outcomes[0].deploy_round == 10
        assert outcomes[0].validation_round == 15
        ledger, record = orch.apply_due_deployment(10, CostLedger(budget=100000.0))
        assert record is not None
        assert len(record.change_set) == 2
        # each joiner: artifacts 30 MB over cost 100 plus model 3.3 over 25
        assert record.change_cost == pytest.approx(2 * (30 * 100 + 3.3 * 25))
        assert ledger.total_cost == pytest.approx(record.change_cost)
        assert orch.pending_validation.due_round == 15
        assert "c9" in orch.active_config.clients()

    def test_noop_join_schedules_nothing(self):
        # A pure aggregator joining with expensive links does not change the
        # best fit, so nothing deploys and no validation is scheduled.
        orch = make_orchestrator()
        spec = NodeSpec("la3", can_aggregate=True)
        event = Event(at_round=4, change=NodeJoined(spec, {"cloud": 500.0}))
        outcome = orch.on_event(event)
        assert outcome.status == "no_change"
        assert outcome.change_cost == 0.0
        assert len(outcome.change_set) == 0
        assert orch.pending_validation is None
        assert orch.pending_deployment is None

    def test_node_left_postpones_deployment(self):
        orch = make_orchestrator()
        outcome = orch.on_event(Event(at_round=10, change=NodeLeft("c1")))
        assert outcome.status == "postponed"
        assert outcome.deploy_round == 15
        assert outcome.validation_round == 20
        assert "c1" not in orch.active_config.clients()
        assert not orch.topology.has_node("c1")

    def test_events_inside_window_are_queued(self):
        orch = make_orchestrator()
        orch.deliver_events(10, [join_event("c9", "la1")])
        ledger, _ = orch.apply_due_deployment(10, CostLedger(budget=100000.0))
        outcome = orch.on_event(join_event("c10", "la2", at_round=12))
        assert outcome.status == "queued"
        assert len(orch.queued_events) == 1

    def test_revert_restores_original_exactly(self):
        orch = make_orchestrator()
        original = orch.active_config
        orch.deliver_events(10, [join_event("c9", "la1")])
        ledger, _ = orch.apply_due_deployment(10, CostLedger(budget=100000.0))
        trace = trace_from_curves(
            lambda r: 0.3 + 0.1 * math.log(r),
            lambda r: 0.45,
            10,
            15,
            active_config=orch.active_config,
        )
        before = ledger.total_cost
        ledger, decision = orch.run_due_validation(15, trace, ledger)
        assert decision.decision is Decision.REVERT
        assert orch.active_config == original
        assert diff_configurations(orch.active_config, original) == diff_configurations(
            original, original
        )
        assert ledger.total_cost == pytest.approx(before + decision.revert_change_cost)
        # exactly one validation per reconfiguration
        assert orch.pending_validation is None
        ledger2, second = orch.run_due_validation(16, trace, ledger)
        assert second is None

    def test_validation_not_scheduled_when_disabled(self):
        orch = make_orchestrator(rva_enabled=False)
        orch.deliver_events(10, [join_event("c9", "la1")])
        ledger, record = orch.apply_due_deployment(10, CostLedger(budget=100000.0))
        assert record is not None
        assert orch.pending_validation is None
