"""Scenario files: loading, validation, resolution, and echoing.

A scenario is a YAML document with explicit sections (topology, events,
settings, cost_params, training, learner, optional convergence). Loading
resolves every default, so the echoed form of a scenario reloads to an
identical value; validation collects all violations instead of stopping at
the first. See the README for the full field reference.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Optional, Union

import yaml

from .config import AggregationFrequency, strategy_names
from .cost import CostParams
from .errors import HflSimError, InvalidTopology, ParseError, ValidationError
from .learning import (
    LinearClassifierLearner,
    SyntheticCurveLearner,
    SyntheticCurveParams,
    TrainingParams,
)
from .rva import OrchestratorSettings, RegressionKind
from .simevents import Event, LinkCostChanged, NodeJoined, NodeLeft
from .topology import DataProfile, NodeSpec, Topology


@dataclass(frozen=True)
class ConvergenceSettings:
    threshold: Optional[float]
    patience: int

    def __post_init__(self):
        if self.patience < 1:
            raise ValueError("patience must be >= 1")


@dataclass(frozen=True)
class SyntheticCurveSpec:
    params: SyntheticCurveParams
    shifted: Optional[SyntheticCurveParams]
    shift_triggers: tuple[str, ...]

    kind = "synthetic_curve"

    def build(self) -> SyntheticCurveLearner:
        return SyntheticCurveLearner(
            params=self.params,
            shifted=self.shifted,
            shift_triggers=self.shift_triggers,
        )


@dataclass(frozen=True)
class LinearClassifierSpec:
    num_features: int
    num_classes: int
    class_separation: float
    within_class_std: float
    eval_samples_per_class: int
    seed: int

    kind = "linear_classifier"

    def build(self) -> LinearClassifierLearner:
        return LinearClassifierLearner(
            num_features=self.num_features,
            num_classes=self.num_classes,
            class_separation=self.class_separation,
            within_class_std=self.within_class_std,
            eval_samples_per_class=self.eval_samples_per_class,
            seed=self.seed,
        )


LearnerSpec = Union[SyntheticCurveSpec, LinearClassifierSpec]


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    horizon: int
    topology: Topology
    events: tuple[Event, ...]
    settings: OrchestratorSettings
    cost_params: CostParams
    training: TrainingParams
    learner: LearnerSpec
    convergence: Optional[ConvergenceSettings] = None

    @property
    def frequency(self) -> AggregationFrequency:
        return AggregationFrequency(
            local_epochs=self.training.local_epochs,
            local_rounds=self.training.local_rounds,
        )

    def build_learner(self):
        return self.learner.build()

    def with_seed(self, seed: int) -> "Scenario":
        return scenario_from_dict(scenario_to_dict(self), seed_override=seed)


# --- parsing helpers --------------------------------------------------------


class _Check:
    """Collects violations so the whole file is validated in one pass."""

    def __init__(self):
        self.violations: list[str] = []

    def fail(self, message: str) -> None:
        self.violations.append(message)

    def section(self, data: dict, key: str, path: str = "") -> Optional[dict]:
        label = f"{path}{key}"
        if key not in data:
            self.fail(f"{label}: required section missing")
            return None
        value = data[key]
        if not isinstance(value, dict):
            self.fail(f"{label}: expected a mapping")
            return None
        return value

    def value(self, data: dict, key: str, kinds, path: str, required=True, default=None):
        label = f"{path}{key}"
        if key not in data or data[key] is None:
            if required:
                self.fail(f"{label}: required field missing")
            return default
        value = data[key]
        if kinds is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if kinds is int and isinstance(value, bool):
            self.fail(f"{label}: expected an integer")
            return default
        if not isinstance(value, kinds):
            expected = kinds.__name__ if isinstance(kinds, type) else "value"
            self.fail(f"{label}: expected {expected}, got {type(value).__name__}")
            return default
        return value

    def unknown_keys(self, data: dict, allowed, path: str) -> None:
        for key in data:
            if key not in allowed:
                self.fail(f"{path}{key}: unknown field")


_CURVE_FIELDS = (
    "base_offset",
    "log_gain",
    "data_volume_gain",
    "coverage_gain",
    "noise_std",
    "seed",
    "num_classes",
)


def _parse_node(raw, check: _Check, path: str) -> Optional[NodeSpec]:
    if not isinstance(raw, dict):
        check.fail(f"{path}: expected a mapping")
        return None
    check.unknown_keys(
        raw,
        ("id", "can_train", "can_aggregate", "has_service_artifacts", "data_profile"),
        f"{path}.",
    )
    node_id = check.value(raw, "id", str, f"{path}.")
    can_train = bool(raw.get("can_train", False))
    profile_raw = raw.get("data_profile")
    profile = None
    if profile_raw is not None:
        if not isinstance(profile_raw, dict):
            check.fail(f"{path}.data_profile: expected a mapping of class to count")
        else:
            try:
                profile = DataProfile(profile_raw)
            except (InvalidTopology, TypeError, ValueError) as exc:
                check.fail(f"{path}.data_profile: {exc}")
    if node_id is None:
        return None
    try:
        return NodeSpec(
            id=node_id,
            can_train=can_train,
            can_aggregate=bool(raw.get("can_aggregate", False)),
            has_service_artifacts=bool(raw.get("has_service_artifacts", False)),
            data_profile=profile,
        )
    except InvalidTopology as exc:
        check.fail(f"{path}: {exc}")
        return None


def _parse_curve_params(
    raw: dict, check: _Check, path: str, default_seed: int, base=None
) -> Optional[SyntheticCurveParams]:
    check.unknown_keys(raw, _CURVE_FIELDS, f"{path}.")
    values = {}
    if base is not None:
        values = {name: getattr(base, name) for name in _CURVE_FIELDS}
    required_default = base is None
    base_offset = check.value(
        raw, "base_offset", float, f"{path}.", required=required_default
    )
    log_gain = check.value(raw, "log_gain", float, f"{path}.", required=required_default)
    if base_offset is not None:
        values["base_offset"] = base_offset
    if log_gain is not None:
        values["log_gain"] = log_gain
    for name, default in (
        ("data_volume_gain", 0.0),
        ("coverage_gain", 0.0),
        ("noise_std", 0.0),
        ("num_classes", 10),
    ):
        kind = int if name == "num_classes" else float
        got = check.value(raw, name, kind, f"{path}.", required=False)
        if got is not None:
            values[name] = got
        elif base is None:
            values[name] = default
    seed = check.value(raw, "seed", int, f"{path}.", required=False)
    if seed is not None:
        values["seed"] = seed
    elif base is None:
        values["seed"] = default_seed
    if "base_offset" not in values or "log_gain" not in values:
        return None
    try:
        return SyntheticCurveParams(**values)
    except ValueError as exc:
        check.fail(f"{path}: {exc}")
        return None


def _parse_events(
    raw_events, check: _Check, horizon: int, present: set, topology_ok: bool
) -> tuple[tuple[Event, ...], list[str]]:
    events: list[Event] = []
    joined: list[str] = []
    if raw_events is None:
        return (), joined
    if not isinstance(raw_events, list):
        check.fail("events: expected a list")
        return (), joined
    ordered = sorted(
        enumerate(raw_events),
        key=lambda pair: (
            pair[1].get("at_round", 0) if isinstance(pair[1], dict) else 0,
            pair[0],
        ),
    )
    for index, raw in ordered:
        path = f"events[{index}]"
        if not isinstance(raw, dict):
            check.fail(f"{path}: expected a mapping")
            continue
        at_round = check.value(raw, "at_round", int, f"{path}.")
        kind = check.value(raw, "kind", str, f"{path}.")
        if at_round is None or kind is None:
            continue
        if not 1 <= at_round <= horizon:
            check.fail(f"{path}.at_round: {at_round} outside horizon 1..{horizon}")
        if kind == "node_joined":
            check.unknown_keys(raw, ("at_round", "kind", "node", "links"), f"{path}.")
            node_raw = raw.get("node")
            if node_raw is None:
                check.fail(f"{path}.node: required field missing")
                continue
            spec = _parse_node(node_raw, check, f"{path}.node")
            links_raw = raw.get("links", {})
            if not isinstance(links_raw, dict):
                check.fail(f"{path}.links: expected a mapping of node to cost")
                links_raw = {}
            if spec is None:
                continue
            if topology_ok:
                if spec.id in present:
                    check.fail(f"{path}.node.id: {spec.id!r} already in the topology")
                for target in links_raw:
                    if target not in present:
                        check.fail(
                            f"{path}.links: target {target!r} not in the topology"
                        )
                present.add(spec.id)
            joined.append(spec.id)
            try:
                links = {str(k): float(v) for k, v in links_raw.items()}
            except (TypeError, ValueError):
                check.fail(f"{path}.links: costs must be numbers")
                continue
            events.append(Event(at_round=at_round, change=NodeJoined(spec, links)))
        elif kind == "node_left":
            check.unknown_keys(raw, ("at_round", "kind", "node"), f"{path}.")
            node_id = check.value(raw, "node", str, f"{path}.")
            if node_id is None:
                continue
            if topology_ok:
                if node_id not in present:
                    check.fail(f"{path}.node: {node_id!r} not in the topology")
                else:
                    present.discard(node_id)
            events.append(Event(at_round=at_round, change=NodeLeft(node_id)))
        elif kind == "link_cost_changed":
            check.unknown_keys(raw, ("at_round", "kind", "a", "b", "new_cost"), f"{path}.")
            a = check.value(raw, "a", str, f"{path}.")
            b = check.value(raw, "b", str, f"{path}.")
            new_cost = check.value(raw, "new_cost", float, f"{path}.")
            if a is None or b is None or new_cost is None:
                continue
            if topology_ok:
                for end in (a, b):
                    if end not in present:
                        check.fail(f"{path}: node {end!r} not in the topology")
            events.append(
                Event(at_round=at_round, change=LinkCostChanged(a, b, new_cost))
            )
        else:
            check.fail(
                f"{path}.kind: unknown kind {kind!r} "
                "(node_joined, node_left, link_cost_changed)"
            )
    events.sort(key=lambda e: e.at_round)
    return tuple(events), joined


def scenario_from_dict(data, *, seed_override: Optional[int] = None) -> Scenario:
    """Validate a raw mapping and resolve it into a Scenario."""
    if not isinstance(data, dict):
        raise ParseError("scenario must be a mapping at the top level")
    check = _Check()
    check.unknown_keys(
        data,
        (
            "name",
            "seed",
            "horizon",
            "topology",
            "events",
            "settings",
            "cost_params",
            "training",
            "learner",
            "convergence",
        ),
        "",
    )
    name = check.value(data, "name", str, "")
    seed = check.value(data, "seed", int, "")
    horizon = check.value(data, "horizon", int, "")
    if seed_override is not None:
        seed = seed_override
    if horizon is not None and horizon < 1:
        check.fail("horizon: must be >= 1")

    # topology
    topology = None
    present: set[str] = set()
    topo_raw = check.section(data, "topology")
    if topo_raw is not None:
        check.unknown_keys(
            topo_raw,
            ("nodes", "links", "default_link_cost", "artifact_server", "ga_candidate"),
            "topology.",
        )
        default_cost = check.value(topo_raw, "default_link_cost", float, "topology.")
        artifact_server = check.value(topo_raw, "artifact_server", str, "topology.")
        ga_candidate = check.value(topo_raw, "ga_candidate", str, "topology.")
        nodes_raw = topo_raw.get("nodes")
        specs = []
        if not isinstance(nodes_raw, list) or not nodes_raw:
            check.fail("topology.nodes: expected a non-empty list")
        else:
            for i, raw in enumerate(nodes_raw):
                spec = _parse_node(raw, check, f"topology.nodes[{i}]")
                if spec is not None:
                    specs.append(spec)
        links = []
        links_raw = topo_raw.get("links", [])
        if not isinstance(links_raw, list):
            check.fail("topology.links: expected a list of [a, b, cost] triples")
            links_raw = []
        for i, raw in enumerate(links_raw):
            if not (isinstance(raw, (list, tuple)) and len(raw) == 3):
                check.fail(f"topology.links[{i}]: expected [a, b, cost]")
                continue
            links.append((str(raw[0]), str(raw[1]), raw[2]))
        if (
            default_cost is not None
            and artifact_server is not None
            and ga_candidate is not None
            and specs
        ):
            try:
                topology = Topology.build(
                    specs,
                    links,
                    default_link_cost=default_cost,
                    artifact_server=artifact_server,
                    ga_candidate=ga_candidate,
                )
                present = set(topology.nodes)
            except HflSimError as exc:
                check.fail(f"topology: {exc}")

    # settings
    settings = None
    settings_raw = check.section(data, "settings")
    if settings_raw is not None:
        check.unknown_keys(
            settings_raw,
            ("validation_window", "budget", "regression", "strategy", "la_count"),
            "settings.",
        )
        window = check.value(settings_raw, "validation_window", int, "settings.")
        budget = check.value(settings_raw, "budget", float, "settings.")
        regression_name = check.value(
            settings_raw, "regression", str, "settings.", required=False,
            default=RegressionKind.LOGARITHMIC.value,
        )
        strategy = check.value(
            settings_raw, "strategy", str, "settings.", required=False,
            default="minCommCost",
        )
        la_count = check.value(
            settings_raw, "la_count", int, "settings.", required=False, default=1
        )
        regression = None
        try:
            regression = RegressionKind(regression_name)
        except ValueError:
            check.fail(
                f"settings.regression: unknown kind {regression_name!r} "
                f"({', '.join(k.value for k in RegressionKind)})"
            )
        if strategy not in strategy_names():
            check.fail(
                f"settings.strategy: {strategy!r} is not registered "
                f"(registered: {strategy_names()})"
            )
        if window is not None and budget is not None and regression is not None:
            try:
                settings = OrchestratorSettings(
                    validation_window=window,
                    budget=budget,
                    regression=regression,
                    strategy=strategy,
                    la_count=la_count,
                )
            except ValueError as exc:
                check.fail(f"settings.validation_window: {exc}")

    # cost params
    cost_params = None
    cost_raw = check.section(data, "cost_params")
    if cost_raw is not None:
        check.unknown_keys(
            cost_raw,
            ("service_artifact_size", "model_size", "model_update_size"),
            "cost_params.",
        )
        artifact = check.value(cost_raw, "service_artifact_size", float, "cost_params.")
        model = check.value(cost_raw, "model_size", float, "cost_params.")
        update = check.value(
            cost_raw, "model_update_size", float, "cost_params.", required=False
        )
        if artifact is not None and model is not None:
            try:
                cost_params = CostParams(
                    service_artifact_size=artifact,
                    model_size=model,
                    model_update_size=update,
                )
            except ValueError as exc:
                check.fail(f"cost_params: {exc}")

    # training
    training = None
    training_raw = check.section(data, "training")
    if training_raw is not None:
        check.unknown_keys(
            training_raw,
            ("local_epochs", "local_rounds", "learning_rate", "batch_size", "seed"),
            "training.",
        )
        epochs = check.value(training_raw, "local_epochs", int, "training.")
        rounds = check.value(training_raw, "local_rounds", int, "training.")
        rate = check.value(
            training_raw, "learning_rate", float, "training.", required=False,
            default=0.1,
        )
        batch = check.value(
            training_raw, "batch_size", int, "training.", required=False, default=32
        )
        training_seed = check.value(
            training_raw, "seed", int, "training.", required=False
        )
        if training_seed is None and seed is not None:
            training_seed = seed + 1
        if epochs is not None and rounds is not None and training_seed is not None:
            try:
                training = TrainingParams(
                    local_epochs=epochs,
                    local_rounds=rounds,
                    learning_rate=rate,
                    batch_size=batch,
                    seed=training_seed,
                )
            except ValueError as exc:
                check.fail(f"training: {exc}")

    # events (needs horizon and topology for cross checks)
    events: tuple[Event, ...] = ()
    joined_nodes: list[str] = []
    if horizon is not None:
        events, joined_nodes = _parse_events(
            data.get("events"), check, horizon, present, topology is not None
        )

    # learner
    learner = None
    learner_raw = check.section(data, "learner")
    if learner_raw is not None and seed is not None:
        kind = check.value(learner_raw, "kind", str, "learner.")
        if kind == "synthetic_curve":
            check.unknown_keys(
                learner_raw, ("kind", "base", "shifted", "shift_triggers"), "learner."
            )
            base_raw = check.section(learner_raw, "base", "learner.")
            base = None
            if base_raw is not None:
                base = _parse_curve_params(base_raw, check, "learner.base", seed)
            shifted = None
            if "shifted" in learner_raw and learner_raw["shifted"] is not None:
                shifted_raw = learner_raw["shifted"]
                if not isinstance(shifted_raw, dict):
                    check.fail("learner.shifted: expected a mapping")
                elif base is not None:
                    shifted = _parse_curve_params(
                        shifted_raw, check, "learner.shifted", seed, base=base
                    )
            triggers_raw = learner_raw.get("shift_triggers")
            if triggers_raw is None:
                triggers = tuple(sorted(joined_nodes))
            elif isinstance(triggers_raw, list):
                triggers = tuple(str(t) for t in triggers_raw)
            else:
                check.fail("learner.shift_triggers: expected a list of node ids")
                triggers = ()
            if base is not None:
                learner = SyntheticCurveSpec(
                    params=base, shifted=shifted, shift_triggers=triggers
                )
        elif kind == "linear_classifier":
            check.unknown_keys(
                learner_raw,
                (
                    "kind",
                    "num_features",
                    "num_classes",
                    "class_separation",
                    "within_class_std",
                    "eval_samples_per_class",
                    "seed",
                ),
                "learner.",
            )
            features = check.value(learner_raw, "num_features", int, "learner.")
            classes = check.value(learner_raw, "num_classes", int, "learner.")
            separation = check.value(
                learner_raw, "class_separation", float, "learner.", required=False,
                default=4.0,
            )
            spread = check.value(
                learner_raw, "within_class_std", float, "learner.", required=False,
                default=1.0,
            )
            eval_per_class = check.value(
                learner_raw, "eval_samples_per_class", int, "learner.",
                required=False, default=40,
            )
            learner_seed = check.value(
                learner_raw, "seed", int, "learner.", required=False
            )
            if learner_seed is None:
                learner_seed = seed
            if features is not None and classes is not None:
                try:
                    LinearClassifierSpec(
                        num_features=features,
                        num_classes=classes,
                        class_separation=separation,
                        within_class_std=spread,
                        eval_samples_per_class=eval_per_class,
                        seed=learner_seed,
                    ).build()
                except ValueError as exc:
                    check.fail(f"learner: {exc}")
                else:
                    learner = LinearClassifierSpec(
                        num_features=features,
                        num_classes=classes,
                        class_separation=separation,
                        within_class_std=spread,
                        eval_samples_per_class=eval_per_class,
                        seed=learner_seed,
                    )
        elif kind is not None:
            check.fail(
                f"learner.kind: unknown kind {kind!r} "
                "(synthetic_curve, linear_classifier)"
            )

    # convergence
    convergence = None
    if "convergence" in data and data["convergence"] is not None:
        conv_raw = data["convergence"]
        if not isinstance(conv_raw, dict):
            check.fail("convergence: expected a mapping")
        else:
            check.unknown_keys(conv_raw, ("threshold", "patience"), "convergence.")
            threshold = check.value(
                conv_raw, "threshold", float, "convergence.", required=False
            )
            patience = check.value(
                conv_raw, "patience", int, "convergence.", required=False, default=10
            )
            try:
                convergence = ConvergenceSettings(threshold=threshold, patience=patience)
            except ValueError as exc:
                check.fail(f"convergence: {exc}")

    # cross-section feasibility of the initial deployment
    if topology is not None and settings is not None:
        ga = topology.ga_candidate
        capable = [n for n in topology.aggregation_capable_nodes() if n != ga]
        if len(capable) < settings.la_count:
            check.fail(
                f"settings.la_count: needs {settings.la_count} aggregation-capable "
                f"nodes besides the GA, topology has {len(capable)}"
            )
        trainable = [n for n in topology.trainable_nodes() if n != ga]
        if not trainable:
            check.fail("topology.nodes: no trainable node available as a client")

    if check.violations:
        raise ValidationError(check.violations)
    return Scenario(
        name=name,
        seed=seed,
        horizon=horizon,
        topology=topology,
        events=events,
        settings=settings,
        cost_params=cost_params,
        training=training,
        learner=learner,
        convergence=convergence,
    )


def load_scenario(path, *, seed_override: Optional[int] = None) -> Scenario:
    """Load and validate a scenario file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: scenario must be a mapping at the top level")
    return scenario_from_dict(data, seed_override=seed_override)


# --- echo -----------------------------------------------------------------


def _node_to_dict(spec: NodeSpec) -> dict:
    out = {
        "id": spec.id,
        "can_train": spec.can_train,
        "can_aggregate": spec.can_aggregate,
        "has_service_artifacts": spec.has_service_artifacts,
    }
    if spec.data_profile is not None:
        out["data_profile"] = dict(spec.data_profile.class_counts)
    return out


def _curve_to_dict(params: SyntheticCurveParams) -> dict:
    return {name: getattr(params, name) for name in _CURVE_FIELDS}


def _event_to_dict(event: Event) -> dict:
    change = event.change
    if isinstance(change, NodeJoined):
        return {
            "at_round": event.at_round,
            "kind": "node_joined",
            "node": _node_to_dict(change.spec),
            "links": dict(change.links),
        }
    if isinstance(change, NodeLeft):
        return {"at_round": event.at_round, "kind": "node_left", "node": change.node}
    return {
        "at_round": event.at_round,
        "kind": "link_cost_changed",
        "a": change.a,
        "b": change.b,
        "new_cost": change.new_cost,
    }


def scenario_to_dict(scenario: Scenario) -> dict:
    """Fully resolved plain mapping; reloads to an identical Scenario."""
    topo = scenario.topology
    learner = scenario.learner
    if isinstance(learner, SyntheticCurveSpec):
        learner_out = {
            "kind": "synthetic_curve",
            "base": _curve_to_dict(learner.params),
            "shift_triggers": list(learner.shift_triggers),
        }
        if learner.shifted is not None:
            learner_out["shifted"] = _curve_to_dict(learner.shifted)
    else:
        learner_out = {
            "kind": "linear_classifier",
            "num_features": learner.num_features,
            "num_classes": learner.num_classes,
            "class_separation": learner.class_separation,
            "within_class_std": learner.within_class_std,
            "eval_samples_per_class": learner.eval_samples_per_class,
            "seed": learner.seed,
        }
    out = {
        "name": scenario.name,
        "seed": scenario.seed,
        "horizon": scenario.horizon,
        "topology": {
            "default_link_cost": topo.default_link_cost,
            "artifact_server": topo.artifact_server,
            "ga_candidate": topo.ga_candidate,
            "nodes": [_node_to_dict(topo.nodes[n]) for n in sorted(topo.nodes)],
            "links": [
                [a, b, cost] for (a, b), cost in sorted(topo.links.items())
            ],
        },
        "events": [_event_to_dict(e) for e in scenario.events],
        "settings": {
            "validation_window": scenario.settings.validation_window,
            "budget": scenario.settings.budget,
            "regression": scenario.settings.regression.value,
            "strategy": scenario.settings.strategy,
            "la_count": scenario.settings.la_count,
        },
        "cost_params": {
            "service_artifact_size": scenario.cost_params.service_artifact_size,
            "model_size": scenario.cost_params.model_size,
            "model_update_size": scenario.cost_params.model_update_size,
        },
        "training": {
            "local_epochs": scenario.training.local_epochs,
            "local_rounds": scenario.training.local_rounds,
            "learning_rate": scenario.training.learning_rate,
            "batch_size": scenario.training.batch_size,
            "seed": scenario.training.seed,
        },
        "learner": learner_out,
    }
    if scenario.convergence is not None:
        out["convergence"] = {
            "threshold": scenario.convergence.threshold,
            "patience": scenario.convergence.patience,
        }
    return out


def dump_scenario(scenario: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(scenario), sort_keys=True)


# --- bundled scenarios -------------------------------------------------------


def bundled_scenario_names() -> list[str]:
    root = resources.files("hflsim.scenarios")
    return sorted(p.name[: -len(".yaml")] for p in root.iterdir() if p.name.endswith(".yaml"))


def bundled_scenario_path(name: str) -> Path:
    path = Path(str(resources.files("hflsim.scenarios") / f"{name}.yaml"))
    if not path.exists():
        raise ParseError(
            f"no bundled scenario {name!r}; available: {bundled_scenario_names()}"
        )
    return path
