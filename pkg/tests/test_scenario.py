"""Scenario loading, validation corpus, and round-trip echoing."""

import pytest
import yaml

from hflsim.errors import ParseError, ValidationError
from hflsim.scenario import (
    bundled_scenario_names,
    bundled_scenario_path,
    dump_scenario,
    load_scenario,
    scenario_from_dict,
    scenario_to_dict,
)

from conftest import DATA_DIR


class TestBundledScenarios:
    def test_all_bundled_scenarios_load(self):
        names = bundled_scenario_names()
        assert {"scenario_1a", "scenario_1b", "scenario_2a", "scenario_2b"} <= set(names)
        for name in names:
            scenario = load_scenario(bundled_scenario_path(name))
            assert scenario.name == name

    def test_scenario_2a_resolves_documented_parameters(self):
        scenario = load_scenario(bundled_scenario_path("scenario_2a"))
        assert scenario.settings.budget == 100000
        assert scenario.settings.validation_window == 5
        assert scenario.training.local_epochs == 2
        assert scenario.training.local_rounds == 2
        assert scenario.cost_params.model_update_size == pytest.approx(3.3)
        assert scenario.settings.strategy == "minCommCost"

    def test_seed_override_propagates_to_learner(self):
        base = load_scenario(bundled_scenario_path("scenario_1a"))
        overridden = load_scenario(bundled_scenario_path("scenario_1a"), seed_override=5)
        assert overridden.seed == 5
        assert overridden.learner.params.seed == 5
        assert overridden.training.seed == 6
        assert base.learner.params.seed == base.seed


ADVERSARIAL = [
    ("bad_syntax.yaml", ParseError, None),
    ("top_level_list.yaml", ParseError, None),
    ("missing_default_link_cost.yaml", ValidationError, "default_link_cost"),
    ("w1_logarithmic.yaml", ValidationError, "validation_window"),
    ("unknown_strategy.yaml", ValidationError, "strategy"),
    ("duplicate_node.yaml", ValidationError, "twice"),
    ("unknown_link_target.yaml", ValidationError, "ghost"),
    ("profile_on_aggregator.yaml", ValidationError, "data profile"),
    ("event_beyond_horizon.yaml", ValidationError, "at_round"),
    ("negative_budget.yaml", ValidationError, "budget"),
]


class TestAdversarialCorpus:
    @pytest.mark.parametrize("filename,error,needle", ADVERSARIAL)
    def test_documented_error_class(self, filename, error, needle):
        with pytest.raises(error) as excinfo:
            load_scenario(DATA_DIR / filename)
        if needle is not None:
            assert needle in str(excinfo.value)

    def test_validation_lists_all_violations(self):
        data = yaml.safe_load((DATA_DIR / "mini.yaml").read_text())
        del data["topology"]["default_link_cost"]
        data["settings"]["validation_window"] = 1
        with pytest.raises(ValidationError) as excinfo:
            scenario_from_dict(data)
        text = str(excinfo.value)
        assert "default_link_cost" in text
        assert "validation_window" in text

    def test_unknown_field_reported(self):
        data = yaml.safe_load((DATA_DIR / "mini.yaml").read_text())
        data["settings"]["valiation_window"] = 3  # typo
        with pytest.raises(ValidationError) as excinfo:
            scenario_from_dict(data)
        assert "valiation_window" in str(excinfo.value)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            load_scenario(tmp_path / "nope.yaml")


class TestRoundTrip:
    @pytest.mark.parametrize(
        "name",
        ["scenario_1a", "scenario_1b", "scenario_2a", "scenario_2b", "scenario_2b_linear"],
    )
    def test_bundled_echo_reloads_identically(self, name, tmp_path):
        scenario = load_scenario(bundled_scenario_path(name))
        echoed = tmp_path / "echo.yaml"
        echoed.write_text(dump_scenario(scenario))
        reloaded = load_scenario(echoed)
        assert reloaded == scenario

    def test_fixture_echo_reloads_identically(self, tmp_path):
        for name in ("mini.yaml", "scenario_node_left.yaml"):
            scenario = load_scenario(DATA_DIR / name)
            echoed = tmp_path / name
            echoed.write_text(dump_scenario(scenario))
            assert load_scenario(echoed) == scenario

    def test_to_dict_is_plain_yaml_data(self):
        scenario = load_scenario(bundled_scenario_path("scenario_1a"))
        data = scenario_to_dict(scenario)
        # must survive a yaml dump/load cycle untouched
        assert yaml.safe_load(yaml.safe_dump(data)) == data


class TestDefaults:
    def test_shift_triggers_default_to_joined_nodes(self):
        scenario = load_scenario(bundled_scenario_path("scenario_1a"))
        assert scenario.learner.shift_triggers == ("c10", "c9")

    def test_shifted_params_inherit_base_fields(self):
        scenario = load_scenario(bundled_scenario_path("scenario_2a"))
        base = scenario.learner.params
        shifted = scenario.learner.shifted
        assert shifted.coverage_gain == base.coverage_gain
        assert shifted.noise_std == base.noise_std
        assert shifted.seed == base.seed
        assert shifted.base_offset != base.base_offset

    def test_model_update_size_defaults_to_model_size(self):
        scenario = load_scenario(DATA_DIR / "mini.yaml")
        assert scenario.cost_params.model_update_size == scenario.cost_params.model_size
