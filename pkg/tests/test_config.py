"""Tests for the config file grammar and experiment config assembly."""

import numpy as np
import pytest

from labelcert import Dataset, classification_delta, uniform_delta
from labelcert.config import (
    ExperimentConfig,
    build_delta,
    build_spec,
    config_from_dict,
    load_experiment_config,
    parse_config_text,
    resolve_budget,
)
from labelcert.errors import ParseError

SAMPLE = """
# experiment settings
task = "classification"
seed = 7
budgets = ["1%", "2%", 5]
lambda_grid = [0.0, 0.1, 1.0]
accuracy_tolerance = 2.0

[dataset]
path = "income.csv"   # a trailing comment
label = "income"
features = ["age", "hours"]
group = "race"
add_bias_column = true

[split]
train = 0.8
val = 0.1
test = 0.1
folds = 1

[bias]
kind = "classification"

[targeting]
group = "minority"
negate = false
"""


class TestParser:
    def test_sample_document(self):
        doc = parse_config_text(SAMPLE)
        assert doc["task"] == "classification"
        assert doc["seed"] == 7
        assert doc["budgets"] == ["1%", "2%", 5]
        assert doc["lambda_grid"] == [0.0, 0.1, 1.0]
        assert doc["dataset"]["path"] == "income.csv"
        assert doc["dataset"]["add_bias_column"] is True
        assert doc["split"]["train"] == 0.8
        assert doc["targeting"]["group"] == "minority"

    def test_hash_inside_string_kept(self):
        doc = parse_config_text('name = "a#b"\n')
        assert doc["name"] == "a#b"

    def test_bad_lines_rejected(self):
        for text in ("just words\n", "[unclosed\n", 'x = "open\n', "x = [1, 2\n"):
            with pytest.raises(ParseError):
                parse_config_text(text)

    def test_value_types(self):
        doc = parse_config_text('a = 3\nb = 2.5\nc = true\nd = "s"\ne = [1, "x"]\n')
        assert doc["a"] == 3 and isinstance(doc["a"], int)
        assert doc["b"] == 2.5
        assert doc["c"] is True
        assert doc["d"] == "s"
        assert doc["e"] == [1, "x"]

    def test_determinism(self):
        assert parse_config_text(SAMPLE) == parse_config_text(SAMPLE)


class TestExperimentConfig:
    def test_from_sample(self):
        config = config_from_dict(parse_config_text(SAMPLE))
        assert config.task == "classification"
        assert config.schema.label == "income"
        assert config.schema.add_bias_column
        assert config.targeting.value == "minority"
        assert config.budgets == ("1%", "2%", 5)
        assert config.reference_budget == "2%"  # middle of the grid

    def test_overrides_win(self):
        config = config_from_dict(parse_config_text(SAMPLE), seed=99, out_dir="elsewhere")
        assert config.seed == 99
        assert config.out_dir == "elsewhere"

    def test_none_overrides_ignored(self):
        config = config_from_dict(parse_config_text(SAMPLE), seed=None)
        assert config.seed == 7

    def test_regression_requires_epsilon(self):
        with pytest.raises(ValueError):
            ExperimentConfig(task="regression", epsilon=None)
        ExperimentConfig(task="regression", epsilon=1.0)

    def test_empty_budgets_rejected(self):
        with pytest.raises(ValueError):
            ExperimentConfig(budgets=())

    def test_file_loading(self, tmp_path):
        path = tmp_path / "config.txt"
        path.write_text(SAMPLE, encoding="utf-8")
        config = load_experiment_config(path)
        assert config.schema.features == ("age", "hours")


class TestResolveBudget:
    def test_absolute(self):
        assert resolve_budget(5, 100) == 5
        assert resolve_budget("5", 100) == 5  # CLI passes strings through

    def test_percentage_rounds_to_nearest(self):
        assert resolve_budget("1%", 800) == 8
        assert resolve_budget("2.6%", 100) == 3

    def test_nonzero_percentage_floor_one(self):
        assert resolve_budget("0.01%", 100) == 1
        assert resolve_budget("0%", 100) == 0

    def test_exceeding_training_size_rejected(self):
        with pytest.raises(ValueError):
            resolve_budget(101, 100)

    def test_malformed_entry(self):
        with pytest.raises(ValueError):
            resolve_budget("five", 100)


class TestBuildDelta:
    def _train(self):
        return Dataset(
            np.array([[1.0], [2.0], [3.0]]),
            np.array([1.0, 0.0, 1.0]),
            group_labels=("a", "b", "a"),
        )

    def test_uniform(self):
        config = ExperimentConfig(task="regression", epsilon=1.0,
                                  bias_kind="uniform", bias_halfwidth=2.0)
        delta = build_delta(config, self._train())
        np.testing.assert_array_equal(delta.lo, [-2.0, -2.0, -2.0])

    def test_classification_default(self):
        config = ExperimentConfig(task="classification")
        delta = build_delta(config, self._train())
        expected = classification_delta(self._train().y)
        np.testing.assert_array_equal(delta.lo, expected.lo)
        np.testing.assert_array_equal(delta.hi, expected.hi)

    def test_targeting_applied(self):
        from labelcert import TargetPredicate

        config = ExperimentConfig(task="classification",
                                  targeting=TargetPredicate(value="a"))
        delta = build_delta(config, self._train())
        assert delta.lo[1] == delta.hi[1] == 0.0
        assert delta.lo[0] == -1.0

    def test_file_deltas(self, tmp_path):
        path = tmp_path / "delta.csv"
        path.write_text("lo,hi\n-1,1\n-2,0\n0,3\n", encoding="utf-8")
        config = ExperimentConfig(task="regression", epsilon=1.0,
                                  bias_kind="file", bias_file=str(path))
        delta = build_delta(config, self._train())
        np.testing.assert_array_equal(delta.hi, [1.0, 0.0, 3.0])

    def test_build_spec_resolves_budget(self):
        config = ExperimentConfig(task="classification", budgets=("33.4%",))
        spec = build_spec(config, self._train(), "33.4%")
        assert spec.budget == 1
