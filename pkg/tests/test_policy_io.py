from pathlib import Path

import numpy as np
import pytest

from drds.cli.policy_io import load_policy, policy_to_dict, write_policy
from drds.errors import ScenarioError
from drds.steering import Scenario
from drds.system import LtiModel, Policy, build_augmented
from drds.util import dump_yaml, load_yaml_document


def _make_policy(scenario: Scenario) -> Policy:
    aug = scenario.aug
    L = np.zeros((aug.control_dim, aug.state_dim))
    L[1, 1] = -1.0 / 3.0
    return Policy.from_disturbance_gain(np.array([-0.1, 0.7]), L, aug)


class TestPolicyFiles:
    def test_policy_survives_write_and_load(
        self, tmp_path: Path, scalar_scenario: Scenario
    ) -> None:
        policy = _make_policy(scalar_scenario)
        path = tmp_path / "policy.yaml"

        write_policy(path, policy, scalar_scenario.aug, digest="abc")
        loaded = load_policy(path, scalar_scenario.aug)

        np.testing.assert_array_equal(loaded.v, policy.v)
        np.testing.assert_array_equal(loaded.L, policy.L)
        np.testing.assert_allclose(loaded.K, policy.K)
        assert load_yaml_document(path)["scenario_digest"] == "abc"

    def test_header_dimensions(self, scalar_scenario: Scenario) -> None:
        raw = policy_to_dict(_make_policy(scalar_scenario), scalar_scenario.aug)

        assert raw["dims"] == {"n": 1, "m": 1, "d": 1, "N": 2}
        assert raw["format"] == 1

    def test_other_horizon_rejected(
        self, tmp_path: Path, scalar_scenario: Scenario
    ) -> None:
        path = tmp_path / "policy.yaml"
        write_policy(path, _make_policy(scalar_scenario), scalar_scenario.aug)
        longer = build_augmented(LtiModel.time_invariant(1.0, 1.0, 1.0, 3))

        with pytest.raises(ScenarioError) as info:
            load_policy(path, longer)

        assert info.value.field_path == "policy.dims"

    def test_inconsistent_feedback_gain_rejected(
        self, tmp_path: Path, scalar_scenario: Scenario
    ) -> None:
        aug = scalar_scenario.aug
        raw = policy_to_dict(_make_policy(scalar_scenario), aug)
        raw["K"] = np.zeros((aug.control_dim, aug.state_dim))
        path = tmp_path / "policy.yaml"
        dump_yaml(raw, path)

        with pytest.raises(ScenarioError, match="does not match the gain") as info:
            load_policy(path, aug)

        assert info.value.field_path == "policy.K"

    def test_anticausal_gain_rejected(
        self, tmp_path: Path, scalar_scenario: Scenario
    ) -> None:
        aug = scalar_scenario.aug
        raw = policy_to_dict(_make_policy(scalar_scenario), aug)
        del raw["K"]
        raw["L"] = np.triu(np.ones((aug.control_dim, aug.state_dim)))
        path = tmp_path / "policy.yaml"
        dump_yaml(raw, path)

        with pytest.raises(ScenarioError) as info:
            load_policy(path, aug)

        assert info.value.field_path == "policy.L"

    def test_missing_feedforward_reported(
        self, tmp_path: Path, scalar_scenario: Scenario
    ) -> None:
        aug = scalar_scenario.aug
        raw = policy_to_dict(_make_policy(scalar_scenario), aug)
        del raw["v"]
        path = tmp_path / "policy.yaml"
        dump_yaml(raw, path)

        with pytest.raises(ScenarioError, match="is required"):
            load_policy(path, aug)
