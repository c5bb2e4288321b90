from collections import Counter
from dataclasses import replace

import numpy as np
import pytest

from drds.ambiguity import RadiusMode
from drds.conic import ConeKind, SolverSettings, SolveStatus
from drds.conic.backend.registry import BackendRegistry
from drds.errors import SteeringError
from drds.steering import (
    Halfspace,
    Scenario,
    build_baseline_program,
    build_drds_program,
    evaluate_policy,
    solve_baseline_cs,
    solve_drds,
    uniform_risk_split,
    worstcase_moments,
    worstcase_quadratic_value,
    xi_matrix,
)
from drds.system import Policy, apply_policy
from tests.conftest import make_scalar_scenario

_FEAS_TOL = 1e-6


def _labels(scenario: Scenario, baseline: bool = False) -> Counter[str]:
    program = build_baseline_program(scenario) if baseline else build_drds_program(scenario)
    return Counter(block.label.rstrip("0123456789_") for block in program.problem.blocks)


class TestWorstcaseQuadratic:
    def test_zero_radius_is_trace(self) -> None:
        Xi = np.diag([1.0, 2.0])
        Sigma = np.array([[1.0, 0.3], [0.3, 2.0]])

        assert worstcase_quadratic_value(Xi, Sigma, 0.0) == pytest.approx(5.0)

    def test_scalar_ball(self) -> None:
        value = worstcase_quadratic_value(np.eye(1), np.eye(1), 0.5)

        assert value == pytest.approx(2.25, rel=1e-6)

    def test_scalar_ball_with_mean(self) -> None:
        value = worstcase_quadratic_value(np.eye(1), 16.0 * np.eye(1), 1.0, mean=np.array([3.0]))

        assert value == pytest.approx(36.0, rel=1e-6)

    def test_zero_weight_gives_zero(self) -> None:
        assert worstcase_quadratic_value(np.zeros((2, 2)), np.eye(2), 1.0) == 0.0

    @pytest.mark.parametrize("seed", range(5))
    def test_dominates_nominal(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        root = rng.standard_normal((4, 4))
        Xi = root @ root.T
        Sigma = np.diag(rng.uniform(0.1, 1.0, 4))

        nominal = float(np.trace(Xi @ Sigma))

        assert worstcase_quadratic_value(Xi, Sigma, 0.3) >= nominal
        assert worstcase_quadratic_value(Xi, Sigma, 0.6) >= worstcase_quadratic_value(
            Xi, Sigma, 0.3
        )

    def test_worstcase_moments_attain_value(self) -> None:
        mean, cov = worstcase_moments(np.eye(1), np.eye(1), 0.5)

        np.testing.assert_allclose(mean, [0.0], atol=1e-12)
        assert cov[0, 0] == pytest.approx(2.25, rel=1e-4)

    def test_shape_mismatch_rejected(self) -> None:
        with pytest.raises(ValueError, match="has shape"):
            worstcase_quadratic_value(np.eye(2), np.eye(3), 0.1)


class TestXiMatrix:
    def test_zero_gain_scalar_chain(self, scalar_scenario: Scenario) -> None:
        aug = scalar_scenario.aug
        L = np.zeros((aug.control_dim, aug.state_dim))

        Xi = xi_matrix(L, aug, scalar_scenario.weights)

        # x1 = w0 and x2 = w0 + w1; the terminal state carries no weight.
        np.testing.assert_allclose(Xi, [[1.0, 0.0], [0.0, 0.0]])


class TestRiskSplit:
    def test_union_bound_split(self) -> None:
        assert uniform_risk_split(0.1, 2, 5) == pytest.approx(0.01)

    def test_invalid_inputs_rejected(self) -> None:
        with pytest.raises(ValueError, match="gamma"):
            uniform_risk_split(1.0, 1, 1)
        with pytest.raises(ValueError, match="at least one"):
            uniform_risk_split(0.1, 0, 3)


class TestProgramAssembly:
    def test_drds_blocks(self, scalar_scenario: Scenario) -> None:
        labels = _labels(scalar_scenario)

        assert labels["drcvar"] == 2
        assert labels["sigma_bound"] == 2
        assert labels["control_norm"] == 2
        assert labels["terminal_radius"] == 1
        assert labels["dr_cost_moment"] == 1
        assert labels["dr_cost_gain"] == 1

    def test_drcvar_blocks_are_second_order(self, scalar_scenario: Scenario) -> None:
        program = build_drds_program(scalar_scenario)

        kinds = {b.kind for b in program.problem.blocks if b.label.startswith("drcvar")}
        bounds = {b.kind for b in program.problem.blocks if b.label.startswith("sigma_bound")}

        assert kinds == {ConeKind.SECOND_ORDER}
        assert bounds == {ConeKind.PSD}

    def test_zero_radius_drops_robust_blocks(self) -> None:
        labels = _labels(make_scalar_scenario(epsilon=0.0))

        assert labels["sigma_bound"] == 0
        assert labels["terminal_radius"] == 0
        assert labels["dr_cost_gain"] == 0
        assert labels["nominal_state_cost"] == 1

    def test_baseline_blocks(self, scalar_scenario: Scenario) -> None:
        labels = _labels(scalar_scenario, baseline=True)

        assert labels["chance"] == 2
        assert labels["drcvar"] == 0
        assert labels["terminal_radius"] == 0
        assert labels["nominal_state_cost"] == 1
        assert labels["nominal_input_cost"] == 1

    def test_zero_delta_with_radius_infeasible(self) -> None:
        with pytest.raises(SteeringError) as info:
            build_drds_program(make_scalar_scenario(delta=0.0))

        assert info.value.stage == "terminal"
        assert info.value.status is SolveStatus.INFEASIBLE

    def test_initial_state_violation_reported(self, scalar_scenario: Scenario) -> None:
        scenario = replace(
            scalar_scenario, halfspaces=(Halfspace.uniform([1.0], -0.5, 0.1, [0, 1]),)
        )

        with pytest.raises(SteeringError) as info:
            build_drds_program(scenario)

        assert info.value.stage == "drcvar"

    def test_baseline_rejects_gamma_above_half(self) -> None:
        with pytest.raises(ValueError, match="gamma <= 0.5"):
            build_baseline_program(make_scalar_scenario(gamma=0.6))

    def test_baseline_accepts_gamma_half(self) -> None:
        labels = _labels(make_scalar_scenario(gamma=0.5), baseline=True)

        assert labels["chance"] == 2


class TestSolveDrds:
    def test_solution_meets_constraints(
        self, scalar_scenario: Scenario, clarabel_registry: BackendRegistry
    ) -> None:
        result = solve_drds(scalar_scenario, SolverSettings(), registry=clarabel_registry)
        evaluation = result.diagnostics.evaluation

        assert result.diagnostics.status == SolveStatus.OPTIMAL.value
        assert evaluation.terminal_mean_error <= _FEAS_TOL
        assert evaluation.terminal_cov_excess <= _FEAS_TOL
        assert evaluation.terminal_radius <= scalar_scenario.terminal.delta + _FEAS_TOL
        assert evaluation.max_drcvar_lhs <= _FEAS_TOL
        assert result.diagnostics.lam is not None

    def test_objective_matches_worstcase_cost(
        self, scalar_scenario: Scenario, clarabel_registry: BackendRegistry
    ) -> None:
        result = solve_drds(scalar_scenario, SolverSettings(), registry=clarabel_registry)

        assert result.diagnostics.objective == pytest.approx(
            result.diagnostics.evaluation.worstcase_cost, rel=5e-3
        )

    def test_radius_never_lowers_the_cost(self, clarabel_registry: BackendRegistry) -> None:
        nominal = solve_drds(make_scalar_scenario(epsilon=0.0), registry=clarabel_registry)
        robust = solve_drds(make_scalar_scenario(epsilon=0.1), registry=clarabel_registry)

        assert nominal.diagnostics.objective <= robust.diagnostics.objective + 1e-6

    def test_operator_norm_mode_solves(
        self, scalar_scenario: Scenario, clarabel_registry: BackendRegistry
    ) -> None:
        result = solve_drds(
            scalar_scenario, mode=RadiusMode.OPERATOR_NORM, registry=clarabel_registry
        )

        assert result.diagnostics.evaluation.mode is RadiusMode.OPERATOR_NORM
        assert result.diagnostics.evaluation.max_drcvar_lhs <= _FEAS_TOL

    def test_unreachable_target_raises(self, clarabel_registry: BackendRegistry) -> None:
        # Terminal covariance below the unavoidable last-step noise.
        scenario = make_scalar_scenario()
        scenario = replace(
            scenario, terminal=replace(scenario.terminal, Sigma_f=np.array([[1e-4]]))
        )

        with pytest.raises(SteeringError) as info:
            solve_drds(scenario, registry=clarabel_registry)

        assert info.value.stage == "solve"
        assert "terminal_covariance" in str(info.value)
        assert "drcvar x2" in str(info.value)


class TestSolveBaseline:
    def test_half_gamma_keeps_nominal_inside(self, clarabel_registry: BackendRegistry) -> None:
        scenario = make_scalar_scenario(offset=-0.3, gamma=0.5)

        result = solve_baseline_cs(scenario, registry=clarabel_registry)
        states, _ = apply_policy(result.policy, scenario.x0, np.zeros(2), scenario.aug)

        assert result.diagnostics.status == SolveStatus.OPTIMAL.value
        assert states[1:, 0].max() <= 0.3 + _FEAS_TOL

    def test_radius_has_no_effect(self, clarabel_registry: BackendRegistry) -> None:
        first = solve_baseline_cs(make_scalar_scenario(epsilon=0.05), registry=clarabel_registry)
        second = solve_baseline_cs(make_scalar_scenario(epsilon=0.5), registry=clarabel_registry)

        assert first.diagnostics.baseline
        assert first.diagnostics.objective == pytest.approx(
            second.diagnostics.objective, rel=1e-6, abs=1e-8
        )

    def test_baseline_cost_is_nominal(
        self, scalar_scenario: Scenario, clarabel_registry: BackendRegistry
    ) -> None:
        result = solve_baseline_cs(scalar_scenario, registry=clarabel_registry)

        assert result.diagnostics.objective == pytest.approx(
            result.diagnostics.evaluation.nominal_cost, rel=5e-3
        )


class TestEvaluatePolicy:
    def test_open_loop_evaluation(self, scalar_scenario: Scenario) -> None:
        aug = scalar_scenario.aug
        policy = Policy.open_loop(np.array([-1.0, 0.0]), aug)

        evaluation = evaluate_policy(scalar_scenario, policy)

        assert evaluation.terminal_mean_error == pytest.approx(0.0)
        # Open loop leaves L̃_2 = [1, 1], so σ_max² = 2.
        assert evaluation.terminal_radius == pytest.approx(0.05 * 2.0)
        assert evaluation.nominal_cost == pytest.approx(0.01 + 1.0)
        assert set(evaluation.drcvar_lhs) == {(0, 1), (0, 2)}
