import numpy as np
import pytest

from drds.noise import (
    NoiseKind,
    NoiseModel,
    covariance_ellipses,
    empirical_cvar,
    halfspace_cvar,
    run_monte_carlo,
    simulate_closed_loop,
    step_statistics,
    terminal_report,
    violation_risk,
)
from drds.steering import Halfspace, Scenario
from drds.system import Policy, apply_policy


def _make_policy(scenario: Scenario) -> Policy:
    aug = scenario.aug
    L = np.zeros((aug.control_dim, aug.state_dim))
    L[1, 1] = -0.5
    return Policy.from_disturbance_gain(np.array([-1.0, 0.0]), L, aug)


def _make_noise(scenario: Scenario, seed: int = 3) -> NoiseModel:
    return NoiseModel(kind=NoiseKind.NOMINAL, base=scenario.sigma_w, seed=seed)


class TestEmpiricalCvar:
    def test_upper_half_average(self) -> None:
        assert empirical_cvar(np.array([1.0, 2.0, 3.0, 4.0]), 0.5) == pytest.approx(3.5)

    def test_constant_losses(self) -> None:
        assert empirical_cvar(np.full(10, -2.0), 0.3) == pytest.approx(-2.0)

    def test_small_level_takes_maximum(self) -> None:
        assert empirical_cvar(np.array([5.0, -1.0, 2.0]), 0.01) == pytest.approx(5.0)

    def test_large_level_takes_all(self) -> None:
        assert empirical_cvar(np.array([1.0, 2.0, 3.0, 4.0]), 0.99) == pytest.approx(2.5)

    def test_empty_losses_rejected(self) -> None:
        with pytest.raises(ValueError, match="nonempty"):
            empirical_cvar(np.array([]), 0.5)


class TestViolationRisk:
    def test_never_violated(self) -> None:
        states = np.zeros((5, 3, 1))
        halfspaces = (Halfspace.uniform([1.0], -1.0, 0.1, [1, 2]),)

        risk = violation_risk(states, halfspaces)

        assert risk.per_step == {(0, 1): 0.0, (0, 2): 0.0}
        assert risk.joint == 0.0

    def test_joint_counts_any_step(self) -> None:
        states = np.zeros((4, 3, 1))
        states[:2, 1, 0] = 2.0
        states[2:, 2, 0] = 2.0
        halfspaces = (Halfspace.uniform([1.0], -1.0, 0.1, [1, 2]),)

        risk = violation_risk(states, halfspaces)

        assert risk.per_step == {(0, 1): 0.5, (0, 2): 0.5}
        assert risk.joint == 1.0

    def test_halfspace_cvar_per_step(self) -> None:
        states = np.arange(8.0).reshape(4, 2, 1)
        halfspaces = (Halfspace.uniform([1.0], -1.0, 0.5, [0, 1]),)

        cvar = halfspace_cvar(states, halfspaces)

        # Step 0 holds 0, 2, 4, 6 and step 1 holds 1, 3, 5, 7.
        assert cvar == {(0, 0): pytest.approx(4.0), (0, 1): pytest.approx(5.0)}


class TestSimulation:
    def test_single_sample_matches_policy_rollout(self, scalar_scenario: Scenario) -> None:
        policy = _make_policy(scalar_scenario)
        w = np.array([0.3, -0.2])

        trajectories = simulate_closed_loop(policy, scalar_scenario, w[None, :])

        x, u = apply_policy(policy, scalar_scenario.x0, w, scalar_scenario.aug)
        np.testing.assert_allclose(trajectories.states[0], x)
        np.testing.assert_allclose(trajectories.controls[0], u)

    def test_zero_noise_gives_nominal(self, scalar_scenario: Scenario) -> None:
        policy = _make_policy(scalar_scenario)

        trajectories = simulate_closed_loop(policy, scalar_scenario, np.zeros((3, 2)))

        np.testing.assert_allclose(trajectories.states[:, :, 0], [[1.0, 0.0, 0.0]] * 3)

    def test_sample_width_checked(self, scalar_scenario: Scenario) -> None:
        with pytest.raises(ValueError, match="samples have length"):
            simulate_closed_loop(_make_policy(scalar_scenario), scalar_scenario, np.zeros((2, 3)))


class TestTerminalReport:
    def test_matching_moments_at_zero_distance(self, scalar_scenario: Scenario) -> None:
        states = np.zeros((2, 3, 1))
        states[:, -1, 0] = [-np.sqrt(0.5), np.sqrt(0.5)]

        report = terminal_report(states, scalar_scenario)

        assert report.distance == pytest.approx(0.0, abs=1e-7)
        assert report.eta_f == pytest.approx(2.0)
        assert report.containment_excess == pytest.approx(-0.75)
        assert report.contained

    def test_spread_beyond_bound_not_contained(self, scalar_scenario: Scenario) -> None:
        states = np.zeros((2, 3, 1))
        states[:, -1, 0] = [-4.0, 4.0]

        assert not terminal_report(states, scalar_scenario).contained

    def test_needs_two_samples(self, scalar_scenario: Scenario) -> None:
        with pytest.raises(ValueError, match="at least 2 samples"):
            terminal_report(np.zeros((1, 3, 1)), scalar_scenario)


class TestStepStatistics:
    def test_means_and_eigenvalues(self) -> None:
        states = np.zeros((2, 2, 1))
        states[:, 1, 0] = [1.0, 3.0]

        stats = step_statistics(states)

        np.testing.assert_allclose(stats.mean[:, 0], [0.0, 2.0])
        np.testing.assert_allclose(stats.cov_eigenvalues[:, 0], [0.0, 2.0])

    def test_ellipse_axes(self) -> None:
        a, b = np.sqrt(6.0), np.sqrt(1.5)
        plane = np.array([[a, 0.0], [-a, 0.0], [0.0, b], [0.0, -b]])
        states = plane[:, None, :]

        (row,) = covariance_ellipses(states)

        assert row[1:3] == pytest.approx([0.0, 0.0])
        assert row[3] == pytest.approx(6.0)
        assert row[4] == pytest.approx(3.0)
        assert np.sin(row[5]) == pytest.approx(0.0, abs=1e-12)


class TestRunMonteCarlo:
    def test_report_fields(self, scalar_scenario: Scenario) -> None:
        policy = _make_policy(scalar_scenario)

        trajectories, report = run_monte_carlo(
            policy, scalar_scenario, _make_noise(scalar_scenario), samples=200
        )

        assert trajectories.samples == 200
        assert report.samples == 200
        assert report.noise_kind == "nominal"
        assert set(report.cvar) == {(0, 1), (0, 2)}
        assert report.violation is not None
        assert 0.0 <= report.violation.joint <= 1.0
        assert report.terminal is not None
        assert report.steps is not None
        assert report.steps.mean.shape == (3, 1)

    def test_zero_samples_leave_statistics_empty(self, scalar_scenario: Scenario) -> None:
        trajectories, report = run_monte_carlo(
            _make_policy(scalar_scenario), scalar_scenario, _make_noise(scalar_scenario), samples=0
        )

        assert trajectories.states.shape == (0, 3, 1)
        assert report.cvar == {}
        assert report.violation is None
        assert report.terminal is None

    def test_seed_reproduces_and_workers_agree(self, scalar_scenario: Scenario) -> None:
        policy = _make_policy(scalar_scenario)
        noise = _make_noise(scalar_scenario)

        first, _ = run_monte_carlo(policy, scalar_scenario, noise, samples=1500)
        second, _ = run_monte_carlo(policy, scalar_scenario, noise, samples=1500, workers=3)

        np.testing.assert_array_equal(first.states, second.states)
