from collections import Counter
from dataclasses import replace

import pytest

from drds.cli.scenario import ScenarioFile, load_scenario
from drds.conic import ConeKind, SolverSettings
from drds.conic.backend.registry import BackendRegistry
from drds.noise import MonteCarloReport, NoiseKind, NoiseModel, run_monte_carlo
from drds.steering import (
    SteeringResult,
    build_drds_program,
    solve_baseline_cs,
    solve_drds,
)

pytestmark = pytest.mark.slow

_SAMPLES = 5000


@pytest.fixture(scope="module")
def double_integrator() -> ScenarioFile:
    return load_scenario("double_integrator")


@pytest.fixture(scope="module")
def registry(tmp_path_factory: pytest.TempPathFactory) -> BackendRegistry:
    config = tmp_path_factory.mktemp("config") / "solvers.yaml"
    config.write_text("clarabel:\n  max_iter: 500\n")
    return BackendRegistry(config_location=config)


@pytest.fixture(scope="module")
def settings(double_integrator: ScenarioFile) -> SolverSettings:
    # Interior-point residuals at the scenario tolerance sit right at the terminal checks.
    return replace(
        double_integrator.solver.settings(), tol_feas=1e-10, tol_gap=1e-10, verify_factor=1e3
    )


@pytest.fixture(scope="module")
def drds_result(
    double_integrator: ScenarioFile, settings: SolverSettings, registry: BackendRegistry
) -> SteeringResult:
    return solve_drds(double_integrator.scenario, settings, registry=registry)


@pytest.fixture(scope="module")
def baseline_result(
    double_integrator: ScenarioFile, settings: SolverSettings, registry: BackendRegistry
) -> SteeringResult:
    return solve_baseline_cs(double_integrator.scenario, settings, registry=registry)


def _reports(
    double_integrator: ScenarioFile,
    noise: NoiseModel,
    *results: SteeringResult,
) -> list[MonteCarloReport]:
    return [
        run_monte_carlo(result.policy, double_integrator.scenario, noise, samples=_SAMPLES)[1]
        for result in results
    ]


@pytest.fixture(scope="module")
def maximal_reports(
    double_integrator: ScenarioFile,
    drds_result: SteeringResult,
    baseline_result: SteeringResult,
) -> tuple[MonteCarloReport, MonteCarloReport]:
    scenario = double_integrator.scenario
    noise = NoiseModel(
        kind=NoiseKind.MAXIMAL, base=scenario.sigma_w, seed=0, radius=scenario.epsilon
    )
    robust, baseline = _reports(double_integrator, noise, drds_result, baseline_result)
    return robust, baseline


class TestDoubleIntegrator:
    def test_program_shape(self, double_integrator: ScenarioFile) -> None:
        program = build_drds_program(double_integrator.scenario)
        blocks = Counter(
            (b.label.rstrip("0123456789_"), b.kind) for b in program.problem.blocks
        )

        assert blocks[("drcvar", ConeKind.SECOND_ORDER)] == 26
        assert blocks[("sigma_bound", ConeKind.PSD)] == 13
        assert blocks[("control_norm", ConeKind.SECOND_ORDER)] == 20
        assert blocks[("dr_cost_moment", ConeKind.PSD)] == 1
        assert blocks[("dr_cost_gain", ConeKind.PSD)] == 1

    def test_robust_solution_feasible(
        self, double_integrator: ScenarioFile, drds_result: SteeringResult
    ) -> None:
        evaluation = drds_result.diagnostics.evaluation

        assert drds_result.diagnostics.status == "optimal"
        assert evaluation.terminal_mean_error <= 1e-6
        assert evaluation.terminal_cov_excess <= 1e-8
        assert evaluation.terminal_radius <= double_integrator.scenario.terminal.delta + 1e-8
        assert evaluation.max_drcvar_lhs <= 1e-6

    def test_zero_radius_is_cheaper(
        self,
        double_integrator: ScenarioFile,
        drds_result: SteeringResult,
        settings: SolverSettings,
        registry: BackendRegistry,
    ) -> None:
        nominal = solve_drds(
            double_integrator.scenario.with_epsilon(0.0), settings, registry=registry
        )

        assert nominal.diagnostics.objective <= drds_result.diagnostics.objective + 1e-6

    def test_baseline_solves(self, baseline_result: SteeringResult) -> None:
        assert baseline_result.diagnostics.status == "optimal"
        assert baseline_result.diagnostics.evaluation.terminal_mean_error <= 1e-6


class TestMaximalNoise:
    def test_robust_policy_keeps_joint_risk_low(
        self, maximal_reports: tuple[MonteCarloReport, MonteCarloReport]
    ) -> None:
        robust, baseline = maximal_reports

        assert robust.violation is not None
        assert baseline.violation is not None
        assert robust.violation.joint <= 0.02
        assert robust.violation.joint < baseline.violation.joint

    def test_baseline_breaks_under_maximal_noise(
        self, maximal_reports: tuple[MonteCarloReport, MonteCarloReport]
    ) -> None:
        _, baseline = maximal_reports

        assert baseline.violation is not None
        assert baseline.violation.joint >= 0.03

    def test_only_robust_terminal_stays_contained(
        self, maximal_reports: tuple[MonteCarloReport, MonteCarloReport]
    ) -> None:
        robust, baseline = maximal_reports

        assert robust.terminal is not None
        assert baseline.terminal is not None
        assert robust.terminal.eta_f == pytest.approx(1.75, rel=1e-9)
        assert robust.terminal.contained
        assert not baseline.terminal.contained


class TestHeavyTailedNoise:
    def test_student_t_risk_below_baseline(
        self,
        double_integrator: ScenarioFile,
        drds_result: SteeringResult,
        baseline_result: SteeringResult,
    ) -> None:
        scenario = double_integrator.scenario
        noise = NoiseModel(kind=NoiseKind.STUDENT_T, base=scenario.sigma_w, seed=0, dof=3.0)

        robust, baseline = _reports(double_integrator, noise, drds_result, baseline_result)

        assert robust.violation is not None
        assert baseline.violation is not None
        assert robust.violation.joint <= 0.02
        assert robust.violation.joint < baseline.violation.joint
