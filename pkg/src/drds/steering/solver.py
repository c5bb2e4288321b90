from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import structlog

from drds.ambiguity.radius import cvar_coeff, pushforward_radius
from drds.ambiguity.types import RadiusMode
from drds.conic import (
    AffineExpr,
    ConeBlock,
    ConicProblem,
    Solution,
    SolverSettings,
    VarHandle,
    solve,
)
from drds.conic.backend.registry import BackendRegistry
from drds.errors import SteeringError
from drds.steering.constraints import (
    assemble_chance_constraints,
    assemble_drcvar,
    assemble_terminal,
)
from drds.steering.cost import (
    CostTerms,
    assemble_dr_cost,
    assemble_nominal_cost,
    worstcase_quadratic_value,
    xi_matrix,
)
from drds.steering.types import PolicyEvaluation, Scenario, SteeringDiagnostics, SteeringResult
from drds.steering.variables import PolicyVariables, declare_policy_variables
from drds.system.augmented import error_map, nominal_trajectory
from drds.system.policy import Policy
from drds.util.linalg import max_eig, sigma_max, symmetrize

_logger = structlog.get_logger()


@dataclass
class SteeringProgram:
    problem: ConicProblem
    variables: PolicyVariables
    cost: CostTerms
    rho: dict[int, VarHandle] = field(default_factory=dict)


def build_drds_program(
    scenario: Scenario, mode: RadiusMode = RadiusMode.PAPER_EXACT
) -> SteeringProgram:
    problem = ConicProblem(name=f"drds:{scenario.name}" if scenario.name else "drds")
    variables = declare_policy_variables(problem, scenario)
    assemble_terminal(scenario, problem, variables, mode=mode)
    rho = assemble_drcvar(scenario, problem, variables, mode=mode)
    cost = assemble_dr_cost(scenario, problem, variables)
    problem.set_objective(cost.objective)
    return SteeringProgram(problem=problem, variables=variables, cost=cost, rho=rho)


def build_baseline_program(scenario: Scenario) -> SteeringProgram:
    problem = ConicProblem(name=f"baseline:{scenario.name}" if scenario.name else "baseline")
    variables = declare_policy_variables(problem, scenario)
    assemble_terminal(scenario, problem, variables, robust=False)
    assemble_chance_constraints(scenario, problem, variables)
    cost = assemble_nominal_cost(scenario, problem, variables)
    problem.set_objective(cost.objective)
    return SteeringProgram(problem=problem, variables=variables, cost=cost)


def _recover_policy(scenario: Scenario, program: SteeringProgram, solution: Solution) -> Policy:
    x = solution.primal
    v = program.variables.v.take(x)
    L = program.variables.L.value(x)
    try:
        return Policy.from_disturbance_gain(v, L, scenario.aug)
    except ValueError as e:
        raise SteeringError("recovery", solution.status, str(e)) from e


def _block_family(block: ConeBlock) -> str:
    return block.label.rstrip("0123456789_") or block.kind.value


def _failure_detail(problem: ConicProblem, solution: Solution) -> str:
    """Solver message, the worst-violated blocks at the returned point, and the block census."""
    parts = [solution.message] if solution.message else []
    x = solution.primal
    if x.size == problem.num_vars and bool(np.all(np.isfinite(x))):
        violations = problem.cone_violation(x)
        worst = sorted(range(len(violations)), key=violations.__getitem__, reverse=True)[:3]
        named = [
            f"{problem.blocks[i].label or problem.blocks[i].kind.value}={violations[i]:.1e}"
            for i in worst
            if violations[i] > 0.0
        ]
        if named:
            parts.append("worst blocks " + ", ".join(named))
    census = Counter(_block_family(block) for block in problem.blocks)
    parts.append("blocks " + ", ".join(f"{name} x{count}" for name, count in census.items()))
    return "; ".join(parts)


def _solve_program(
    scenario: Scenario,
    program: SteeringProgram,
    settings: SolverSettings | None,
    registry: BackendRegistry | None,
) -> tuple[Solution, Policy]:
    solution = solve(program.problem, settings, registry)
    if not solution.is_optimal:
        detail = _failure_detail(program.problem, solution)
        _logger.warning(
            "steering_solve_failed",
            problem=program.problem.name,
            status=solution.status.value,
            detail=detail,
        )
        raise SteeringError("solve", solution.status, detail)
    return solution, _recover_policy(scenario, program, solution)


def solve_drds(
    scenario: Scenario,
    settings: SolverSettings | None = None,
    mode: RadiusMode = RadiusMode.PAPER_EXACT,
    registry: BackendRegistry | None = None,
) -> SteeringResult:
    program = build_drds_program(scenario, mode)
    solution, policy = _solve_program(scenario, program, settings, registry)
    x = solution.primal

    cost = program.cost
    lam = float(x[cost.lam.offset]) if cost.lam is not None else None
    trace_gamma = (
        float(AffineExpr.of(cost.Gamma).trace().value(x)[0, 0]) if cost.Gamma is not None else None
    )
    rho = {k: float(x[handle.offset]) for k, handle in program.rho.items()}

    evaluation = evaluate_policy(scenario, policy, mode)
    _logger.info(
        "steering_solved",
        scenario=scenario.name,
        objective=solution.objective,
        worstcase_cost=evaluation.worstcase_cost,
        terminal_radius=evaluation.terminal_radius,
        max_drcvar_lhs=evaluation.max_drcvar_lhs,
    )
    diagnostics = SteeringDiagnostics(
        objective=solution.objective,
        status=solution.status.value,
        backend=solution.backend,
        solve_time=solution.solve_time,
        evaluation=evaluation,
        lam=lam,
        trace_gamma=trace_gamma,
        rho=rho,
    )
    return SteeringResult(policy=policy, diagnostics=diagnostics)


def solve_baseline_cs(
    scenario: Scenario,
    settings: SolverSettings | None = None,
    registry: BackendRegistry | None = None,
) -> SteeringResult:
    """Gaussian chance-constrained covariance steering; the radius ε plays no role."""
    program = build_baseline_program(scenario)
    solution, policy = _solve_program(scenario, program, settings, registry)
    evaluation = evaluate_policy(scenario, policy, RadiusMode.PAPER_EXACT)
    _logger.info(
        "baseline_solved",
        scenario=scenario.name,
        objective=solution.objective,
        nominal_cost=evaluation.nominal_cost,
    )
    diagnostics = SteeringDiagnostics(
        objective=solution.objective,
        status=solution.status.value,
        backend=solution.backend,
        solve_time=solution.solve_time,
        evaluation=evaluation,
        baseline=True,
    )
    return SteeringResult(policy=policy, diagnostics=diagnostics)


def evaluate_policy(
    scenario: Scenario,
    policy: Policy,
    mode: RadiusMode = RadiusMode.PAPER_EXACT,
) -> PolicyEvaluation:
    """Re-check a policy against the terminal and DR-CVaR conditions numerically."""
    aug = scenario.aug
    N = aug.horizon
    Sigma = scenario.sigma_w
    epsilon = scenario.epsilon

    x_bar = nominal_trajectory(policy.v, scenario.x0, aug)
    L_N = error_map(N, policy.L, aug)
    mean_error = float(np.abs(x_bar[aug.state_rows(N)] - scenario.terminal.mu_f).max())
    cov_excess = max_eig(symmetrize(L_N @ Sigma @ L_N.T) - scenario.terminal.Sigma_f)
    terminal_radius = pushforward_radius(L_N, epsilon, mode)

    drcvar: dict[tuple[int, int], float] = {}
    for j, halfspace in enumerate(scenario.halfspaces):
        norm_alpha = float(np.linalg.norm(halfspace.alpha))
        for k in halfspace.steps:
            Ltil = error_map(k, policy.L, aug)
            s = sigma_max(Ltil)
            rho = s if mode is RadiusMode.OPERATOR_NORM else s**2
            tau = cvar_coeff(halfspace.gamma_at(k))
            direction = Ltil.T @ halfspace.alpha
            spread = float(np.sqrt(max(float(direction @ Sigma @ direction), 0.0)))
            drcvar[(j, k)] = (
                halfspace.offset
                + float(halfspace.alpha @ x_bar[aug.state_rows(k)])
                + tau * spread
                + epsilon * rho * norm_alpha * float(np.sqrt(1.0 + tau**2))
            )

    Xi = xi_matrix(policy.L, aug, scenario.weights)
    control = scenario.weights.beta * float(
        np.linalg.norm(policy.v.reshape(N, aug.m), axis=1).sum()
    )
    return PolicyEvaluation(
        terminal_mean_error=mean_error,
        terminal_cov_excess=cov_excess,
        terminal_radius=terminal_radius,
        drcvar_lhs=drcvar,
        worstcase_cost=worstcase_quadratic_value(Xi, Sigma, epsilon) + control,
        nominal_cost=float(np.trace(Xi @ Sigma)) + control,
        mode=mode,
    )
