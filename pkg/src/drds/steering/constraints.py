from __future__ import annotations

import numpy as np
import structlog
from scipy.stats import norm

from drds.ambiguity.radius import cvar_coeff
from drds.ambiguity.types import RadiusMode
from drds.conic import AffineExpr, ConeKind, ConicProblem, SolveStatus, VarHandle, VarShape
from drds.errors import SteeringError
from drds.steering.types import Halfspace, Scenario
from drds.steering.variables import PolicyVariables

_logger = structlog.get_logger()

INITIAL_STEP_TOL = 1e-9


def _check_initial_step(scenario: Scenario, j: int, halfspace: Halfspace) -> None:
    # x₀ is deterministic, so the constraint at step 0 is a plain inequality.
    value = halfspace.offset + float(halfspace.alpha @ scenario.x0)
    if value > INITIAL_STEP_TOL:
        raise SteeringError(
            "drcvar",
            SolveStatus.INFEASIBLE,
            f"halfspace {j} is violated by the initial state ({value:.3e} > 0)",
        )


def _margin(
    scenario: Scenario, variables: PolicyVariables, halfspace: Halfspace, k: int
) -> tuple[AffineExpr, AffineExpr]:
    """αᵀx̄_k + offset (1×1) and (E_k G Σ_w^½)ᵀα (Nd×1)."""
    alpha_row = halfspace.alpha[None, :]
    mean = variables.nominal_state(scenario, k).lmul(alpha_row) + halfspace.offset
    spread = variables.error_factor(scenario, k).lmul(alpha_row).flatten()
    return mean, spread


def _sigma_bound(
    scenario: Scenario,
    problem: ConicProblem,
    variables: PolicyVariables,
    k: int,
    mode: RadiusMode,
) -> VarHandle:
    """ρ_k bounding σ_max²(L̃_k), or σ_max(L̃_k) in operator-norm mode."""
    aug = scenario.aug
    rho_h = problem.add_variable(VarShape.scalar(), f"rho_{k}")
    rho = AffineExpr.of(rho_h)
    # Disturbances from step k onwards do not reach x_k.
    Ltil = variables.error_gain(scenario, k, columns=k * aug.d)
    width = Ltil.shape[1]
    if mode is RadiusMode.OPERATOR_NORM:
        corner = rho.scale_matrix(np.eye(aug.n))
    else:
        corner = AffineExpr.constant(np.eye(aug.n))
    lmi = AffineExpr.bmat([[corner, Ltil], [Ltil.T, rho.scale_matrix(np.eye(width))]])
    problem.add_cone(ConeKind.PSD, lmi.svec(), label=f"sigma_bound_{k}")
    return rho_h


def assemble_drcvar(
    scenario: Scenario,
    problem: ConicProblem,
    variables: PolicyVariables,
    mode: RadiusMode = RadiusMode.PAPER_EXACT,
) -> dict[int, VarHandle]:
    """One second-order block per (halfspace, active step); one ρ_k block per step."""
    epsilon = scenario.epsilon
    rho: dict[int, VarHandle] = {}
    if epsilon > 0.0:
        for k in scenario.active_steps():
            if k > 0:
                rho[k] = _sigma_bound(scenario, problem, variables, k, mode)
    else:
        _logger.info("drcvar_degenerate", reason="zero_radius", omitted="sigma_bounds")

    for j, halfspace in enumerate(scenario.halfspaces):
        norm_alpha = float(np.linalg.norm(halfspace.alpha))
        for k in halfspace.steps:
            if k == 0:
                _check_initial_step(scenario, j, halfspace)
                continue
            tau = cvar_coeff(halfspace.gamma_at(k))
            mean, spread = _margin(scenario, variables, halfspace, k)
            if k in rho:
                radius_term = float(epsilon * norm_alpha * np.sqrt(1.0 + tau**2))
                mean = mean + AffineExpr.of(rho[k]) * radius_term
            rows = AffineExpr.vstack([mean * (-1.0 / tau), spread])
            problem.add_cone(ConeKind.SECOND_ORDER, rows, label=f"drcvar_{j}_{k}")
    return rho


def assemble_chance_constraints(
    scenario: Scenario, problem: ConicProblem, variables: PolicyVariables
) -> None:
    """Gaussian chance constraints on the nominal trajectory.

    αᵀx̄_k + offset + Φ⁻¹(1−γ)‖(E_kGΣ_w^½)ᵀα‖ ≤ 0
    """
    for j, halfspace in enumerate(scenario.halfspaces):
        for k in halfspace.steps:
            if k == 0:
                _check_initial_step(scenario, j, halfspace)
                continue
            gamma = halfspace.gamma_at(k)
            if gamma > 0.5:
                raise ValueError(f"chance constraints need gamma <= 0.5, got {gamma}")
            # Φ⁻¹(1−γ) is 0 at γ = 0.5, where the cone reduces to the nominal halfspace
            quantile = float(norm.ppf(1.0 - gamma))
            mean, spread = _margin(scenario, variables, halfspace, k)
            rows = AffineExpr.vstack([mean * -1.0, spread * quantile])
            problem.add_cone(ConeKind.SECOND_ORDER, rows, label=f"chance_{j}_{k}")


def assemble_terminal(
    scenario: Scenario,
    problem: ConicProblem,
    variables: PolicyVariables,
    mode: RadiusMode = RadiusMode.PAPER_EXACT,
    robust: bool = True,
) -> None:
    """Terminal mean equality, covariance bound and, when robust, the radius bound."""
    aug = scenario.aug
    N = aug.horizon
    target = scenario.terminal
    epsilon = scenario.epsilon
    with_radius = robust and epsilon > 0.0
    if with_radius and target.delta <= 0.0:
        raise SteeringError(
            "terminal",
            SolveStatus.INFEASIBLE,
            "delta must be > 0 when epsilon > 0",
        )

    mean = variables.nominal_state(scenario, N) - target.mu_f[:, None]
    problem.add_cone(ConeKind.ZERO, mean, label="terminal_mean")

    factor = variables.error_factor(scenario, N)
    cov = AffineExpr.bmat([[target.Sigma_f, factor], [factor.T, np.eye(aug.noise_dim)]])
    problem.add_cone(ConeKind.PSD, cov.svec(), label="terminal_covariance")

    if not with_radius:
        return
    ratio = target.delta / epsilon
    Ltil = variables.error_gain(scenario, N)
    corner = np.eye(aug.n) * (ratio if mode is RadiusMode.OPERATOR_NORM else 1.0)
    radius = AffineExpr.bmat([[corner, Ltil], [Ltil.T, ratio * np.eye(aug.noise_dim)]])
    problem.add_cone(ConeKind.PSD, radius.svec(), label="terminal_radius")
