"""Worst-case and nominal quadratic cost: conic assembly and numerical evaluation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import structlog
from scipy.optimize import minimize_scalar

from drds.conic import AffineExpr, ConeKind, ConicProblem, VarHandle, VarShape
from drds.steering.types import CostWeights, DrCostBlocks, Scenario
from drds.steering.variables import PolicyVariables
from drds.system.augmented import AugmentedSystem, closed_loop_map
from drds.types import FloatArray
from drds.util.linalg import require_psd, sqrtm_psd, symmetrize

_logger = structlog.get_logger()

# Search window for λ − λ_max(Ξ), relative to λ_max(Ξ), on a log scale.
_GAP_RANGE = (1e-10, 1e10)
_GRID_POINTS = 121


@dataclass
class CostTerms:
    objective: AffineExpr
    t: VarHandle
    lam: VarHandle | None = None
    Gamma: VarHandle | None = None
    Psi: VarHandle | None = None


def dr_cost_blocks(scenario: Scenario) -> DrCostBlocks:
    aug = scenario.aug
    calQ = scenario.weights.stacked_q()
    calR = scenario.weights.stacked_r()
    Rtilde = symmetrize(aug.calB.T @ calQ @ aug.calB + calR)
    try:
        factor = scipy.linalg.cho_factor(Rtilde)
    except np.linalg.LinAlgError as e:
        raise ValueError("BᵀQB + R must be positive definite") from e
    Rtilde_inv = symmetrize(scipy.linalg.cho_solve(factor, np.eye(Rtilde.shape[0])))
    return DrCostBlocks(
        calQ=calQ,
        calR=calR,
        Rtilde=Rtilde,
        Rtilde_inv=Rtilde_inv,
        sqrt_sigma_w=sqrtm_psd(scenario.sigma_w),
    )


def xi_matrix(L: FloatArray, aug: AugmentedSystem, weights: CostWeights) -> FloatArray:
    """Ξ(L) = 𝒟ᵀ((I+ℬL)ᵀ𝒬(I+ℬL) + LᵀℛL)𝒟."""
    G = closed_loop_map(L, aug)
    LD = L @ aug.calD
    return symmetrize(G.T @ weights.stacked_q() @ G + LD.T @ weights.stacked_r() @ LD)


# -- Conic assembly ---------------------------------------------------------


def _control_epigraphs(
    scenario: Scenario, problem: ConicProblem, variables: PolicyVariables
) -> tuple[VarHandle, AffineExpr]:
    aug = scenario.aug
    t = problem.add_variable(VarShape.vector(aug.horizon), "t")
    t_expr = AffineExpr.of(t)
    v_expr = variables.v_expr
    for k in range(aug.horizon):
        rows = AffineExpr.vstack([t_expr.block([k], [0]), v_expr.block(aug.control_rows(k), [0])])
        problem.add_cone(ConeKind.SECOND_ORDER, rows, label=f"control_norm_{k}")
    return t, t_expr.sum() * scenario.weights.beta


def _frobenius_epigraph(problem: ConicProblem, X: AffineExpr, name: str) -> AffineExpr:
    """Scalar s with s ≥ ‖X‖²_F, as the cone ‖(2X, s − 1)‖ ≤ s + 1."""
    s = AffineExpr.of(problem.add_variable(VarShape.scalar(), name))
    rows = AffineExpr.vstack([s + 1.0, s - 1.0, X.flatten() * 2.0])
    problem.add_cone(ConeKind.SECOND_ORDER, rows, label=name)
    return s


def assemble_nominal_cost(
    scenario: Scenario, problem: ConicProblem, variables: PolicyVariables
) -> CostTerms:
    """β Σ‖v_k‖ + tr[Σ_w^½ Ξ(L) Σ_w^½] through Frobenius-norm epigraphs."""
    aug = scenario.aug
    Q_half = sqrtm_psd(scenario.weights.stacked_q())
    R_half = sqrtm_psd(scenario.weights.stacked_r())
    S = variables.sqrt_sigma_w

    state_factor = variables.LDS.lmul(Q_half @ aug.calB) + Q_half @ aug.calD @ S
    input_factor = variables.LDS.lmul(R_half)
    s_state = _frobenius_epigraph(problem, state_factor, "nominal_state_cost")
    s_input = _frobenius_epigraph(problem, input_factor, "nominal_input_cost")

    t, control = _control_epigraphs(scenario, problem, variables)
    return CostTerms(objective=s_state + s_input + control, t=t)


def assemble_dr_cost(
    scenario: Scenario, problem: ConicProblem, variables: PolicyVariables
) -> CostTerms:
    """Worst-case expected quadratic cost over the noise ball, plus β Σ‖v_k‖."""
    epsilon = scenario.epsilon
    if epsilon == 0.0:
        # The dual program has no attained optimum at radius zero unless Ξ = 0.
        _logger.info("dr_cost_degenerate", reason="zero_radius", assembled="nominal_cost")
        return assemble_nominal_cost(scenario, problem, variables)

    aug = scenario.aug
    blocks = dr_cost_blocks(scenario)
    Nd = aug.noise_dim
    S = variables.sqrt_sigma_w

    lam_h = problem.add_variable(VarShape.scalar(), "lambda")
    gamma_h = problem.add_variable(VarShape.symmetric(Nd), "Gamma")
    psi_h = problem.add_variable(VarShape.symmetric(Nd), "Psi")
    lam, Gamma, Psi = AffineExpr.of(lam_h), AffineExpr.of(gamma_h), AffineExpr.of(psi_h)
    problem.add_cone(ConeKind.NONNEG, lam, label="lambda")

    lam_S = lam.scale_matrix(S)
    moment = AffineExpr.bmat([[Gamma, lam_S], [lam_S, Psi]])
    problem.add_cone(ConeKind.PSD, moment.svec(), label="dr_cost_moment")

    # 𝒟ᵀM̃𝒟 with M̃ = 𝒬 + 𝒬ℬL + (𝒬ℬL)ᵀ.
    cross = variables.LD.lmul(aug.calD.T @ blocks.calQ @ aug.calB)
    dmd = cross + cross.T + aug.calD.T @ blocks.calQ @ aug.calD
    gain = AffineExpr.bmat(
        [
            [lam.scale_matrix(np.eye(Nd)) - dmd - Psi, variables.LD.T],
            [variables.LD, blocks.Rtilde_inv],
        ]
    )
    problem.add_cone(ConeKind.PSD, gain.svec(), label="dr_cost_gain")

    t, control = _control_epigraphs(scenario, problem, variables)
    trace_sigma = float(np.trace(scenario.sigma_w))
    objective = lam * (epsilon**2 - trace_sigma) + Gamma.trace() + control
    return CostTerms(objective=objective, t=t, lam=lam_h, Gamma=gamma_h, Psi=psi_h)


# -- Numerical worst case ---------------------------------------------------


@dataclass
class _DualData:
    top: float
    eigvals: FloatArray
    weights: FloatArray
    linear: float

    def __call__(self, lam: float) -> float:
        return lam * self.linear + lam**2 * float(np.sum(self.weights / (lam - self.eigvals)))


def _dual_data(Xi: FloatArray, Sigma: FloatArray, epsilon: float, mean: FloatArray) -> _DualData:
    eigvals, U = np.linalg.eigh(Xi)
    weights = np.einsum("ij,jk,ki->i", U.T, Sigma, U) + (U.T @ mean) ** 2
    linear = epsilon**2 - float(np.trace(Sigma)) - float(mean @ mean)
    return _DualData(top=float(eigvals[-1]), eigvals=eigvals, weights=weights, linear=linear)


def _minimize_dual(data: _DualData) -> tuple[float, float]:
    """Minimise over λ > λ_max(Ξ) in θ = log(λ − λ_max); returns (λ*, value)."""

    def objective(theta: float) -> float:
        return data(data.top + float(np.exp(theta)))

    lo, hi = (np.log(bound * data.top) for bound in _GAP_RANGE)
    grid = np.linspace(lo, hi, _GRID_POINTS)
    values = np.array([objective(theta) for theta in grid])
    i = int(np.argmin(values))

    result = None
    if 0 < i < grid.size - 1:
        try:
            result = minimize_scalar(
                objective, bracket=(grid[i - 1], grid[i], grid[i + 1]), method="golden"
            )
        except ValueError:
            result = None
    if result is None:
        bounds = (grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)])
        result = minimize_scalar(objective, bounds=bounds, method="bounded")

    theta, value = float(result.x), float(result.fun)
    if values[i] < value:
        theta, value = float(grid[i]), float(values[i])
    return data.top + float(np.exp(theta)), value


def _validated(
    Xi: FloatArray, Sigma: FloatArray, epsilon: float, mean: FloatArray | None
) -> tuple[FloatArray, FloatArray, FloatArray]:
    Xi = require_psd(Xi, "Xi")
    Sigma = require_psd(Sigma, "Sigma_w")
    if Xi.shape != Sigma.shape:
        raise ValueError(f"Xi has shape {Xi.shape} but Sigma_w has shape {Sigma.shape}")
    if epsilon < 0:
        raise ValueError(f"radius must be >= 0, got {epsilon}")
    mu = np.zeros(Xi.shape[0]) if mean is None else np.asarray(mean, dtype=float).ravel()
    return Xi, Sigma, mu


def worstcase_quadratic_value(
    Xi: FloatArray,
    Sigma: FloatArray,
    epsilon: float,
    mean: FloatArray | None = None,
) -> float:
    """Supremum of E[wᵀΞw] over the Gelbrich ball of radius ε around (mean, Σ)."""
    Xi, Sigma, mu = _validated(Xi, Sigma, epsilon, mean)
    nominal = float(np.trace(Xi @ Sigma)) + float(mu @ Xi @ mu)
    if epsilon == 0.0:
        return nominal
    data = _dual_data(Xi, Sigma, epsilon, mu)
    if data.top <= 0.0:
        return 0.0
    _, value = _minimize_dual(data)
    return max(value, nominal)


def worstcase_moments(
    Xi: FloatArray,
    Sigma: FloatArray,
    epsilon: float,
    mean: FloatArray | None = None,
) -> tuple[FloatArray, FloatArray]:
    """Mean and covariance attaining the worst-case quadratic value."""
    Xi, Sigma, mu = _validated(Xi, Sigma, epsilon, mean)
    if epsilon == 0.0:
        return mu, Sigma
    data = _dual_data(Xi, Sigma, epsilon, mu)
    if data.top <= 0.0:
        return mu, Sigma
    lam, _ = _minimize_dual(data)
    A = lam * np.linalg.inv(lam * np.eye(Xi.shape[0]) - Xi)
    A = symmetrize(A)
    return A @ mu, symmetrize(A @ Sigma @ A)
