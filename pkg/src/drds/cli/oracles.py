"""Self-check oracles run by ``drds check``.

Each oracle recomputes a quantity independently (closed form, brute force or
step-wise recursion) and compares it with the library result.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
import scipy.optimize
import structlog

from drds.ambiguity.distance import gaussian_w2, gelbrich_distance
from drds.ambiguity.radius import cvar_coeff, maximal_scale, worstcase_cvar
from drds.ambiguity.types import GaussianMoments
from drds.conic import AffineExpr, ConeKind, ConicProblem, SolverSettings, VarShape, solve
from drds.conic.backend.registry import BackendRegistry
from drds.errors import DrdsError
from drds.noise.dryden import dryden_autocovariance, turbulence_intensities
from drds.noise.types import DrydenChannel, DrydenParams
from drds.steering.cost import worstcase_quadratic_value
from drds.system.augmented import build_augmented
from drds.system.model import LtiModel, rollout
from drds.system.policy import gain_k_to_l, gain_l_to_k
from drds.types import FloatArray

_logger = structlog.get_logger()

ORACLE_SEED = 20240611


@dataclass
class OracleResult:
    name: str
    passed: bool
    error: float
    tolerance: float
    detail: str = ""


type Oracle = Callable[[], OracleResult]


def _result(name: str, error: float, tolerance: float, detail: str = "") -> OracleResult:
    return OracleResult(
        name=name,
        passed=bool(np.isfinite(error) and error <= tolerance),
        error=float(error),
        tolerance=tolerance,
        detail=detail,
    )


def double_integrator(horizon: int, dt: float = 0.3) -> LtiModel:
    """Planar double integrator with state (x, y, vx, vy) and acceleration input."""
    I2 = np.eye(2)
    A = np.block([[I2, dt * I2], [np.zeros((2, 2)), I2]])
    B = np.vstack([0.5 * dt**2 * I2, dt * I2])
    return LtiModel.time_invariant(A, B, np.eye(4), horizon)


# -- Brute force -----------------------------------------------------------------


def _sphere_points(count: int, dim: int, rng: np.random.Generator) -> FloatArray:
    points = rng.standard_normal((count, dim))
    out: FloatArray = points / np.linalg.norm(points, axis=1, keepdims=True)
    return out


def _symmetric_from(params: FloatArray, n: int) -> FloatArray:
    S = np.zeros((n, n))
    S[np.triu_indices(n)] = params
    return S + np.triu(S, 1).T


def brute_force_worstcase_quadratic(
    Xi: FloatArray, Sigma: FloatArray, epsilon: float, directions: int = 4000, seed: int = 0
) -> float:
    """Lower bound on the worst-case E[wᵀΞw] by searching ball-boundary covariances.

    Candidates are (I + tΔ)Σ(I + tΔ) for symmetric Δ, pushed to the ball edge
    t = ε/√tr(ΔΣΔ); the transport cost of x ↦ (I + tΔ)x bounds their distance.
    """
    n = Xi.shape[0]
    rng = np.random.default_rng(seed)

    def value(params: FloatArray) -> float:
        Delta = _symmetric_from(params, n)
        spread = float(np.trace(Delta @ Sigma @ Delta))
        if spread <= 0.0:
            return -math.inf
        A = np.eye(n) + epsilon / math.sqrt(spread) * Delta
        return float(np.trace(Xi @ A @ Sigma @ A))

    candidates = _sphere_points(directions, n * (n + 1) // 2, rng)
    values = np.array([value(c) for c in candidates])
    best = candidates[int(np.argmax(values))]
    polished = scipy.optimize.minimize(
        lambda p: -value(p),
        best,
        method="Nelder-Mead",
        options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20_000},
    )
    return max(float(values.max()), -float(polished.fun))


def moment_cvar_bound(mean: FloatArray, std: FloatArray, gamma: float) -> FloatArray:
    """Largest CVaR_γ over all laws with the given mean and standard deviation.

    Minimizes t + E[(ℓ − t)⁺]/γ over t by bisection on its derivative, with the
    expectation replaced by its tight moment bound ((m − t) + √((m − t)² + s²))/2.
    """
    m, s = np.broadcast_arrays(np.asarray(mean, dtype=float), np.asarray(std, dtype=float))
    width = 1e3 * (s + np.abs(m) + 1.0)
    lo, hi = m - width, m + width

    def slope(t: FloatArray) -> FloatArray:
        gap = m - t
        r = np.hypot(gap, s)
        ratio = np.divide(gap, r, out=np.zeros_like(r), where=r > 0)
        out: FloatArray = 1.0 - (1.0 + ratio) / (2.0 * gamma)
        return out

    for _ in range(100):
        mid = 0.5 * (lo + hi)
        rising = slope(mid) > 0
        hi = np.where(rising, mid, hi)
        lo = np.where(rising, lo, mid)
    t = 0.5 * (lo + hi)
    gap = m - t
    bound: FloatArray = t + (gap + np.hypot(gap, s)) / (2.0 * gamma)
    return bound


def brute_force_drcvar(
    alpha: float,
    beta: float,
    mean: float,
    std: float,
    epsilon: float,
    gamma: float,
    grid: int = 400,
) -> float:
    """Grid search of the worst-case CVaR of αx + β over the scalar Gelbrich ball.

    Members (μ, σ) with (μ − μ̂)² + (σ − σ̂)² ≤ ε² and σ ≥ 0 sweep a polar grid.
    Each member's CVaR comes from :func:`moment_cvar_bound` on the loss moments.
    """
    angles = np.linspace(0.0, 2.0 * np.pi, grid, endpoint=False)
    radii = np.linspace(0.0, epsilon, grid)
    r, theta = np.meshgrid(radii, angles)
    mu = mean + r * np.sin(theta)
    sigma = std + r * np.cos(theta)
    inside = sigma >= 0.0
    values = moment_cvar_bound(beta + alpha * mu[inside], abs(alpha) * sigma[inside], gamma)
    return float(values.max())


# -- Oracles -----------------------------------------------------------------------


def scalar_worstcase_cost() -> OracleResult:
    xi, std, eps = 2.0, 1.5, 0.5
    value = worstcase_quadratic_value(np.array([[xi]]), np.array([[std**2]]), eps)
    expected = xi * (std + eps) ** 2
    return _result("scalar_worstcase_cost", abs(value - expected) / expected, 1e-6)


def worstcase_quadratic_grid(instances: int = 50) -> OracleResult:
    rng = np.random.default_rng(ORACLE_SEED)
    worst = 0.0
    for i in range(instances):
        n = 1 if i % 2 == 0 else 2
        G = rng.standard_normal((n, n))
        H = rng.standard_normal((n, n))
        Xi = G @ G.T
        Sigma = H @ H.T + 0.5 * np.eye(n)
        eps = float(rng.uniform(0.1, 1.0))
        exact = worstcase_quadratic_value(Xi, Sigma, eps)
        brute = brute_force_worstcase_quadratic(Xi, Sigma, eps, seed=i)
        worst = max(worst, abs(exact - brute) / max(abs(exact), 1e-12))
    return _result("worstcase_quadratic_grid", worst, 1e-3, f"{instances} instances")


def cvar_coefficient() -> OracleResult:
    return _result("cvar_coefficient", abs(cvar_coeff(0.05) - math.sqrt(19.0)), 1e-12)


def drcvar_closed_form(instances: int = 20) -> OracleResult:
    rng = np.random.default_rng(ORACLE_SEED + 1)
    worst = 0.0
    for _ in range(instances):
        alpha = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 2.0))
        beta, mean = rng.uniform(-1.0, 1.0, size=2)
        std = float(rng.uniform(0.5, 2.0))
        eps = float(rng.uniform(0.1, 1.0))
        gamma = float(rng.uniform(0.05, 0.5))
        centre = GaussianMoments(mean=np.array([mean]), cov=np.array([[std**2]]))
        exact = worstcase_cvar(np.array([alpha]), float(beta), centre, eps, gamma)
        brute = brute_force_drcvar(alpha, float(beta), float(mean), std, eps, gamma)
        worst = max(worst, abs(exact - brute))
    return _result("drcvar_closed_form", worst, 1e-3, f"{instances} instances")


def gelbrich_identities(pairs: int = 100) -> OracleResult:
    rng = np.random.default_rng(ORACLE_SEED + 2)
    errors = [
        abs(
            gelbrich_distance(
                GaussianMoments.zero_mean(np.array([[1.0]])),
                GaussianMoments.zero_mean(np.array([[4.0]])),
            )
            - 1.0
        )
    ]
    for _ in range(pairs):
        n = int(rng.integers(1, 5))
        mean_p, mean_q = rng.standard_normal(n), rng.standard_normal(n)
        var_p, var_q = rng.uniform(0.1, 3.0, n), rng.uniform(0.1, 3.0, n)
        p = GaussianMoments(mean=mean_p, cov=np.diag(var_p))
        q = GaussianMoments(mean=mean_q, cov=np.diag(var_q))
        # Commuting covariances have the closed form Σ(√a − √b)².
        expected = math.sqrt(
            float(np.sum((mean_p - mean_q) ** 2) + np.sum((np.sqrt(var_p) - np.sqrt(var_q)) ** 2))
        )
        errors.append(abs(gelbrich_distance(p, q) - expected))
        errors.append(abs(gelbrich_distance(p, q) - gaussian_w2(q, p)))
    return _result("gelbrich_identities", max(errors), 1e-10)


def maximal_scale_radius() -> OracleResult:
    Sigma_f = (0.1 / 3.0) ** 2 * np.eye(4)
    eta = maximal_scale(Sigma_f, 0.05)
    distance = gelbrich_distance(
        GaussianMoments.zero_mean(Sigma_f), GaussianMoments.zero_mean(eta**2 * Sigma_f)
    )
    error = max(abs(eta - 1.75), abs(distance - 0.05))
    return _result("maximal_scale", error, 1e-10, f"eta={eta:.12g}")


def gain_round_trip() -> OracleResult:
    rng = np.random.default_rng(ORACLE_SEED + 3)
    aug = build_augmented(double_integrator(5))
    L = rng.standard_normal((aug.control_dim, aug.state_dim))
    for k in range(aug.horizon):
        L[k * aug.m : (k + 1) * aug.m, (k + 1) * aug.n :] = 0.0
    back = gain_k_to_l(gain_l_to_k(L, aug), aug)
    return _result("gain_round_trip", float(np.abs(back - L).max()), 1e-9)


def stacked_recursion() -> OracleResult:
    rng = np.random.default_rng(ORACLE_SEED + 4)
    model = double_integrator(20)
    aug = build_augmented(model)
    x0 = rng.standard_normal(model.n)
    u = rng.standard_normal(aug.control_dim)
    w = rng.standard_normal(aug.noise_dim)
    stacked = aug.calA @ x0 + aug.calB @ u + aug.calD @ w
    stepwise = rollout(model, x0, u, w).ravel()
    return _result("stacked_recursion", float(np.abs(stacked - stepwise).max()), 1e-12)


def dryden_normalization() -> OracleResult:
    worst = 0.0
    for V0 in (1.0, 5.0, 20.0, 50.0):
        params = DrydenParams(V0=V0, z=10.0, b=0.34, dt=0.5)
        sigma = turbulence_intensities(params)
        for channel in (DrydenChannel.U, DrydenChannel.V, DrydenChannel.W):
            key = channel.value[0]
            variance = float(dryden_autocovariance(channel, np.array([0.0]), params)[0])
            worst = max(worst, abs(variance - sigma[key] ** 2) / sigma[key] ** 2)
    return _result("dryden_normalization", worst, 2e-2)


def _scalar_problem(name: str) -> tuple[ConicProblem, AffineExpr]:
    problem = ConicProblem(name=name)
    t = AffineExpr.of(problem.add_variable(VarShape.scalar(), "t"))
    problem.set_objective(t)
    return problem, t


def conic_solves(registry: BackendRegistry | None = None) -> OracleResult:
    """Three tiny programs with known optima: a bound, a norm epigraph and a 2×2 LMI."""
    lp, t = _scalar_problem("oracle_lp")
    lp.add_cone(ConeKind.NONNEG, t - 1.0, label="bound")

    soc, t = _scalar_problem("oracle_soc")
    soc.add_cone(ConeKind.SECOND_ORDER, AffineExpr.vstack([t, np.array([[3.0], [4.0]])]), "norm")

    psd, t = _scalar_problem("oracle_psd")
    ones = np.ones((1, 1))
    psd.add_cone(ConeKind.PSD, AffineExpr.bmat([[t, ones], [ones, 4.0 * ones]]).svec(), "lmi")

    errors = []
    try:
        for problem, expected in ((lp, 1.0), (soc, 5.0), (psd, 0.25)):
            solution = solve(problem, SolverSettings(), registry)
            if not solution.is_optimal:
                return _result("conic_solves", math.inf, 1e-6, f"{problem.name}: {solution.status}")
            errors.append(abs(solution.objective - expected))
    except (DrdsError, ValueError) as e:
        return _result("conic_solves", math.inf, 1e-6, str(e))
    return _result("conic_solves", max(errors), 1e-6)


ORACLES: dict[str, Oracle] = {
    "scalar_worstcase_cost": scalar_worstcase_cost,
    "worstcase_quadratic_grid": worstcase_quadratic_grid,
    "cvar_coefficient": cvar_coefficient,
    "drcvar_closed_form": drcvar_closed_form,
    "gelbrich_identities": gelbrich_identities,
    "maximal_scale": maximal_scale_radius,
    "gain_round_trip": gain_round_trip,
    "stacked_recursion": stacked_recursion,
    "dryden_normalization": dryden_normalization,
    "conic_solves": conic_solves,
}


def run_oracles(names: list[str] | None = None) -> list[OracleResult]:
    results = []
    for name in names or list(ORACLES):
        try:
            result = ORACLES[name]()
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
            result = OracleResult(name, False, math.inf, 0.0, f"raised {e!r}")
        results.append(result)
        _logger.info(
            "oracle_checked",
            oracle=name,
            passed=result.passed,
            error=result.error,
            tolerance=result.tolerance,
        )
    return results
