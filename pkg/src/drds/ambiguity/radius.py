from __future__ import annotations

import numpy as np
import structlog

from drds.ambiguity.types import AmbiguitySpec, CostMetric, GaussianMoments, RadiusMode
from drds.system.augmented import AugmentedSystem, error_map, nominal_trajectory
from drds.system.policy import Policy
from drds.types import FloatArray
from drds.util.linalg import sigma_max, symmetrize

_logger = structlog.get_logger()


def cvar_coeff(gamma: float) -> float:
    """Standard risk coefficient τ = √((1−γ)/γ)."""
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"risk level gamma must lie in (0, 1), got {gamma}")
    return float(np.sqrt((1.0 - gamma) / gamma))


def maximal_scale(cov: FloatArray, radius: float) -> float:
    """η such that N(0, η²Σ) sits exactly *radius* away from N(0, Σ)."""
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    trace = float(np.trace(np.atleast_2d(cov)))
    if trace <= 0.0:
        raise ValueError("covariance must have positive trace")
    return 1.0 + radius / float(np.sqrt(trace))


def pushforward_radius(
    Ltil: FloatArray, epsilon: float, mode: RadiusMode = RadiusMode.PAPER_EXACT
) -> float:
    """Radius of a ball mapped through Ltil; σ_max² scaling unless *mode* asks for σ_max."""
    if epsilon < 0:
        raise ValueError(f"radius must be >= 0, got {epsilon}")
    s = sigma_max(np.atleast_2d(np.asarray(Ltil, dtype=float)))
    if mode is RadiusMode.OPERATOR_NORM:
        _logger.info("radius_mode_selected", mode=mode.value, sigma_max=s)
        return epsilon * s
    return epsilon * s**2


def iid_sequence_radius(epsilon_single: float, horizon: int) -> float:
    """Radius for the stacked noise sequence built from N per-step balls."""
    if horizon < 1:
        raise ValueError("horizon N must be >= 1")
    if epsilon_single < 0:
        raise ValueError(f"radius must be >= 0, got {epsilon_single}")
    return horizon * epsilon_single


def state_ambiguity(
    k: int,
    policy: Policy,
    aug: AugmentedSystem,
    noise: AmbiguitySpec,
    x0: FloatArray,
) -> AmbiguitySpec:
    """Ambiguity set of the step-k state induced by the noise ball under *policy*."""
    if float(np.abs(noise.center.mean).max(initial=0.0)) > 0.0:
        raise ValueError("noise centre must be zero-mean")
    Ltil = error_map(k, policy.L, aug)
    mean = nominal_trajectory(policy.v, x0, aug)[aug.state_rows(k)]
    cov = symmetrize(Ltil @ noise.center.cov @ Ltil.T)
    return AmbiguitySpec(
        center=GaussianMoments(mean=mean, cov=cov),
        radius=noise.radius,
        metric=CostMetric.PSEUDO_INVERSE,
        transform=Ltil,
    )


def worstcase_cvar(
    alpha: FloatArray,
    beta: float,
    center: GaussianMoments,
    radius: float,
    gamma: float,
) -> float:
    """Worst-case CVaR of αᵀx + β over the Gelbrich ball around *center*."""
    alpha = np.asarray(alpha, dtype=float).ravel()
    tau = cvar_coeff(gamma)
    spread = float(np.sqrt(max(float(alpha @ center.cov @ alpha), 0.0)))
    return (
        beta
        + float(alpha @ center.mean)
        + tau * spread
        + radius * float(np.sqrt(1.0 + tau**2)) * float(np.linalg.norm(alpha))
    )
