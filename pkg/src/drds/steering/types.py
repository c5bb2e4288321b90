from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from drds.ambiguity.types import AmbiguitySpec, GaussianMoments, RadiusMode
from drds.system.augmented import AugmentedSystem, build_augmented
from drds.system.model import LtiModel
from drds.system.policy import Policy
from drds.types import FloatArray
from drds.util.linalg import blkdiag, require_pd, require_psd


@dataclass(frozen=True, eq=False)
class CostWeights:
    """Per-step state and input weights for k = 0..N−1 and the nominal-control weight β."""

    Q: tuple[FloatArray, ...]
    R: tuple[FloatArray, ...]
    beta: float = 1.0

    def __post_init__(self) -> None:
        if len(self.Q) != len(self.R):
            raise ValueError(f"Q has {len(self.Q)} steps but R has {len(self.R)}")
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        object.__setattr__(self, "Q", tuple(require_psd(Q, "Q") for Q in self.Q))
        object.__setattr__(self, "R", tuple(require_pd(R, "R") for R in self.R))

    @classmethod
    def uniform(cls, Q: FloatArray, R: FloatArray, horizon: int, beta: float = 1.0) -> CostWeights:
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        R = np.atleast_2d(np.asarray(R, dtype=float))
        return cls(Q=(Q,) * horizon, R=(R,) * horizon, beta=beta)

    def stacked_q(self) -> FloatArray:
        """Block diagonal 𝒬 over the stacked state; the terminal block is zero."""
        n = self.Q[0].shape[0]
        return blkdiag(*self.Q, np.zeros((n, n)))

    def stacked_r(self) -> FloatArray:
        return blkdiag(*self.R)


@dataclass(frozen=True, eq=False)
class Halfspace:
    """Constraint αᵀx + offset ≤ 0 enforced in DR-CVaR at each active step."""

    alpha: FloatArray
    offset: float
    gamma: tuple[float, ...]
    steps: tuple[int, ...]

    def __post_init__(self) -> None:
        alpha = np.asarray(self.alpha, dtype=float).ravel()
        if not float(np.linalg.norm(alpha)) > 0:
            raise ValueError("alpha must be nonzero")
        if not self.steps:
            raise ValueError("halfspace needs at least one active step")
        if len(set(self.steps)) != len(self.steps):
            raise ValueError("active steps must be distinct")
        if len(self.gamma) != len(self.steps):
            raise ValueError(
                f"gamma has {len(self.gamma)} entries for {len(self.steps)} active steps"
            )
        for g in self.gamma:
            if not 0.0 < g < 1.0:
                raise ValueError(f"gamma must lie in (0, 1), got {g}")
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def uniform(
        cls, alpha: FloatArray, offset: float, gamma: float, steps: Sequence[int]
    ) -> Halfspace:
        steps = tuple(int(k) for k in steps)
        return cls(
            alpha=np.asarray(alpha, dtype=float),
            offset=float(offset),
            gamma=(float(gamma),) * len(steps),
            steps=steps,
        )

    def gamma_at(self, k: int) -> float:
        return self.gamma[self.steps.index(k)]


@dataclass(frozen=True, eq=False)
class TerminalTarget:
    mu_f: FloatArray
    Sigma_f: FloatArray
    delta: float

    def __post_init__(self) -> None:
        mu_f = np.asarray(self.mu_f, dtype=float).ravel()
        Sigma_f = require_pd(self.Sigma_f, "Sigma_f")
        if Sigma_f.shape != (mu_f.size, mu_f.size):
            raise ValueError("Sigma_f does not match mu_f")
        if not self.delta >= 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")
        object.__setattr__(self, "mu_f", mu_f)
        object.__setattr__(self, "Sigma_f", Sigma_f)


@dataclass(frozen=True, eq=False)
class Scenario:
    model: LtiModel
    x0: FloatArray
    weights: CostWeights
    halfspaces: tuple[Halfspace, ...]
    noise: AmbiguitySpec
    terminal: TerminalTarget
    name: str = ""

    def __post_init__(self) -> None:
        m = self.model
        x0 = np.asarray(self.x0, dtype=float).ravel()
        if x0.size != m.n:
            raise ValueError(f"x0 has length {x0.size}, expected {m.n}")
        object.__setattr__(self, "x0", x0)
        if len(self.weights.Q) != m.horizon:
            raise ValueError(
                f"cost weights cover {len(self.weights.Q)} steps, expected {m.horizon}"
            )
        if self.weights.Q[0].shape != (m.n, m.n) or self.weights.R[0].shape != (m.m, m.m):
            raise ValueError("cost weight dimensions do not match the model")
        if self.noise.center.dim != m.horizon * m.d:
            raise ValueError(
                f"noise covariance has dimension {self.noise.center.dim}, "
                f"expected N·d = {m.horizon * m.d}"
            )
        require_pd(self.noise.center.cov, "Sigma_w")
        if self.terminal.mu_f.size != m.n:
            raise ValueError("terminal target dimension does not match the model")
        for j, h in enumerate(self.halfspaces):
            if h.alpha.size != m.n:
                raise ValueError(f"halfspace {j}: alpha has length {h.alpha.size}, expected {m.n}")
            for k in h.steps:
                if not 0 <= k <= m.horizon:
                    raise ValueError(f"halfspace {j}: step {k} outside 0..{m.horizon}")

    @cached_property
    def aug(self) -> AugmentedSystem:
        return build_augmented(self.model)

    @property
    def sigma_w(self) -> FloatArray:
        return self.noise.center.cov

    @property
    def epsilon(self) -> float:
        return float(self.noise.radius)

    @property
    def horizon(self) -> int:
        return self.model.horizon

    def active_steps(self) -> list[int]:
        """Union of active steps over all halfspaces, ascending."""
        return sorted({k for h in self.halfspaces for k in h.steps})

    def with_epsilon(self, epsilon: float) -> Scenario:
        return replace(self, noise=replace(self.noise, radius=float(epsilon)))

    def with_delta(self, delta: float) -> Scenario:
        return replace(self, terminal=replace(self.terminal, delta=float(delta)))

    def noise_moments(self) -> GaussianMoments:
        return self.noise.center


@dataclass(frozen=True, eq=False)
class DrCostBlocks:
    """Constant matrices of the worst-case cost; M(L) and M̃(L) are built from them."""

    calQ: FloatArray
    calR: FloatArray
    Rtilde: FloatArray
    Rtilde_inv: FloatArray
    sqrt_sigma_w: FloatArray


@dataclass
class PolicyEvaluation:
    terminal_mean_error: float
    terminal_cov_excess: float
    terminal_radius: float
    drcvar_lhs: dict[tuple[int, int], float]
    worstcase_cost: float
    nominal_cost: float
    mode: RadiusMode

    @property
    def max_drcvar_lhs(self) -> float:
        return max(self.drcvar_lhs.values(), default=float("-inf"))


@dataclass
class SteeringDiagnostics:
    objective: float
    status: str
    backend: str
    solve_time: float
    evaluation: PolicyEvaluation
    lam: float | None = None
    trace_gamma: float | None = None
    rho: dict[int, float] = field(default_factory=dict)
    baseline: bool = False


@dataclass
class SteeringResult:
    policy: Policy
    diagnostics: SteeringDiagnostics
