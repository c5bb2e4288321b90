from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from drds.system.augmented import AugmentedSystem, closed_loop_map, nominal_trajectory
from drds.system.model import LtiModel
from drds.types import FloatArray

STRUCTURE_TOL = 1e-9


def _check_gain(G: FloatArray, aug: AugmentedSystem, name: str) -> FloatArray:
    G = np.asarray(G, dtype=float)
    expected = (aug.control_dim, aug.state_dim)
    if G.shape != expected:
        raise ValueError(f"{name} has shape {G.shape}, expected {expected}")
    scale = STRUCTURE_TOL * (1.0 + float(np.abs(G).max(initial=0.0)))
    m, n = aug.m, aug.n
    for k in range(aug.horizon):
        upper = G[k * m : (k + 1) * m, (k + 1) * n :]
        if upper.size and float(np.abs(upper).max()) > scale:
            raise ValueError(f"{name} is not block lower-triangular (block row {k})")
    return G


def gain_l_to_k(L: FloatArray, aug: AugmentedSystem) -> FloatArray:
    """K = L(I + ℬL)⁻¹ for a block lower-triangular disturbance-feedback gain."""
    L = _check_gain(L, aug, "L")
    # I + ℬL is unit lower-triangular, so the solve is exact back-substitution.
    M = np.eye(aug.state_dim) + aug.calB @ L
    K: FloatArray = scipy.linalg.solve_triangular(
        M.T, L.T, lower=False, unit_diagonal=True, check_finite=True
    ).T
    return K


def gain_k_to_l(K: FloatArray, aug: AugmentedSystem) -> FloatArray:
    """L = K(I − ℬK)⁻¹ for a block lower-triangular state-feedback gain."""
    K = _check_gain(K, aug, "K")
    M = np.eye(aug.state_dim) - aug.calB @ K
    L: FloatArray = scipy.linalg.solve_triangular(
        M.T, K.T, lower=False, unit_diagonal=True, check_finite=True
    ).T
    return L


@dataclass(frozen=True, eq=False)
class Policy:
    """Affine controller u = v + L𝒟w, equivalently u = v + K(x − x̄)."""

    v: FloatArray
    L: FloatArray
    K: FloatArray

    @classmethod
    def from_disturbance_gain(cls, v: FloatArray, L: FloatArray, aug: AugmentedSystem) -> Policy:
        v = np.asarray(v, dtype=float).ravel()
        if v.size != aug.control_dim:
            raise ValueError(f"v has length {v.size}, expected {aug.control_dim}")
        L = _check_gain(L, aug, "L").copy()
        terminal = L[:, aug.horizon * aug.n :]
        limit = STRUCTURE_TOL * (1.0 + float(np.abs(L).max()))
        if float(np.abs(terminal).max(initial=0.0)) > limit:
            raise ValueError("L must have a zero final block column")
        L[:, aug.horizon * aug.n :] = 0.0
        return cls(v=v, L=L, K=gain_l_to_k(L, aug))

    @classmethod
    def open_loop(cls, v: FloatArray, aug: AugmentedSystem) -> Policy:
        zero = np.zeros((aug.control_dim, aug.state_dim))
        return cls.from_disturbance_gain(v, zero, aug)


def apply_policy(
    policy: Policy, x0: FloatArray, w: FloatArray, aug: AugmentedSystem
) -> tuple[FloatArray, FloatArray]:
    """Closed-loop states ((N+1)×n) and controls (N×m) for one disturbance sample."""
    w = np.asarray(w, dtype=float).ravel()
    if w.size != aug.noise_dim:
        raise ValueError(f"w has length {w.size}, expected {aug.noise_dim}")
    x = nominal_trajectory(policy.v, x0, aug) + closed_loop_map(policy.L, aug) @ w
    u = policy.v + policy.L @ (aug.calD @ w)
    return x.reshape(aug.horizon + 1, aug.n), u.reshape(aug.horizon, aug.m)


def rollout_feedback(
    model: LtiModel, policy: Policy, x0: FloatArray, w: FloatArray
) -> tuple[FloatArray, FloatArray]:
    """Step-wise closed loop with u_k = v_k + Σ_{j≤k} K_{k,j} x̃_j."""
    N, n, m = model.horizon, model.n, model.m
    w = np.asarray(w, dtype=float).reshape(N, model.d)
    v = policy.v.reshape(N, m)
    x = np.zeros((N + 1, n))
    x_bar = np.zeros((N + 1, n))
    u = np.zeros((N, m))
    x[0] = x_bar[0] = np.asarray(x0, dtype=float).reshape(n)
    for k in range(N):
        history = (x[: k + 1] - x_bar[: k + 1]).ravel()
        u[k] = v[k] + policy.K[k * m : (k + 1) * m, : (k + 1) * n] @ history
        x[k + 1] = model.A[k] @ x[k] + model.B[k] @ u[k] + model.D[k] @ w[k]
        x_bar[k + 1] = model.A[k] @ x_bar[k] + model.B[k] @ v[k]
    return x, u
