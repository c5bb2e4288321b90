from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from drds.system.model import LtiModel
from drds.types import FloatArray


@dataclass(frozen=True, eq=False)
class AugmentedSystem:
    """Stacked form x = 𝒜 x₀ + ℬ u + 𝒟 w over the whole horizon."""

    calA: FloatArray
    calB: FloatArray
    calD: FloatArray
    n: int
    m: int
    d: int
    horizon: int

    def state_rows(self, k: int) -> slice:
        """Rows of block k (the E_k selector) in a stacked state quantity."""
        if not 0 <= k <= self.horizon:
            raise ValueError(f"step {k} outside 0..{self.horizon}")
        return slice(k * self.n, (k + 1) * self.n)

    def control_rows(self, k: int) -> slice:
        if not 0 <= k < self.horizon:
            raise ValueError(f"control step {k} outside 0..{self.horizon - 1}")
        return slice(k * self.m, (k + 1) * self.m)

    @property
    def state_dim(self) -> int:
        return (self.horizon + 1) * self.n

    @property
    def control_dim(self) -> int:
        return self.horizon * self.m

    @property
    def noise_dim(self) -> int:
        return self.horizon * self.d


def build_augmented(model: LtiModel) -> AugmentedSystem:
    N, n, m, d = model.horizon, model.n, model.m, model.d
    calA = np.zeros(((N + 1) * n, n))
    calB = np.zeros(((N + 1) * n, N * m))
    calD = np.zeros(((N + 1) * n, N * d))

    calA[:n] = np.eye(n)
    for k in range(N):
        rows, prev = slice((k + 1) * n, (k + 2) * n), slice(k * n, (k + 1) * n)
        calA[rows] = model.A[k] @ calA[prev]
        calB[rows] = model.A[k] @ calB[prev]
        calD[rows] = model.A[k] @ calD[prev]
        calB[rows, k * m : (k + 1) * m] = model.B[k]
        calD[rows, k * d : (k + 1) * d] = model.D[k]

    return AugmentedSystem(calA=calA, calB=calB, calD=calD, n=n, m=m, d=d, horizon=N)


def nominal_trajectory(v: FloatArray, x0: FloatArray, aug: AugmentedSystem) -> FloatArray:
    """x̄ = 𝒜x₀ + ℬv as a stacked vector."""
    v = np.asarray(v, dtype=float).ravel()
    x0 = np.asarray(x0, dtype=float).ravel()
    if v.size != aug.control_dim:
        raise ValueError(f"v has length {v.size}, expected {aug.control_dim}")
    if x0.size != aug.n:
        raise ValueError(f"x0 has length {x0.size}, expected {aug.n}")
    out: FloatArray = aug.calA @ x0 + aug.calB @ v
    return out


def closed_loop_map(L: FloatArray, aug: AugmentedSystem) -> FloatArray:
    """(I + ℬL)𝒟, the map from stacked disturbance to stacked error state."""
    out: FloatArray = aug.calD + aug.calB @ (L @ aug.calD)
    return out


def error_map(k: int, L: FloatArray, aug: AugmentedSystem) -> FloatArray:
    """L̃_k = E_k (I + ℬL) 𝒟, an n × Nd matrix."""
    rows = aug.state_rows(k)
    out: FloatArray = aug.calD[rows] + aug.calB[rows] @ (L @ aug.calD)
    return out
