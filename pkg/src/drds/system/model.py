from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from drds.types import FloatArray


def _as_matrix(value: FloatArray | float, name: str) -> FloatArray:
    M = np.atleast_2d(np.asarray(value, dtype=float))
    if M.ndim != 2:
        raise ValueError(f"{name} must be a matrix, got {M.ndim} dimensions")
    return M


@dataclass(frozen=True, eq=False)
class LtiModel:
    """Per-step matrices of x_{k+1} = A_k x_k + B_k u_k + D_k w_k over N steps."""

    A: tuple[FloatArray, ...]
    B: tuple[FloatArray, ...]
    D: tuple[FloatArray, ...]

    def __post_init__(self) -> None:
        if not self.A:
            raise ValueError("horizon N must be >= 1")
        if not len(self.A) == len(self.B) == len(self.D):
            raise ValueError(
                f"per-step lists differ in length: A {len(self.A)}, B {len(self.B)}, "
                f"D {len(self.D)}"
            )
        n, m, d = self.A[0].shape[0], self.B[0].shape[1], self.D[0].shape[1]
        for k, (A_k, B_k, D_k) in enumerate(zip(self.A, self.B, self.D, strict=True)):
            if A_k.shape != (n, n):
                raise ValueError(f"A[{k}] has shape {A_k.shape}, expected {(n, n)}")
            if B_k.shape != (n, m):
                raise ValueError(f"B[{k}] has shape {B_k.shape}, expected {(n, m)}")
            if D_k.shape != (n, d):
                raise ValueError(f"D[{k}] has shape {D_k.shape}, expected {(n, d)}")

    @classmethod
    def time_invariant(
        cls,
        A: FloatArray | float,
        B: FloatArray | float,
        D: FloatArray | float,
        horizon: int,
    ) -> LtiModel:
        if horizon < 1:
            raise ValueError("horizon N must be >= 1")
        A_m, B_m, D_m = _as_matrix(A, "A"), _as_matrix(B, "B"), _as_matrix(D, "D")
        return cls(A=(A_m,) * horizon, B=(B_m,) * horizon, D=(D_m,) * horizon)

    @classmethod
    def time_varying(
        cls,
        A_steps: Sequence[FloatArray],
        B_steps: Sequence[FloatArray],
        D_steps: Sequence[FloatArray],
    ) -> LtiModel:
        return cls(
            A=tuple(_as_matrix(M, f"A[{k}]") for k, M in enumerate(A_steps)),
            B=tuple(_as_matrix(M, f"B[{k}]") for k, M in enumerate(B_steps)),
            D=tuple(_as_matrix(M, f"D[{k}]") for k, M in enumerate(D_steps)),
        )

    @property
    def horizon(self) -> int:
        return len(self.A)

    @property
    def n(self) -> int:
        return int(self.A[0].shape[0])

    @property
    def m(self) -> int:
        return int(self.B[0].shape[1])

    @property
    def d(self) -> int:
        return int(self.D[0].shape[1])

    @property
    def is_time_invariant(self) -> bool:
        return all(
            np.array_equal(M, seq[0]) for seq in (self.A, self.B, self.D) for M in seq
        )


def rollout(model: LtiModel, x0: FloatArray, u: FloatArray, w: FloatArray) -> FloatArray:
    """Step the dynamics; u is N×m, w is N×d, returns the (N+1)×n states."""
    N, n = model.horizon, model.n
    u = np.asarray(u, dtype=float).reshape(N, model.m)
    w = np.asarray(w, dtype=float).reshape(N, model.d)
    x = np.zeros((N + 1, n))
    x[0] = np.asarray(x0, dtype=float).reshape(n)
    for k in range(N):
        x[k + 1] = model.A[k] @ x[k] + model.B[k] @ u[k] + model.D[k] @ w[k]
    return x
