from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from drds.conic import AffineExpr, ConeKind, ConicProblem, VarHandle, VarShape
from drds.steering.types import Scenario
from drds.types import FloatArray
from drds.util.linalg import sqrtm_psd


@dataclass
class PolicyVariables:
    """Decision variables shared by the robust and the baseline programs.

    ``LD`` and ``LDS`` stand for L𝒟 and L𝒟Σ_w^½; Zero blocks tie them to L so
    that products with ℬ stay sparse.
    """

    v: VarHandle
    L: AffineExpr
    LD: AffineExpr
    LDS: AffineExpr
    sqrt_sigma_w: FloatArray
    handles: dict[str, VarHandle | None] = field(default_factory=dict)

    @property
    def v_expr(self) -> AffineExpr:
        return AffineExpr.of(self.v)

    def nominal_state(self, scenario: Scenario, k: int) -> AffineExpr:
        """E_k(𝒜x₀ + ℬv) as an n×1 expression."""
        aug = scenario.aug
        rows = aug.state_rows(k)
        return self.v_expr.lmul(aug.calB[rows]) + (aug.calA[rows] @ scenario.x0)[:, None]

    def error_gain(self, scenario: Scenario, k: int, columns: int | None = None) -> AffineExpr:
        """E_k(I + ℬL)𝒟, optionally truncated to its first *columns* columns."""
        aug = scenario.aug
        rows = aug.state_rows(k)
        expr = self.LD.lmul(aug.calB[rows]) + aug.calD[rows]
        if columns is None:
            return expr
        return expr.block(slice(None), slice(0, columns))

    def error_factor(self, scenario: Scenario, k: int) -> AffineExpr:
        """E_k(I + ℬL)𝒟Σ_w^½."""
        aug = scenario.aug
        rows = aug.state_rows(k)
        return self.LDS.lmul(aug.calB[rows]) + aug.calD[rows] @ self.sqrt_sigma_w


def _structured(
    problem: ConicProblem, name: str, mask: np.ndarray
) -> tuple[VarHandle | None, AffineExpr]:
    rows, cols = mask.shape
    free = np.flatnonzero(mask.ravel())
    if free.size == 0:
        return None, AffineExpr.zeros(rows, cols)
    handle = problem.add_variable(VarShape.vector(int(free.size)), name)
    coeffs = sp.csr_matrix(
        (np.ones(free.size), (free, handle.offset + np.arange(free.size))),
        shape=(rows * cols, handle.stop),
    )
    return handle, AffineExpr(coeffs, np.zeros((rows, cols)))


def _block_mask(blocks_r: int, blocks_c: int, r: int, c: int, strict: bool) -> np.ndarray:
    i = np.arange(blocks_r)[:, None]
    j = np.arange(blocks_c)[None, :]
    allowed = j < i if strict else j <= i
    return np.kron(allowed, np.ones((r, c), dtype=bool)).astype(bool)


def declare_policy_variables(problem: ConicProblem, scenario: Scenario) -> PolicyVariables:
    aug = scenario.aug
    N, n, m, d = aug.horizon, aug.n, aug.m, aug.d
    S = sqrtm_psd(scenario.sigma_w)
    S[np.abs(S) < 1e-14 * float(np.abs(S).max())] = 0.0

    v = problem.add_variable(VarShape.vector(aug.control_dim), "v")
    # Control k may use error states 0..k; the block column for step N stays zero.
    mask_L = _block_mask(N, N + 1, m, n, strict=False)
    mask_LD = _block_mask(N, N, m, d, strict=True)
    mask_LDS = (mask_LD.astype(float) @ (np.abs(S) > 0.0).astype(float)) > 0.0

    L_handle, L = _structured(problem, "L", mask_L)
    LD_handle, LD = _structured(problem, "LD", mask_LD)
    LDS_handle, LDS = _structured(problem, "LDS", mask_LDS)

    if LD_handle is not None:
        tie = (LD - L.rmul(aug.calD)).flatten().block(np.flatnonzero(mask_LD.ravel()), [0])
        problem.add_cone(ConeKind.ZERO, tie, label="tie_LD")
    if LDS_handle is not None:
        tie = (LDS - LD.rmul(S)).flatten().block(np.flatnonzero(mask_LDS.ravel()), [0])
        problem.add_cone(ConeKind.ZERO, tie, label="tie_LDS")

    return PolicyVariables(
        v=v,
        L=L,
        LD=LD,
        LDS=LDS,
        sqrt_sigma_w=S,
        handles={"L": L_handle, "LD": LD_handle, "LDS": LDS_handle},
    )
