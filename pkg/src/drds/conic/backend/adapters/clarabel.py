from typing import Any

import clarabel
import numpy as np
import scipy.sparse as sp
import structlog

from drds.conic.backend.backend import AbstractSolverBackend, stack_by_kind
from drds.conic.backend.config import ClarabelConfig
from drds.conic.backend.types import BackendType
from drds.conic.problem import ConicProblem
from drds.conic.svec import upper_permutation
from drds.conic.types import ConeBlock, ConeKind, Solution, SolverSettings, SolveStatus

_logger = structlog.get_logger()

_ORDER = (ConeKind.ZERO, ConeKind.NONNEG, ConeKind.SECOND_ORDER, ConeKind.PSD)

_STATUS = {
    "Solved": SolveStatus.OPTIMAL,
    "AlmostSolved": SolveStatus.OPTIMAL,
    "PrimalInfeasible": SolveStatus.INFEASIBLE,
    "AlmostPrimalInfeasible": SolveStatus.INFEASIBLE,
    "DualInfeasible": SolveStatus.UNBOUNDED,
    "AlmostDualInfeasible": SolveStatus.UNBOUNDED,
}


def _cone_for(block: ConeBlock) -> Any:
    match block.kind:
        case ConeKind.ZERO:
            return clarabel.ZeroConeT(block.rows)
        case ConeKind.NONNEG:
            return clarabel.NonnegativeConeT(block.rows)
        case ConeKind.SECOND_ORDER:
            return clarabel.SecondOrderConeT(block.rows)
        case ConeKind.PSD:
            return clarabel.PSDTriangleConeT(block.psd_dim)


def _row_order(blocks: list[ConeBlock]) -> np.ndarray[Any, Any]:
    """Row permutation turning lower-triangle svec rows into Clarabel's upper order."""
    order: list[np.ndarray[Any, Any]] = []
    start = 0
    for block in blocks:
        if block.kind is ConeKind.PSD:
            order.append(start + upper_permutation(block.psd_dim))
        else:
            order.append(start + np.arange(block.rows))
        start += block.rows
    return np.concatenate(order) if order else np.zeros(0, dtype=np.int64)


class ClarabelBackend(AbstractSolverBackend):
    """Interior-point backend through the native Clarabel interface."""

    config: ClarabelConfig

    def __init__(self, config: ClarabelConfig) -> None:
        super().__init__(config)

    def identify(self) -> BackendType:
        return BackendType.CLARABEL

    def solve(self, problem: ConicProblem, settings: SolverSettings) -> Solution:
        A, b, blocks = stack_by_kind(problem, _ORDER)
        perm = _row_order(blocks)
        A = sp.csc_matrix(A[perm])
        b = b[perm]
        n = problem.num_vars

        opts = clarabel.DefaultSettings()
        opts.verbose = settings.verbose or self.config.verbose
        opts.max_iter = self.max_iter(settings)
        opts.tol_feas = settings.tol_feas
        opts.tol_gap_abs = settings.tol_gap
        opts.tol_gap_rel = settings.tol_gap
        opts.equilibrate_enable = self.config.equilibrate
        opts.direct_solve_method = self.config.direct_solve_method

        solver = clarabel.DefaultSolver(
            sp.csc_matrix((n, n)),
            problem.objective,
            A,
            b,
            [_cone_for(block) for block in blocks],
            opts,
        )
        result = solver.solve()

        status_name = str(result.status).rsplit(".", 1)[-1]
        status = _STATUS.get(status_name, SolveStatus.NUMERICAL_FAILURE)
        x = np.asarray(result.x, dtype=float)
        if status_name.startswith("Almost"):
            _logger.warning("clarabel_reduced_accuracy", status=status_name)

        return Solution(
            status=status,
            primal=x,
            objective=problem.evaluate_objective(x) if x.size == n else float("nan"),
            backend=BackendType.CLARABEL.value,
            iterations=int(result.iterations),
            message=status_name,
        )
