from typing import Any

import cvxpy as cp
import numpy as np
import structlog

from drds.conic.backend.backend import AbstractSolverBackend
from drds.conic.backend.config import CvxpyConfig
from drds.conic.backend.types import BackendType
from drds.conic.problem import ConicProblem, widen
from drds.conic.svec import svec_operator
from drds.conic.types import ConeBlock, ConeKind, Solution, SolverSettings, SolveStatus

_logger = structlog.get_logger()

_STATUS = {
    cp.OPTIMAL: SolveStatus.OPTIMAL,
    cp.OPTIMAL_INACCURATE: SolveStatus.OPTIMAL,
    cp.INFEASIBLE: SolveStatus.INFEASIBLE,
    cp.INFEASIBLE_INACCURATE: SolveStatus.INFEASIBLE,
    cp.UNBOUNDED: SolveStatus.UNBOUNDED,
    cp.UNBOUNDED_INACCURATE: SolveStatus.UNBOUNDED,
}


def _constraints_for(block: ConeBlock, x: cp.Variable, num_vars: int) -> list[Any]:
    rows = cp.Constant(widen(block.coeffs, num_vars)) @ x + block.const
    match block.kind:
        case ConeKind.ZERO:
            return [rows == 0]
        case ConeKind.NONNEG:
            return [rows >= 0]
        case ConeKind.SECOND_ORDER:
            return [cp.SOC(rows[0], rows[1:])]
        case ConeKind.PSD:
            n = block.psd_dim
            M = cp.Variable((n, n), symmetric=True)
            flat = cp.reshape(M, (n * n,), order="F")
            return [cp.Constant(svec_operator(n)) @ flat == rows, M >> 0]


class CvxpyBackend(AbstractSolverBackend):
    """Re-expresses the program in cvxpy and hands it to any installed cvxpy solver."""

    config: CvxpyConfig

    def __init__(self, config: CvxpyConfig) -> None:
        super().__init__(config)
        if config.solver not in cp.installed_solvers():
            raise ValueError(f"cvxpy solver {config.solver} is not installed")

    def identify(self) -> BackendType:
        return BackendType.CVXPY

    def solve(self, problem: ConicProblem, settings: SolverSettings) -> Solution:
        n = problem.num_vars
        x = cp.Variable(n)
        constraints = [
            c for block in problem.blocks for c in _constraints_for(block, x, n)
        ]
        objective = cp.Minimize(problem.objective @ x + problem.objective_constant)
        program = cp.Problem(objective, constraints)

        try:
            program.solve(
                solver=self.config.solver,
                verbose=settings.verbose or self.config.verbose,
                **self.config.options,
            )
        except cp.error.SolverError as e:
            _logger.error("cvxpy_solver_error", solver=self.config.solver, error=str(e))
            return Solution(
                status=SolveStatus.NUMERICAL_FAILURE,
                primal=np.full(n, np.nan),
                objective=float("nan"),
                backend=BackendType.CVXPY.value,
                message=str(e),
            )

        status = _STATUS.get(program.status, SolveStatus.NUMERICAL_FAILURE)
        primal = np.asarray(x.value, dtype=float) if x.value is not None else np.full(n, np.nan)
        stats = program.solver_stats
        return Solution(
            status=status,
            primal=primal,
            objective=problem.evaluate_objective(primal),
            backend=f"{BackendType.CVXPY.value}:{self.config.solver}",
            iterations=stats.num_iters if stats is not None else None,
            message=str(program.status),
        )
