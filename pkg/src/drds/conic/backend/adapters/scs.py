import numpy as np
import scs
import structlog

from drds.conic.backend.backend import AbstractSolverBackend, stack_by_kind
from drds.conic.backend.config import ScsConfig
from drds.conic.backend.types import BackendType
from drds.conic.problem import ConicProblem
from drds.conic.types import ConeBlock, ConeKind, Solution, SolverSettings, SolveStatus

_logger = structlog.get_logger()

# SCS expects zero, linear, second-order then semidefinite rows.
_ORDER = (ConeKind.ZERO, ConeKind.NONNEG, ConeKind.SECOND_ORDER, ConeKind.PSD)

_STATUS = {
    1: SolveStatus.OPTIMAL,
    2: SolveStatus.OPTIMAL,
    -2: SolveStatus.INFEASIBLE,
    -7: SolveStatus.INFEASIBLE,
    -1: SolveStatus.UNBOUNDED,
    -6: SolveStatus.UNBOUNDED,
}


def _cone_dict(blocks: list[ConeBlock]) -> dict[str, int | list[int]]:
    return {
        "z": sum(b.rows for b in blocks if b.kind is ConeKind.ZERO),
        "l": sum(b.rows for b in blocks if b.kind is ConeKind.NONNEG),
        "q": [b.rows for b in blocks if b.kind is ConeKind.SECOND_ORDER],
        "s": [b.psd_dim for b in blocks if b.kind is ConeKind.PSD],
    }


class ScsBackend(AbstractSolverBackend):
    """First-order splitting backend; its svec convention matches ours natively."""

    config: ScsConfig

    def __init__(self, config: ScsConfig) -> None:
        super().__init__(config)

    def identify(self) -> BackendType:
        return BackendType.SCS

    def solve(self, problem: ConicProblem, settings: SolverSettings) -> Solution:
        A, b, blocks = stack_by_kind(problem, _ORDER)
        data = {"A": A, "b": b, "c": problem.objective}

        solver = scs.SCS(
            data,
            _cone_dict(blocks),
            verbose=settings.verbose or self.config.verbose,
            eps_abs=settings.tol_feas,
            eps_rel=settings.tol_gap,
            max_iters=self.max_iter(settings),
            acceleration_lookback=self.config.acceleration_lookback,
            normalize=self.config.normalize,
            scale=self.config.scale,
        )
        result = solver.solve()
        info = result["info"]
        status_val = int(info["status_val"])
        status = _STATUS.get(status_val, SolveStatus.NUMERICAL_FAILURE)
        if status_val in (2, -6, -7):
            _logger.warning("scs_reduced_accuracy", status=info["status"])

        x = np.asarray(result["x"], dtype=float)
        return Solution(
            status=status,
            primal=x,
            objective=problem.evaluate_objective(x),
            backend=BackendType.SCS.value,
            iterations=int(info["iter"]),
            message=str(info["status"]),
        )
