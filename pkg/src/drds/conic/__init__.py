from drds.conic.backend.types import BackendType
from drds.conic.expr import AffineExpr
from drds.conic.problem import ConicProblem
from drds.conic.solve import solve
from drds.conic.svec import smat, svec
from drds.conic.types import (
    ConeBlock,
    ConeKind,
    Solution,
    SolverSettings,
    SolveStatus,
    VarHandle,
    VarShape,
)

__all__ = [
    "AffineExpr",
    "BackendType",
    "ConeBlock",
    "ConeKind",
    "ConicProblem",
    "Solution",
    "SolveStatus",
    "SolverSettings",
    "VarHandle",
    "VarShape",
    "smat",
    "solve",
    "svec",
]
