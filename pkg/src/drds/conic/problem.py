from __future__ import annotations

from collections.abc import Iterable
from pathlib import Path

import numpy as np
import scipy.sparse as sp
import structlog

from drds.conic.expr import AffineExpr
from drds.conic.svec import smat, tri_dim
from drds.conic.types import ConeBlock, ConeKind, VarHandle, VarShape
from drds.types import FloatArray

_logger = structlog.get_logger()


class ConicProblem:
    """Linear objective over a flat variable vector subject to cone blocks.

    Blocks read ``coeffs @ x + const ∈ K``. Second-order blocks put the bound in
    their first row; Psd blocks hold an svec of a symmetric matrix.
    """

    def __init__(self, name: str = "") -> None:
        self.name = name
        self.variables: list[VarHandle] = []
        self.blocks: list[ConeBlock] = []
        self._num_vars = 0
        self._objective = np.zeros(0)
        self.objective_constant = 0.0

    @property
    def num_vars(self) -> int:
        return self._num_vars

    @property
    def objective(self) -> FloatArray:
        out = np.zeros(self._num_vars)
        out[: self._objective.size] = self._objective
        return out

    # -- Building ------------------------------------------------------------

    def add_variable(self, shape: VarShape, name: str = "") -> VarHandle:
        handle = VarHandle(offset=self._num_vars, shape=shape, name=name)
        self._num_vars += shape.size
        self.variables.append(handle)
        return handle

    def add_cone(
        self,
        kind: ConeKind,
        rows: AffineExpr | tuple[sp.spmatrix | FloatArray, FloatArray],
        label: str = "",
    ) -> int:
        coeffs, const = self._rows_of(rows)
        count = const.shape[0]
        if count == 0:
            raise ValueError(f"cone block {label or kind.value} has no rows")
        match kind:
            case ConeKind.SECOND_ORDER if count < 2:
                raise ValueError("second-order block needs at least 2 rows")
            case ConeKind.PSD if tri_dim(count) is None:
                raise ValueError(f"Psd block needs a triangular row count, got {count}")
            case _:
                pass

        block = ConeBlock(kind=kind, coeffs=coeffs, const=const, label=label)
        self.blocks.append(block)
        return len(self.blocks) - 1

    def set_objective(self, coeffs: AffineExpr | FloatArray, constant: float = 0.0) -> None:
        if isinstance(coeffs, AffineExpr):
            if coeffs.shape != (1, 1):
                raise ValueError("objective expression must be scalar")
            self._check_width(coeffs.width)
            self._objective = np.asarray(coeffs.coeffs.toarray()).ravel()
            self.objective_constant = float(constant) + float(coeffs.const[0, 0])
            return
        vector = np.asarray(coeffs, dtype=float).ravel()
        self._check_width(vector.size)
        self._objective = vector.copy()
        self.objective_constant = float(constant)

    def _rows_of(
        self, rows: AffineExpr | tuple[sp.spmatrix | FloatArray, FloatArray]
    ) -> tuple[sp.csr_matrix, FloatArray]:
        if isinstance(rows, AffineExpr):
            coeffs, const = rows.coeffs, rows.const.reshape(-1)
        else:
            coeffs = sp.csr_matrix(np.atleast_2d(rows[0]) if not sp.issparse(rows[0]) else rows[0])
            const = np.asarray(rows[1], dtype=float).reshape(-1)
        if coeffs.shape[0] != const.shape[0]:
            raise ValueError("coefficient and constant row counts differ")
        coeffs = sp.csr_matrix(coeffs)
        coeffs.eliminate_zeros()
        if coeffs.nnz:
            self._check_width(int(coeffs.indices.max()) + 1)
        if coeffs.shape[1] > self._num_vars:
            coeffs = sp.csr_matrix(coeffs[:, : self._num_vars])
        return coeffs, const.astype(float)

    def _check_width(self, width: int) -> None:
        if width > self._num_vars:
            raise ValueError(
                f"rows reference variable {width - 1} but only {self._num_vars} are declared"
            )

    # -- Standard form ---------------------------------------------------------

    def stacked(
        self, blocks: Iterable[ConeBlock] | None = None
    ) -> tuple[sp.csr_matrix, FloatArray]:
        """Stack block rows into ``G x + h`` over all declared variables."""
        chosen = list(self.blocks if blocks is None else blocks)
        if not chosen:
            return sp.csr_matrix((0, self._num_vars)), np.zeros(0)
        G = sp.vstack(
            [widen(block.coeffs, self._num_vars) for block in chosen], format="csr"
        )
        h = np.concatenate([block.const for block in chosen])
        return G, h

    def evaluate_objective(self, x: FloatArray) -> float:
        return float(self.objective @ x) + self.objective_constant

    def cone_violation(self, x: FloatArray) -> list[float]:
        """Per-block violation, scaled by the block's magnitude at *x*."""
        return [block_violation(block, x, self._num_vars) for block in self.blocks]

    # -- Text dump -----------------------------------------------------------

    def dump(self, path: Path) -> None:
        """Write the dense text form used for cross-checking with other solvers."""
        n = self._num_vars
        lines = [f"vars {n}", "objective " + _row_text(self.objective, self.objective_constant)]
        for block in self.blocks:
            lines.append(f"{block.kind.value} {block.rows}")
            dense = widen(block.coeffs, n).toarray()
            lines.extend(_row_text(dense[i], block.const[i]) for i in range(block.rows))
        path.write_text("\n".join(lines) + "\n")
        _logger.info("conic_problem_dumped", path=str(path), vars=n, blocks=len(self.blocks))

    @classmethod
    def load_dump(cls, path: Path) -> ConicProblem:
        lines = path.read_text().splitlines()
        header = lines[0].split()
        if len(header) != 2 or header[0] != "vars":
            raise ValueError(f"{path}: first line must be 'vars N'")
        problem = cls(name=path.stem)
        num_vars = int(header[1])
        if num_vars:
            problem.add_variable(VarShape.vector(num_vars))

        objective = _parse_row(lines[1].removeprefix("objective "), num_vars)
        problem.set_objective(objective[:-1], objective[-1])

        cursor = 2
        while cursor < len(lines):
            kind_text, count_text = lines[cursor].split()
            count = int(count_text)
            rows = np.array(
                [_parse_row(line, num_vars) for line in lines[cursor + 1 : cursor + 1 + count]]
            )
            problem.add_cone(ConeKind(kind_text), (sp.csr_matrix(rows[:, :-1]), rows[:, -1]))
            cursor += 1 + count
        return problem


def widen(coeffs: sp.csr_matrix, width: int) -> sp.csr_matrix:
    if coeffs.shape[1] == width:
        return coeffs
    widened = sp.csr_matrix(coeffs, copy=True)
    widened.resize((coeffs.shape[0], width))
    return widened


def _row_text(coeffs: FloatArray, const: float) -> str:
    return " ".join(repr(float(v)) for v in [*coeffs, const])


def _parse_row(line: str, num_vars: int) -> FloatArray:
    values = np.array([float(tok) for tok in line.split()])
    if values.size != num_vars + 1:
        raise ValueError(f"row has {values.size} entries, expected {num_vars + 1}")
    return values


def block_violation(block: ConeBlock, x: FloatArray, num_vars: int) -> float:
    """How far ``coeffs @ x + const`` lies outside its cone, relative to its size."""
    coeffs = widen(block.coeffs, num_vars)
    lin = np.asarray(coeffs @ x).ravel()
    r = lin + block.const
    scale = 1.0 + max(float(np.abs(lin).max(initial=0.0)), float(np.abs(block.const).max()))
    match block.kind:
        case ConeKind.ZERO:
            raw = float(np.abs(r).max())
        case ConeKind.NONNEG:
            raw = max(0.0, -float(r.min()))
        case ConeKind.SECOND_ORDER:
            raw = max(0.0, float(np.linalg.norm(r[1:])) - float(r[0]))
        case ConeKind.PSD:
            raw = max(0.0, -float(np.linalg.eigvalsh(smat(r))[0]))
    return raw / scale
