"""Run artifacts: diagnostics and Monte Carlo serialization, RunReport, plot-ready CSV."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import Any

import numpy as np
import structlog

from drds import __version__
from drds.noise.montecarlo import (
    MonteCarloReport,
    StepStatistics,
    TerminalReport,
    Trajectories,
    ViolationRisk,
)
from drds.steering.types import PolicyEvaluation, SteeringDiagnostics
from drds.types import FloatArray
from drds.util import dump_yaml, load_yaml_document
from drds.util.yaml import format_float

_logger = structlog.get_logger()


class ReportFormat(StrEnum):
    YAML = "yaml"
    CSV = "csv"


@dataclass
class RunReport:
    scenario: str
    digest: str
    state_dim: int
    halfspaces: int
    status: str = "not_solved"
    objective: float | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)
    montecarlo: MonteCarloReport | None = None
    timing: dict[str, float] = field(default_factory=dict)
    version: str = __version__


# -- Diagnostics ---------------------------------------------------------------


def _pair_records(values: dict[tuple[int, int], float], key: str) -> list[dict[str, Any]]:
    return [{"halfspace": j, "step": k, key: v} for (j, k), v in sorted(values.items())]


def evaluation_to_dict(evaluation: PolicyEvaluation) -> dict[str, Any]:
    return {
        "terminal_mean_error": evaluation.terminal_mean_error,
        "terminal_cov_excess": evaluation.terminal_cov_excess,
        "terminal_radius": evaluation.terminal_radius,
        "worstcase_cost": evaluation.worstcase_cost,
        "nominal_cost": evaluation.nominal_cost,
        "mode": evaluation.mode.value,
        "drcvar_lhs": _pair_records(evaluation.drcvar_lhs, "lhs"),
    }


def diagnostics_to_dict(diagnostics: SteeringDiagnostics) -> dict[str, Any]:
    out: dict[str, Any] = {
        "objective": diagnostics.objective,
        "status": diagnostics.status,
        "backend": diagnostics.backend,
        "solve_time": diagnostics.solve_time,
        "baseline": diagnostics.baseline,
        "evaluation": evaluation_to_dict(diagnostics.evaluation),
        "rho": {int(k): v for k, v in sorted(diagnostics.rho.items())},
    }
    if diagnostics.lam is not None:
        out["lambda"] = diagnostics.lam
    if diagnostics.trace_gamma is not None:
        out["trace_gamma"] = diagnostics.trace_gamma
    return out


# -- Monte Carlo ---------------------------------------------------------------


def montecarlo_to_dict(report: MonteCarloReport) -> dict[str, Any]:
    out: dict[str, Any] = {
        "samples": report.samples,
        "noise_kind": report.noise_kind,
        "seed": report.seed,
        "elapsed": report.elapsed,
        "cvar": _pair_records(report.cvar, "cvar"),
    }
    if report.violation is not None:
        out["violation"] = {
            "joint": report.violation.joint,
            "per_step": _pair_records(report.violation.per_step, "frequency"),
        }
    if report.terminal is not None:
        t = report.terminal
        out["terminal"] = {
            "mean": t.mean,
            "cov": t.cov,
            "distance": t.distance,
            "eta_f": t.eta_f,
            "containment_excess": t.containment_excess,
            "contained": t.contained,
        }
    if report.steps is not None:
        out["steps"] = {"mean": report.steps.mean, "cov_eigenvalues": report.steps.cov_eigenvalues}
    return out


def _pairs(records: list[dict[str, Any]], key: str) -> dict[tuple[int, int], float]:
    return {(int(r["halfspace"]), int(r["step"])): float(r[key]) for r in records}


def montecarlo_from_dict(raw: dict[str, Any]) -> MonteCarloReport:
    report = MonteCarloReport(
        samples=int(raw["samples"]),
        noise_kind=str(raw["noise_kind"]),
        seed=int(raw["seed"]),
        cvar=_pairs(raw.get("cvar", []), "cvar"),
        elapsed=float(raw.get("elapsed", 0.0)),
    )
    if "violation" in raw:
        report.violation = ViolationRisk(
            per_step=_pairs(raw["violation"]["per_step"], "frequency"),
            joint=float(raw["violation"]["joint"]),
        )
    if "terminal" in raw:
        t = raw["terminal"]
        report.terminal = TerminalReport(
            mean=np.asarray(t["mean"], dtype=float),
            cov=np.asarray(t["cov"], dtype=float),
            distance=float(t["distance"]),
            eta_f=float(t["eta_f"]),
            containment_excess=float(t["containment_excess"]),
            contained=bool(t["contained"]),
        )
    if "steps" in raw:
        report.steps = StepStatistics(
            mean=np.asarray(raw["steps"]["mean"], dtype=float),
            cov_eigenvalues=np.asarray(raw["steps"]["cov_eigenvalues"], dtype=float),
        )
    return report


# -- Run report ----------------------------------------------------------------


def report_to_dict(report: RunReport) -> dict[str, Any]:
    return {
        "scenario": report.scenario,
        "digest": report.digest,
        "version": report.version,
        "state_dim": report.state_dim,
        "halfspaces": report.halfspaces,
        "status": report.status,
        "objective": report.objective,
        "diagnostics": report.diagnostics,
        "montecarlo": montecarlo_to_dict(report.montecarlo) if report.montecarlo else None,
        "timing": report.timing,
    }


def report_from_dict(raw: dict[str, Any]) -> RunReport:
    mc = raw.get("montecarlo")
    return RunReport(
        scenario=str(raw["scenario"]),
        digest=str(raw["digest"]),
        state_dim=int(raw["state_dim"]),
        halfspaces=int(raw["halfspaces"]),
        status=str(raw["status"]),
        objective=None if raw.get("objective") is None else float(raw["objective"]),
        diagnostics=dict(raw.get("diagnostics") or {}),
        montecarlo=montecarlo_from_dict(mc) if mc else None,
        timing={k: float(v) for k, v in (raw.get("timing") or {}).items()},
        version=str(raw.get("version", "")),
    )


def _cell(value: float | None) -> str:
    return "" if value is None else format_float(float(value))


def csv_header(state_dim: int, halfspaces: int) -> list[str]:
    header = ["step"]
    header += [f"mean_{i}" for i in range(state_dim)]
    header += [f"cov_eig_{i}" for i in range(state_dim)]
    for j in range(halfspaces):
        header += [f"cvar_{j}", f"violation_{j}"]
    return header


def csv_rows(report: RunReport) -> list[list[str]]:
    """One row per step; halfspace cells are blank at steps where it is inactive."""
    mc = report.montecarlo
    if mc is None or mc.steps is None:
        return []
    violation = mc.violation.per_step if mc.violation else {}
    rows = []
    for k in range(mc.steps.mean.shape[0]):
        row = [str(k)]
        row += [_cell(v) for v in mc.steps.mean[k]]
        row += [_cell(v) for v in mc.steps.cov_eigenvalues[k]]
        for j in range(report.halfspaces):
            row += [_cell(mc.cvar.get((j, k))), _cell(violation.get((j, k)))]
        rows.append(row)
    return rows


def write_report(report: RunReport, path: Path, fmt: ReportFormat | None = None) -> None:
    fmt = fmt or ReportFormat(path.suffix.lstrip(".").replace("yml", "yaml"))
    match fmt:
        case ReportFormat.YAML:
            dump_yaml(report_to_dict(report), path)
        case ReportFormat.CSV:
            _write_csv(path, csv_header(report.state_dim, report.halfspaces), csv_rows(report))
    _logger.info("report_written", path=str(path), format=fmt.value)


def read_report(path: Path) -> RunReport:
    return report_from_dict(load_yaml_document(path))


def read_report_csv(path: Path) -> list[dict[str, str]]:
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


# -- Plot data -----------------------------------------------------------------


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_trajectories(path: Path, trajectories: Trajectories) -> None:
    """Long format: one row per (sample, step) with states and, before N, the control."""
    T, steps, n = trajectories.states.shape
    m = trajectories.controls.shape[2]
    header = ["sample", "step"] + [f"x_{i}" for i in range(n)] + [f"u_{i}" for i in range(m)]
    rows = []
    for s in range(T):
        for k in range(steps):
            u = trajectories.controls[s, k] if k < steps - 1 else [None] * m
            rows.append(
                [str(s), str(k)]
                + [_cell(v) for v in trajectories.states[s, k]]
                + [_cell(v) for v in u]
            )
    _write_csv(path, header, rows)


def write_ellipses(path: Path, ellipses: FloatArray) -> None:
    header = ["step", "center_x", "center_y", "semi_major", "semi_minor", "angle"]
    rows = [[str(int(row[0]))] + [_cell(v) for v in row[1:]] for row in ellipses]
    _write_csv(path, header, rows)


def write_splash(path: Path, trajectories: Trajectories, dims: tuple[int, int] = (0, 1)) -> None:
    """Terminal points of every sample in the plane *dims*."""
    final = trajectories.states[:, -1, list(dims)]
    rows = [[str(s), _cell(x), _cell(y)] for s, (x, y) in enumerate(final)]
    _write_csv(path, ["sample", f"x_{dims[0]}", f"x_{dims[1]}"], rows)
