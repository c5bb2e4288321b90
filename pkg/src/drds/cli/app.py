"""Command line: ``drds solve|simulate|report|check``.

Exit codes: 0 success, 1 solver or I/O failure, 2 bad input, 3 failed oracle.
"""

from __future__ import annotations

import argparse
import sys
from collections.abc import Callable, Sequence
from enum import IntEnum
from pathlib import Path
from typing import Any

import numpy as np
import structlog

from drds import __version__
from drds.ambiguity.types import RadiusMode
from drds.cli.oracles import ORACLES, run_oracles
from drds.cli.policy_io import load_policy, write_policy
from drds.cli.report import (
    ReportFormat,
    RunReport,
    diagnostics_to_dict,
    montecarlo_from_dict,
    montecarlo_to_dict,
    write_ellipses,
    write_report,
    write_splash,
    write_trajectories,
)
from drds.cli.scenario import ScenarioFile, load_scenario, scenario_digest
from drds.conic import BackendType
from drds.errors import DrdsError, ScenarioError, SteeringError
from drds.noise.io import load_samples, save_samples
from drds.noise.montecarlo import covariance_ellipses, run_monte_carlo
from drds.noise.sampler import sample_noise
from drds.noise.types import NoiseKind, NoiseModel
from drds.steering.cost import worstcase_moments, xi_matrix
from drds.steering.solver import solve_baseline_cs, solve_drds
from drds.system.policy import Policy
from drds.types import FloatArray
from drds.util import dump_yaml, load_yaml_document
from drds.util.logging import run_context, set_log_level

_logger = structlog.get_logger()

POLICY_FILE = "policy.yaml"
DIAGNOSTICS_FILE = "diagnostics.yaml"
MONTECARLO_FILE = "montecarlo.yaml"


class ExitCode(IntEnum):
    OK = 0
    FAILURE = 1
    BAD_INPUT = 2
    ORACLE_FAILURE = 3


# -- Parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drds", description="Distributionally robust density steering."
    )
    parser.add_argument("--version", action="version", version=f"drds {__version__}")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="synthesize a policy for a scenario")
    solve.add_argument("scenario")
    solve.add_argument("--out", type=Path, default=Path())
    solve.add_argument("--mode", choices=[m.value for m in RadiusMode])
    solve.add_argument("--backend", choices=[b.value for b in BackendType])
    solve.add_argument(
        "--baseline", action="store_true", help="solve the Gaussian chance-constrained baseline"
    )

    simulate = commands.add_parser("simulate", help="Monte Carlo run of a solved policy")
    simulate.add_argument("scenario")
    simulate.add_argument("--policy", type=Path)
    simulate.add_argument("--noise", choices=[k.value for k in NoiseKind])
    simulate.add_argument("--samples", type=int)
    simulate.add_argument("--seed", type=int)
    simulate.add_argument("--dof", type=float)
    simulate.add_argument("--custom-cov", type=Path)
    simulate.add_argument("--save-noise", type=Path)
    simulate.add_argument("--out", type=Path, default=Path())

    report = commands.add_parser("report", help="merge diagnostics and Monte Carlo results")
    report.add_argument("scenario")
    report.add_argument("--out", type=Path, default=Path())

    check = commands.add_parser("check", help="run the built-in oracle suite")
    check.add_argument("scenario", nargs="?")
    check.add_argument("--oracle", action="append", choices=sorted(ORACLES))
    return parser


# -- Commands ------------------------------------------------------------------


def _prepare_out(out: Path) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_solve(args: argparse.Namespace) -> ExitCode:
    loaded = load_scenario(args.scenario)
    scenario = loaded.scenario
    mode = RadiusMode(args.mode) if args.mode else loaded.solver.mode
    settings = loaded.solver.settings()
    if args.backend:
        settings.backend = BackendType(args.backend)

    if args.baseline:
        result = solve_baseline_cs(scenario, settings)
    else:
        result = solve_drds(scenario, settings, mode)

    out = _prepare_out(args.out)
    digest = scenario_digest(loaded)
    write_policy(out / POLICY_FILE, result.policy, scenario.aug, digest)
    diagnostics = diagnostics_to_dict(result.diagnostics)
    diagnostics["scenario_digest"] = digest
    diagnostics["mode"] = mode.value
    dump_yaml(diagnostics, out / DIAGNOSTICS_FILE)

    print(f"status: {result.diagnostics.status}")
    print(f"objective: {result.diagnostics.objective:.10g}")
    print(f"policy: {out / POLICY_FILE}")
    return ExitCode.OK


def _custom_covariance(
    args: argparse.Namespace, loaded: ScenarioFile, policy: Policy
) -> FloatArray:
    """Covariance for ``--noise custom``: a file, else the worst case for the policy's cost."""
    if args.custom_cov is not None:
        return load_samples(args.custom_cov)
    scenario = loaded.scenario
    Xi = xi_matrix(policy.L, scenario.aug, scenario.weights)
    _, Sigma = worstcase_moments(Xi, scenario.sigma_w, scenario.epsilon)
    _logger.info("custom_noise_worstcase", epsilon=scenario.epsilon)
    return Sigma


def _noise_model(args: argparse.Namespace, loaded: ScenarioFile, policy: Policy) -> NoiseModel:
    mc = loaded.montecarlo
    scenario = loaded.scenario
    kind = NoiseKind(args.noise) if args.noise else mc.noise_kind
    seed = args.seed if args.seed is not None else mc.seed
    custom = _custom_covariance(args, loaded, policy) if kind is NoiseKind.CUSTOM else None
    try:
        return NoiseModel(
            kind=kind,
            base=scenario.sigma_w,
            seed=seed,
            radius=scenario.epsilon,
            dof=args.dof if args.dof is not None else mc.dof,
            custom_cov=custom,
        )
    except ValueError as e:
        raise ScenarioError("noise", str(e)) from e


def _cmd_simulate(args: argparse.Namespace) -> ExitCode:
    loaded = load_scenario(args.scenario)
    scenario = loaded.scenario
    out = _prepare_out(args.out)
    policy = load_policy(args.policy or out / POLICY_FILE, scenario.aug)
    noise = _noise_model(args, loaded, policy)
    samples = args.samples if args.samples is not None else loaded.montecarlo.samples
    if samples < 0:
        raise ScenarioError("samples", "must be >= 0")

    trajectories, report = run_monte_carlo(
        policy, scenario, noise, samples, workers=loaded.montecarlo.workers
    )
    write_trajectories(out / "trajectories.csv", trajectories)
    write_ellipses(out / "ellipses.csv", covariance_ellipses(trajectories.states))
    write_splash(out / "splash.csv", trajectories)
    summary = montecarlo_to_dict(report)
    summary["scenario_digest"] = scenario_digest(loaded)
    dump_yaml(summary, out / MONTECARLO_FILE)
    if args.save_noise is not None:
        save_samples(args.save_noise, sample_noise(noise, samples))

    joint = report.violation.joint if report.violation else float("nan")
    print(f"samples: {samples}")
    print(f"noise: {noise.kind.value}")
    print(f"joint_violation: {joint:.6g}")
    if report.terminal is not None:
        print(f"terminal_distance: {report.terminal.distance:.6g}")
    return ExitCode.OK


def _read_artifact(path: Path, digest: str) -> dict[str, Any] | None:
    if not path.exists():
        return None
    raw = load_yaml_document(path)
    stored = raw.get("scenario_digest")
    if stored is not None and stored != digest:
        raise ScenarioError(f"{path.name}.scenario_digest", "does not match the scenario")
    return raw


def _cmd_report(args: argparse.Namespace) -> ExitCode:
    loaded = load_scenario(args.scenario)
    scenario = loaded.scenario
    digest = scenario_digest(loaded)
    out = _prepare_out(args.out)
    diagnostics = _read_artifact(out / DIAGNOSTICS_FILE, digest) or {}
    mc_raw = _read_artifact(out / MONTECARLO_FILE, digest)
    montecarlo = montecarlo_from_dict(mc_raw) if mc_raw else None

    timing = {}
    if "solve_time" in diagnostics:
        timing["solve"] = float(diagnostics["solve_time"])
    if montecarlo is not None:
        timing["montecarlo"] = montecarlo.elapsed
    objective = diagnostics.get("objective")
    report = RunReport(
        scenario=scenario.name,
        digest=digest,
        state_dim=scenario.model.n,
        halfspaces=len(scenario.halfspaces),
        status=str(diagnostics.get("status", "not_solved")),
        objective=None if objective is None else float(objective),
        diagnostics=diagnostics,
        montecarlo=montecarlo,
        timing=timing,
    )
    write_report(report, out / "run_report.yaml", ReportFormat.YAML)
    write_report(report, out / "run_report.csv", ReportFormat.CSV)
    print(f"report: {out / 'run_report.yaml'}")
    return ExitCode.OK


def _cmd_check(args: argparse.Namespace) -> ExitCode:
    if args.scenario:
        load_scenario(args.scenario)
    results = run_oracles(args.oracle)
    width = max(len(r.name) for r in results)
    for r in results:
        verdict = "PASS" if r.passed else "FAIL"
        line = f"{verdict}  {r.name:<{width}}  error={r.error:.3e}  tol={r.tolerance:.1e}"
        print(f"{line}  {r.detail}" if r.detail else line)
    failed = [r.name for r in results if not r.passed]
    if failed:
        _logger.error("oracles_failed", oracles=failed)
        return ExitCode.ORACLE_FAILURE
    return ExitCode.OK


_COMMANDS: dict[str, Callable[[argparse.Namespace], ExitCode]] = {
    "solve": _cmd_solve,
    "simulate": _cmd_simulate,
    "report": _cmd_report,
    "check": _cmd_check,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on bad usage and 0 for --help / --version.
        return int(e.code or 0)
    if args.log_level:
        set_log_level(args.log_level)

    try:
        with run_context(command=args.command, scenario=args.scenario):
            return int(_COMMANDS[args.command](args))
    except ScenarioError as e:
        _logger.error("scenario_invalid", field=e.field_path, reason=e.reason)
        print(f"error: {e}", file=sys.stderr)
        return ExitCode.BAD_INPUT
    except SteeringError as e:
        _logger.error("steering_failed", stage=e.stage, status=e.status.value, error=str(e))
        print(f"error: {e}", file=sys.stderr)
        return ExitCode.FAILURE
    except ValueError as e:
        _logger.error("input_invalid", error=str(e))
        print(f"error: {e}", file=sys.stderr)
        return ExitCode.BAD_INPUT
    except (OSError, DrdsError, np.linalg.LinAlgError) as e:
        _logger.error("command_failed", command=args.command, error=str(e))
        print(f"error: {e}", file=sys.stderr)
        return ExitCode.FAILURE
