"""Scenario files: strict YAML loading, validation with field paths, canonical writing.

Matrices may be written as row lists, ``{identity: n, scale: s}`` or
``{diag: [...]}``. Unknown keys are rejected everywhere.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
import structlog

from drds.ambiguity.radius import iid_sequence_radius
from drds.ambiguity.types import AmbiguitySpec, GaussianMoments, RadiusMode
from drds.conic import BackendType, SolverSettings
from drds.errors import ScenarioError
from drds.noise.dryden import dryden_covariance
from drds.noise.types import DrydenChannel, DrydenParams, NoiseKind
from drds.steering.types import CostWeights, Halfspace, Scenario, TerminalTarget
from drds.system.model import LtiModel
from drds.types import FloatArray
from drds.util import dump_yaml, load_yaml_document
from drds.util.linalg import blkdiag, require_pd, require_psd

_logger = structlog.get_logger()

SCENARIO_SUFFIX = ".scenario"

_TOP_KEYS = frozenset(
    {
        "name",
        "model",
        "initial_state",
        "cost",
        "noise",
        "constraints",
        "terminal",
        "solver",
        "montecarlo",
    }
)
_MODEL_KEYS = frozenset(
    {"n", "m", "d", "N", "dt", "A", "B", "D", "A_steps", "B_steps", "D_steps", "include"}
)
_COST_KEYS = frozenset({"Q", "R", "Q_steps", "R_steps", "beta"})
_NOISE_KEYS = frozenset(
    {"sigma_w", "sigma_w_step", "dryden", "epsilon", "epsilon_step", "kind", "seed", "dof"}
)
_DRYDEN_KEYS = frozenset({"V0", "z", "b", "channels", "omega_max", "grid_points", "scale_angular"})
_CONSTRAINT_KEYS = frozenset({"alpha", "offset", "gamma", "steps"})
_STEPS_KEYS = frozenset({"first", "last"})
_TERMINAL_KEYS = frozenset({"mu_f", "Sigma_f", "delta"})
_SOLVER_KEYS = frozenset({"backend", "tol", "max_iter", "mode", "verify_factor"})
_MONTECARLO_KEYS = frozenset({"T", "noise_kind", "seed", "dof", "workers"})


# -- Sections ------------------------------------------------------------------


@dataclass
class SolverSection:
    backend: BackendType = BackendType.CLARABEL
    tol: float = 1e-8
    max_iter: int | None = None
    mode: RadiusMode = RadiusMode.PAPER_EXACT
    verify_factor: float = 10.0

    def settings(self) -> SolverSettings:
        return SolverSettings(
            backend=self.backend,
            tol_feas=self.tol,
            tol_gap=self.tol,
            max_iter=self.max_iter,
            verify_factor=self.verify_factor,
        )


@dataclass
class MonteCarloSection:
    samples: int = 1000
    noise_kind: NoiseKind = NoiseKind.NOMINAL
    seed: int = 0
    dof: float = 3.0
    workers: int = 1


@dataclass(eq=False)
class ScenarioFile:
    scenario: Scenario
    solver: SolverSection = field(default_factory=SolverSection)
    montecarlo: MonteCarloSection = field(default_factory=MonteCarloSection)
    dt: float | None = None
    path: Path | None = None


class _Section:
    """A mapping read under a field path, rejecting keys outside *allowed*."""

    def __init__(self, raw: Any, path: str, allowed: frozenset[str]) -> None:
        if not isinstance(raw, dict):
            raise ScenarioError(path or "<root>", "must be a mapping")
        for key in raw:
            if key not in allowed:
                raise ScenarioError(self._join(path, str(key)), "unknown key")
        self.raw: dict[str, Any] = raw
        self.path = path

    @staticmethod
    def _join(path: str, key: str) -> str:
        return f"{path}.{key}" if path else key

    def at(self, key: str) -> str:
        return self._join(self.path, key)

    def has(self, key: str) -> bool:
        return key in self.raw

    def get(self, key: str, default: Any = None) -> Any:
        return self.raw.get(key, default)

    def require(self, key: str) -> Any:
        if key not in self.raw:
            raise ScenarioError(self.at(key), "is required")
        return self.raw[key]


# -- Value parsing -------------------------------------------------------------


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, int | float):
        raise ScenarioError(path, f"expected a number, got {value!r}")
    if not np.isfinite(value):
        raise ScenarioError(path, "must be finite")
    return float(value)


def _integer(value: Any, path: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ScenarioError(path, f"must be >= {minimum}")
    return int(value)


def _vector(value: Any, path: str, size: int | None = None) -> FloatArray:
    if not isinstance(value, list):
        raise ScenarioError(path, "expected a list of numbers")
    out = np.array([_number(v, f"{path}[{i}]") for i, v in enumerate(value)], dtype=float)
    if size is not None and out.size != size:
        raise ScenarioError(path, f"expected length {size}, got {out.size}")
    return out


def _matrix(value: Any, path: str, shape: tuple[int, int] | None = None) -> FloatArray:
    if isinstance(value, dict):
        if set(value) <= {"identity", "scale"} and "identity" in value:
            size = _integer(value["identity"], f"{path}.identity", minimum=1)
            M = _number(value.get("scale", 1.0), f"{path}.scale") * np.eye(size)
        elif set(value) == {"diag"}:
            M = np.diag(_vector(value["diag"], f"{path}.diag"))
        else:
            raise ScenarioError(path, "matrix mapping must be {identity, scale} or {diag}")
    elif isinstance(value, list) and value and all(isinstance(row, list) for row in value):
        rows = [_vector(row, f"{path}[{i}]") for i, row in enumerate(value)]
        if len({row.size for row in rows}) != 1:
            raise ScenarioError(path, "rows have different lengths")
        M = np.vstack(rows)
    elif isinstance(value, int | float) and not isinstance(value, bool):
        M = np.array([[_number(value, path)]])
    else:
        raise ScenarioError(path, "expected a matrix (list of rows, identity or diag mapping)")
    if shape is not None and M.shape != shape:
        raise ScenarioError(path, f"expected shape {shape}, got {M.shape}")
    return M


def _checked(path: str, check: Any, *args: Any) -> Any:
    try:
        return check(*args)
    except ValueError as e:
        raise ScenarioError(path, str(e)) from e


def _symmetric_pd(value: Any, path: str, size: int, name: str) -> FloatArray:
    M: FloatArray = _checked(path, require_pd, _matrix(value, path, (size, size)), name)
    return M


def _symmetric_psd(value: Any, path: str, size: int, name: str) -> FloatArray:
    M: FloatArray = _checked(path, require_psd, _matrix(value, path, (size, size)), name)
    return M


# -- Sections parsing ----------------------------------------------------------


def _model_raw(raw: Any, base_dir: Path) -> _Section:
    section = _Section(raw, "model", _MODEL_KEYS)
    if not section.has("include"):
        return section
    include = section.get("include")
    if not isinstance(include, str):
        raise ScenarioError("model.include", "expected a file name")
    try:
        included = load_yaml_document(base_dir / include)
    except OSError as e:
        raise ScenarioError("model.include", f"cannot read {include}: {e}") from e
    if "include" in included:
        raise ScenarioError("model.include", "included files cannot include further files")
    merged = {**included, **{k: v for k, v in section.raw.items() if k != "include"}}
    return _Section(merged, "model", _MODEL_KEYS)


def _parse_model(section: _Section) -> tuple[LtiModel, float | None]:
    n = _integer(section.require("n"), section.at("n"), minimum=1)
    m = _integer(section.require("m"), section.at("m"), minimum=1)
    d = _integer(section.require("d"), section.at("d"), minimum=1)
    N = _integer(section.require("N"), section.at("N"), minimum=1)
    dt = _number(section.get("dt"), section.at("dt")) if section.has("dt") else None
    if dt is not None and dt <= 0:
        raise ScenarioError(section.at("dt"), "must be > 0")

    shapes = {"A": (n, n), "B": (n, m), "D": (n, d)}
    steps: dict[str, list[FloatArray]] = {}
    for name, shape in shapes.items():
        key = f"{name}_steps"
        if section.has(key) and section.has(name):
            raise ScenarioError(section.at(key), f"give either {name} or {key}, not both")
        if section.has(key):
            value = section.get(key)
            if not isinstance(value, list) or len(value) != N:
                raise ScenarioError(section.at(key), f"expected a list of {N} matrices")
            steps[name] = [
                _matrix(M, f"{section.at(key)}[{k}]", shape) for k, M in enumerate(value)
            ]
        else:
            steps[name] = [_matrix(section.require(name), section.at(name), shape)] * N
    model = _checked("model", LtiModel.time_varying, steps["A"], steps["B"], steps["D"])
    return model, dt


def _parse_cost(section: _Section, model: LtiModel) -> CostWeights:
    n, m, N = model.n, model.m, model.horizon
    per_step: dict[str, list[FloatArray]] = {}
    for name, size, check in (("Q", n, _symmetric_psd), ("R", m, _symmetric_pd)):
        key = f"{name}_steps"
        if section.has(key):
            value = section.get(key)
            if not isinstance(value, list) or len(value) != N:
                raise ScenarioError(section.at(key), f"expected a list of {N} matrices")
            per_step[name] = [
                check(M, f"{section.at(key)}[{k}]", size, name) for k, M in enumerate(value)
            ]
        else:
            per_step[name] = [check(section.require(name), section.at(name), size, name)] * N
    beta = _number(section.get("beta", 1.0), section.at("beta"))
    if beta <= 0:
        raise ScenarioError(section.at("beta"), "beta must be > 0")
    return CostWeights(Q=tuple(per_step["Q"]), R=tuple(per_step["R"]), beta=beta)


def _parse_dryden(section: _Section, model: LtiModel, dt: float | None) -> DrydenParams:
    if dt is None:
        raise ScenarioError("model.dt", "is required for dryden noise")
    kwargs: dict[str, Any] = {}
    if section.has("channels"):
        value = section.get("channels")
        if not isinstance(value, list):
            raise ScenarioError(section.at("channels"), "expected a list of channel names")
        kwargs["channels"] = tuple(
            _checked(f"{section.at('channels')}[{i}]", DrydenChannel, c)
            for i, c in enumerate(value)
        )
    channels = kwargs.get("channels", DrydenParams.channels)
    if len(channels) != model.d:
        raise ScenarioError(
            section.at("channels"), f"expected {model.d} channels, got {len(channels)}"
        )
    if section.has("omega_max"):
        kwargs["omega_max"] = _number(section.get("omega_max"), section.at("omega_max"))
    if section.has("grid_points"):
        kwargs["grid_points"] = _integer(section.get("grid_points"), section.at("grid_points"), 2)
    if section.has("scale_angular"):
        kwargs["scale_angular"] = bool(section.get("scale_angular"))
    return _checked(
        "noise.dryden",
        lambda: DrydenParams(
            V0=_number(section.require("V0"), section.at("V0")),
            z=_number(section.require("z"), section.at("z")),
            b=_number(section.require("b"), section.at("b")),
            dt=dt,
            **kwargs,
        ),
    )


def _exactly_one(section: _Section, keys: tuple[str, ...]) -> str:
    present = [key for key in keys if section.has(key)]
    if len(present) != 1:
        raise ScenarioError(section.path, f"exactly one of {', '.join(keys)} is required")
    return present[0]


def _parse_noise(
    section: _Section, model: LtiModel, dt: float | None
) -> tuple[AmbiguitySpec, dict[str, Any]]:
    N, d = model.horizon, model.d
    source = _exactly_one(section, ("sigma_w", "sigma_w_step", "dryden"))
    match source:
        case "sigma_w":
            Sigma = _symmetric_pd(section.get("sigma_w"), section.at("sigma_w"), N * d, "Sigma_w")
        case "sigma_w_step":
            step = _symmetric_pd(
                section.get("sigma_w_step"), section.at("sigma_w_step"), d, "Sigma_w"
            )
            Sigma = blkdiag(*([step] * N))
        case _:
            params = _parse_dryden(
                _Section(section.get("dryden"), section.at("dryden"), _DRYDEN_KEYS), model, dt
            )
            Sigma = dryden_covariance(params, N)
            if float(np.linalg.eigvalsh(Sigma)[0]) <= 0.0:
                raise ScenarioError(section.at("dryden"), "Sigma_w must be positive definite")

    radius_key = _exactly_one(section, ("epsilon", "epsilon_step"))
    radius = _number(section.get(radius_key), section.at(radius_key))
    if radius < 0:
        raise ScenarioError(section.at(radius_key), "must be >= 0")
    if radius_key == "epsilon_step":
        radius = iid_sequence_radius(radius, N)

    simulation = {key: section.get(key) for key in ("kind", "seed", "dof") if section.has(key)}
    spec = AmbiguitySpec(center=GaussianMoments.zero_mean(Sigma), radius=radius)
    return spec, simulation


def _parse_steps(value: Any, path: str, horizon: int) -> tuple[int, ...]:
    if isinstance(value, dict):
        section = _Section(value, path, _STEPS_KEYS)
        first = _integer(section.require("first"), section.at("first"), minimum=0)
        last = _integer(section.get("last", horizon), section.at("last"), minimum=first)
        steps = tuple(range(first, last + 1))
    elif isinstance(value, list):
        steps = tuple(_integer(k, f"{path}[{i}]", minimum=0) for i, k in enumerate(value))
    else:
        raise ScenarioError(path, "expected a list of steps or {first, last}")
    if not steps:
        raise ScenarioError(path, "at least one active step is required")
    for k in steps:
        if k > horizon:
            raise ScenarioError(path, f"step {k} exceeds the horizon {horizon}")
    if len(set(steps)) != len(steps):
        raise ScenarioError(path, "steps must be distinct")
    return steps


def _parse_gamma(value: Any, path: str, count: int) -> tuple[float, ...]:
    if isinstance(value, list):
        if len(value) != count:
            raise ScenarioError(path, f"expected {count} risk levels, got {len(value)}")
        gammas = [_number(g, f"{path}[{i}]") for i, g in enumerate(value)]
    else:
        gammas = [_number(value, path)] * count
    for g in gammas:
        if not 0.0 < g < 1.0:
            raise ScenarioError(path, f"gamma must lie in (0, 1), got {g}")
    return tuple(gammas)


def _parse_constraints(raw: Any, model: LtiModel) -> tuple[Halfspace, ...]:
    if raw is None:
        return ()
    if not isinstance(raw, list):
        raise ScenarioError("constraints", "expected a list")
    halfspaces = []
    for j, item in enumerate(raw):
        section = _Section(item, f"constraints[{j}]", _CONSTRAINT_KEYS)
        alpha = _vector(section.require("alpha"), section.at("alpha"), model.n)
        if not float(np.linalg.norm(alpha)) > 0:
            raise ScenarioError(section.at("alpha"), "alpha must be nonzero")
        steps = _parse_steps(section.require("steps"), section.at("steps"), model.horizon)
        gamma = _parse_gamma(section.require("gamma"), section.at("gamma"), len(steps))
        offset = _number(section.require("offset"), section.at("offset"))
        halfspaces.append(Halfspace(alpha=alpha, offset=offset, gamma=gamma, steps=steps))
    return tuple(halfspaces)


def _parse_terminal(section: _Section, model: LtiModel) -> TerminalTarget:
    n = model.n
    delta = _number(section.require("delta"), section.at("delta"))
    if delta < 0:
        raise ScenarioError(section.at("delta"), "delta must be >= 0")
    return TerminalTarget(
        mu_f=_vector(section.require("mu_f"), section.at("mu_f"), n),
        Sigma_f=_symmetric_pd(section.require("Sigma_f"), section.at("Sigma_f"), n, "Sigma_f"),
        delta=delta,
    )


def _parse_solver(raw: Any) -> SolverSection:
    if raw is None:
        return SolverSection()
    section = _Section(raw, "solver", _SOLVER_KEYS)
    out = SolverSection()
    if section.has("backend"):
        out.backend = _checked(section.at("backend"), BackendType, section.get("backend"))
    if section.has("tol"):
        out.tol = _number(section.get("tol"), section.at("tol"))
        if out.tol <= 0:
            raise ScenarioError(section.at("tol"), "must be > 0")
    if section.has("max_iter"):
        out.max_iter = _integer(section.get("max_iter"), section.at("max_iter"), minimum=1)
    if section.has("mode"):
        out.mode = _checked(section.at("mode"), RadiusMode, section.get("mode"))
    if section.has("verify_factor"):
        out.verify_factor = _number(section.get("verify_factor"), section.at("verify_factor"))
    return out


def _parse_montecarlo(raw: Any, noise_defaults: dict[str, Any]) -> MonteCarloSection:
    section = _Section(raw if raw is not None else {}, "montecarlo", _MONTECARLO_KEYS)
    out = MonteCarloSection()
    if section.has("T"):
        out.samples = _integer(section.get("T"), section.at("T"), minimum=1)

    kind = section.get("noise_kind", noise_defaults.get("kind"))
    if kind is not None:
        path = section.at("noise_kind") if section.has("noise_kind") else "noise.kind"
        out.noise_kind = _checked(path, NoiseKind, kind)
    seed = section.get("seed", noise_defaults.get("seed"))
    if seed is not None:
        path = section.at("seed") if section.has("seed") else "noise.seed"
        out.seed = _integer(seed, path, minimum=0)
    dof = section.get("dof", noise_defaults.get("dof"))
    if dof is not None:
        path = section.at("dof") if section.has("dof") else "noise.dof"
        out.dof = _number(dof, path)
        if out.dof <= 2:
            raise ScenarioError(path, "Student-t noise needs dof > 2")
    if section.has("workers"):
        out.workers = _integer(section.get("workers"), section.at("workers"), minimum=1)
    return out


def parse_scenario(raw: Any, base_dir: Path, name: str = "") -> ScenarioFile:
    top = _Section(raw, "", _TOP_KEYS)
    model, dt = _parse_model(_model_raw(top.require("model"), base_dir))
    x0 = _vector(top.require("initial_state"), "initial_state", model.n)
    weights = _parse_cost(_Section(top.require("cost"), "cost", _COST_KEYS), model)
    noise, noise_defaults = _parse_noise(
        _Section(top.require("noise"), "noise", _NOISE_KEYS), model, dt
    )
    halfspaces = _parse_constraints(top.get("constraints"), model)
    terminal = _parse_terminal(_Section(top.require("terminal"), "terminal", _TERMINAL_KEYS), model)
    scenario_name = str(top.get("name", name))

    scenario = _checked(
        "scenario",
        lambda: Scenario(
            model=model,
            x0=x0,
            weights=weights,
            halfspaces=halfspaces,
            noise=noise,
            terminal=terminal,
            name=scenario_name,
        ),
    )
    return ScenarioFile(
        scenario=scenario,
        solver=_parse_solver(top.get("solver")),
        montecarlo=_parse_montecarlo(top.get("montecarlo"), noise_defaults),
        dt=dt,
    )


def bundled_scenario(name: str) -> Path | None:
    """Path of a scenario shipped with the package, by file name or stem."""
    filename = name if name.endswith(SCENARIO_SUFFIX) else f"{name}{SCENARIO_SUFFIX}"
    candidate = resources.files("drds.cli") / "scenarios" / filename
    return Path(str(candidate)) if candidate.is_file() else None


def resolve_scenario_path(name: str | Path) -> Path:
    path = Path(name)
    if path.exists():
        return path
    bundled = bundled_scenario(path.name)
    if bundled is None:
        raise FileNotFoundError(f"scenario {name} not found")
    return bundled


def load_scenario(path: Path | str) -> ScenarioFile:
    resolved = resolve_scenario_path(path)
    raw = load_yaml_document(resolved)
    loaded = parse_scenario(raw, resolved.parent, name=resolved.stem)
    loaded.path = resolved
    _logger.info(
        "scenario_loaded",
        path=str(resolved),
        name=loaded.scenario.name,
        horizon=loaded.scenario.horizon,
        epsilon=loaded.scenario.epsilon,
        halfspaces=len(loaded.scenario.halfspaces),
    )
    return loaded


# -- Canonical form --------------------------------------------------------------


def _steps_or_single(matrices: tuple[FloatArray, ...], name: str) -> dict[str, Any]:
    if all(np.array_equal(M, matrices[0]) for M in matrices):
        return {name: matrices[0]}
    return {f"{name}_steps": list(matrices)}


def scenario_to_dict(loaded: ScenarioFile) -> dict[str, Any]:
    s = loaded.scenario
    model: dict[str, Any] = {"n": s.model.n, "m": s.model.m, "d": s.model.d, "N": s.horizon}
    if loaded.dt is not None:
        model["dt"] = loaded.dt
    for name, matrices in (("A", s.model.A), ("B", s.model.B), ("D", s.model.D)):
        model.update(_steps_or_single(matrices, name))

    cost: dict[str, Any] = {"beta": s.weights.beta}
    cost.update(_steps_or_single(s.weights.Q, "Q"))
    cost.update(_steps_or_single(s.weights.R, "R"))

    mc = loaded.montecarlo
    return {
        "name": s.name,
        "model": model,
        "initial_state": s.x0,
        "cost": cost,
        "noise": {"sigma_w": s.sigma_w, "epsilon": s.epsilon},
        "constraints": [
            {"alpha": h.alpha, "offset": h.offset, "gamma": list(h.gamma), "steps": list(h.steps)}
            for h in s.halfspaces
        ],
        "terminal": {
            "mu_f": s.terminal.mu_f,
            "Sigma_f": s.terminal.Sigma_f,
            "delta": s.terminal.delta,
        },
        "solver": {
            "backend": loaded.solver.backend.value,
            "tol": loaded.solver.tol,
            "mode": loaded.solver.mode.value,
            "verify_factor": loaded.solver.verify_factor,
            **({"max_iter": loaded.solver.max_iter} if loaded.solver.max_iter else {}),
        },
        "montecarlo": {
            "T": mc.samples,
            "noise_kind": mc.noise_kind.value,
            "seed": mc.seed,
            "dof": mc.dof,
            "workers": mc.workers,
        },
    }


def write_scenario(loaded: ScenarioFile, path: Path) -> None:
    dump_yaml(scenario_to_dict(loaded), path)


def scenario_digest(loaded: ScenarioFile) -> str:
    """SHA-256 of the canonical scenario text."""
    return hashlib.sha256(dump_yaml(scenario_to_dict(loaded)).encode()).hexdigest()
