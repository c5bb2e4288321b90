from __future__ import annotations

import math
import time
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import structlog

from drds.ambiguity.distance import gelbrich_distance
from drds.ambiguity.radius import maximal_scale
from drds.ambiguity.types import GaussianMoments
from drds.noise.sampler import sample_noise
from drds.noise.types import NoiseModel
from drds.steering.types import Halfspace, Scenario
from drds.system.augmented import closed_loop_map, nominal_trajectory
from drds.system.policy import Policy
from drds.types import FloatArray
from drds.util.linalg import max_eig, project_psd

_logger = structlog.get_logger()

CONTAINMENT_TOL = 0.1


@dataclass
class Trajectories:
    states: FloatArray
    controls: FloatArray

    @property
    def samples(self) -> int:
        return int(self.states.shape[0])


@dataclass
class ViolationRisk:
    per_step: dict[tuple[int, int], float]
    joint: float


@dataclass
class TerminalReport:
    mean: FloatArray
    cov: FloatArray
    distance: float
    eta_f: float
    containment_excess: float
    contained: bool


@dataclass
class StepStatistics:
    mean: FloatArray
    cov_eigenvalues: FloatArray


@dataclass
class MonteCarloReport:
    samples: int
    noise_kind: str
    seed: int
    cvar: dict[tuple[int, int], float] = field(default_factory=dict)
    violation: ViolationRisk | None = None
    terminal: TerminalReport | None = None
    steps: StepStatistics | None = None
    elapsed: float = 0.0


def simulate_closed_loop(policy: Policy, scenario: Scenario, samples: FloatArray) -> Trajectories:
    """Closed-loop states and controls for each row of *samples*."""
    aug = scenario.aug
    W = np.atleast_2d(np.asarray(samples, dtype=float))
    if W.size == 0:
        W = W.reshape(0, aug.noise_dim)
    if W.shape[1] != aug.noise_dim:
        raise ValueError(f"samples have length {W.shape[1]}, expected {aug.noise_dim}")
    T = W.shape[0]
    x_bar = nominal_trajectory(policy.v, scenario.x0, aug)
    states = x_bar[None, :] + W @ closed_loop_map(policy.L, aug).T
    controls = policy.v[None, :] + W @ (policy.L @ aug.calD).T
    return Trajectories(
        states=states.reshape(T, aug.horizon + 1, aug.n),
        controls=controls.reshape(T, aug.horizon, aug.m),
    )


def empirical_cvar(losses: FloatArray, gamma: float) -> float:
    """Mean of the ⌈γT⌉ largest losses."""
    values = np.asarray(losses, dtype=float).ravel()
    if values.size == 0:
        raise ValueError("losses must be nonempty")
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    count = max(1, min(values.size, math.ceil(gamma * values.size - 1e-9)))
    tail = np.partition(values, values.size - count)[values.size - count :]
    return float(tail.mean())


def _losses(states: FloatArray, halfspace: Halfspace, k: int) -> FloatArray:
    out: FloatArray = states[:, k, :] @ halfspace.alpha + halfspace.offset
    return out


def violation_risk(states: FloatArray, halfspaces: Sequence[Halfspace]) -> ViolationRisk:
    """Per-(halfspace, step) violation frequency and the any-violation frequency."""
    T = states.shape[0]
    per_step: dict[tuple[int, int], float] = {}
    any_violation = np.zeros(T, dtype=bool)
    for j, halfspace in enumerate(halfspaces):
        for k in halfspace.steps:
            violated = _losses(states, halfspace, k) > 0.0
            per_step[(j, k)] = float(violated.mean()) if T else 0.0
            any_violation |= violated
    return ViolationRisk(per_step=per_step, joint=float(any_violation.mean()) if T else 0.0)


def halfspace_cvar(
    states: FloatArray, halfspaces: Sequence[Halfspace]
) -> dict[tuple[int, int], float]:
    return {
        (j, k): empirical_cvar(_losses(states, halfspace, k), halfspace.gamma_at(k))
        for j, halfspace in enumerate(halfspaces)
        for k in halfspace.steps
    }


def terminal_report(states: FloatArray, scenario: Scenario) -> TerminalReport:
    T = states.shape[0]
    if T < 2:
        raise ValueError(f"terminal statistics need at least 2 samples, got {T}")
    final = states[:, -1, :]
    mean = final.mean(axis=0)
    cov, _ = project_psd(np.cov(final, rowvar=False).reshape(final.shape[1], final.shape[1]))
    target = scenario.terminal
    distance = gelbrich_distance(
        GaussianMoments(mean=mean, cov=cov), GaussianMoments(mean=target.mu_f, cov=target.Sigma_f)
    )
    eta_f = maximal_scale(target.Sigma_f, target.delta)
    bound = eta_f**2 * target.Sigma_f
    excess = max_eig(cov - bound) / float(np.linalg.norm(bound, 2))
    return TerminalReport(
        mean=mean,
        cov=cov,
        distance=distance,
        eta_f=eta_f,
        containment_excess=excess,
        contained=excess <= CONTAINMENT_TOL,
    )


def step_statistics(states: FloatArray) -> StepStatistics:
    """Per-step sample mean and ascending covariance eigenvalues."""
    T, steps, n = states.shape
    means = states.mean(axis=0)
    eigs = np.zeros((steps, n))
    if T >= 2:
        for k in range(steps):
            cov = np.cov(states[:, k, :], rowvar=False).reshape(n, n)
            eigs[k] = np.linalg.eigvalsh(cov)
    return StepStatistics(mean=means, cov_eigenvalues=eigs)


def covariance_ellipses(
    states: FloatArray, dims: tuple[int, int] = (0, 1), scale: float = 3.0
) -> FloatArray:
    """Rows (step, centre_x, centre_y, semi_major, semi_minor, angle) of scale-σ ellipses."""
    T, steps, _ = states.shape
    rows = np.zeros((steps, 6))
    for k in range(steps):
        plane = states[:, k, list(dims)]
        centre = plane.mean(axis=0)
        cov = np.cov(plane, rowvar=False) if T >= 2 else np.zeros((2, 2))
        eigvals, eigvecs = np.linalg.eigh(cov)
        eigvals = np.clip(eigvals, 0.0, None)
        angle = float(np.arctan2(eigvecs[1, 1], eigvecs[0, 1]))
        rows[k] = [
            k,
            centre[0],
            centre[1],
            scale * np.sqrt(eigvals[1]),
            scale * np.sqrt(eigvals[0]),
            angle,
        ]
    return rows


def run_monte_carlo(
    policy: Policy,
    scenario: Scenario,
    noise: NoiseModel,
    samples: int = 1000,
    workers: int = 1,
) -> tuple[Trajectories, MonteCarloReport]:
    start = time.perf_counter()
    W = sample_noise(noise, samples, workers=workers)
    trajectories = simulate_closed_loop(policy, scenario, W)
    states = trajectories.states

    report = MonteCarloReport(samples=samples, noise_kind=noise.kind.value, seed=noise.seed)
    if samples > 0:
        report.cvar = halfspace_cvar(states, scenario.halfspaces)
        report.violation = violation_risk(states, scenario.halfspaces)
        report.steps = step_statistics(states)
    if samples >= 2:
        report.terminal = terminal_report(states, scenario)
    report.elapsed = time.perf_counter() - start

    _logger.info(
        "montecarlo_finished",
        samples=samples,
        noise=noise.kind.value,
        joint_violation=report.violation.joint if report.violation else None,
        terminal_distance=report.terminal.distance if report.terminal else None,
        seconds=round(report.elapsed, 3),
    )
    return trajectories, report
