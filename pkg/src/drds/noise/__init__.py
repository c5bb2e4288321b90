from drds.noise.dryden import (
    dryden_autocovariance,
    dryden_covariance,
    dryden_psd,
    length_scales,
    turbulence_intensities,
)
from drds.noise.io import load_samples, save_samples
from drds.noise.montecarlo import (
    MonteCarloReport,
    StepStatistics,
    TerminalReport,
    Trajectories,
    ViolationRisk,
    covariance_ellipses,
    empirical_cvar,
    halfspace_cvar,
    run_monte_carlo,
    simulate_closed_loop,
    step_statistics,
    terminal_report,
    violation_risk,
)
from drds.noise.sampler import noise_covariance, sample_noise
from drds.noise.types import DrydenChannel, DrydenParams, NoiseKind, NoiseModel

__all__ = [
    "DrydenChannel",
    "DrydenParams",
    "MonteCarloReport",
    "NoiseKind",
    "NoiseModel",
    "StepStatistics",
    "TerminalReport",
    "Trajectories",
    "ViolationRisk",
    "covariance_ellipses",
    "dryden_autocovariance",
    "dryden_covariance",
    "dryden_psd",
    "empirical_cvar",
    "halfspace_cvar",
    "length_scales",
    "load_samples",
    "noise_covariance",
    "run_monte_carlo",
    "sample_noise",
    "save_samples",
    "simulate_closed_loop",
    "step_statistics",
    "terminal_report",
    "turbulence_intensities",
    "violation_risk",
]
