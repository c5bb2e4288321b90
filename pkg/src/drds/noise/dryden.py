"""Dryden turbulence spectra and the stacked covariance they induce.

Spectra are one-sided in angular frequency, so the autocovariance is
Σ(τ) = ∫₀^∞ Φ(ω) cos(ωτ) dω and Σ(0) recovers the channel variance.
"""

from __future__ import annotations

import numpy as np
import scipy.integrate
import structlog

from drds.noise.types import DrydenChannel, DrydenParams
from drds.types import FloatArray
from drds.util.linalg import project_psd

_logger = structlog.get_logger()


def _altitude_factor(z: float) -> float:
    return 0.177 + 0.000823 * z


def turbulence_intensities(params: DrydenParams) -> dict[str, float]:
    sigma_w = 0.1 * params.V0
    sigma_u = sigma_w / _altitude_factor(params.z) ** 0.4
    return {"u": sigma_u, "v": sigma_u, "w": sigma_w}


def length_scales(params: DrydenParams) -> dict[str, float]:
    L_u = params.z / _altitude_factor(params.z) ** 1.2
    return {"u": L_u, "v": L_u, "w": params.z}


def _transverse(omega: FloatArray, sigma: float, L: float, V0: float) -> FloatArray:
    x = (L * omega / V0) ** 2
    out: FloatArray = (2.0 * sigma**2 * L / (np.pi * V0)) * (1.0 + 12.0 * x) / (1.0 + 4.0 * x) ** 2
    return out


def dryden_psd(
    channel: DrydenChannel | str, omega: FloatArray | float, params: DrydenParams
) -> FloatArray:
    """Power spectral density of one channel at angular frequency ω ≥ 0."""
    try:
        channel = DrydenChannel(channel)
    except ValueError as e:
        raise ValueError(f"unknown Dryden channel {channel!r}") from e
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("frequency must be >= 0")

    V0, b = params.V0, params.b
    sigma = turbulence_intensities(params)
    L = length_scales(params)
    match channel:
        case DrydenChannel.U:
            level = 2.0 * sigma["u"] ** 2 * L["u"] / (np.pi * V0)
            return level / (1.0 + (L["u"] * w / V0) ** 2)
        case DrydenChannel.V:
            return _transverse(w, sigma["v"], L["v"], V0)
        case DrydenChannel.W:
            return _transverse(w, sigma["w"], L["w"], V0)
        case DrydenChannel.P:
            level = sigma["w"] ** 2 / (2.0 * V0 * L["w"])
            shape = 0.8 * (2.0 * np.pi * L["w"] / (4.0 * b)) ** (1.0 / 3.0)
            return level * shape / (1.0 + (4.0 * b * w / (np.pi * V0)) ** 2)
        case DrydenChannel.Q:
            roll_off = (w / V0) ** 2 / (1.0 + (4.0 * b * w / (np.pi * V0)) ** 2)
            return roll_off * _transverse(w, sigma["w"], L["w"], V0)
        case DrydenChannel.R:
            roll_off = (w / V0) ** 2 / (1.0 + (3.0 * b * w / (np.pi * V0)) ** 2)
            return roll_off * _transverse(w, sigma["v"], L["v"], V0)


def dryden_autocovariance(
    channel: DrydenChannel | str, lags: FloatArray, params: DrydenParams
) -> FloatArray:
    """Trapezoid quadrature of ∫₀^{ω_max} Φ(ω) cos(ωτ) dω at each lag τ."""
    omega = np.linspace(0.0, params.omega_max, params.grid_points)
    spectrum = dryden_psd(channel, omega, params)
    lags = np.atleast_1d(np.asarray(lags, dtype=float))
    values = [scipy.integrate.trapezoid(spectrum * np.cos(omega * tau), omega) for tau in lags]
    return np.asarray(values, dtype=float)


def dryden_covariance(params: DrydenParams, horizon: int, project: bool = True) -> FloatArray:
    """Stacked N·d covariance; channels are mutually uncorrelated and Toeplitz in time."""
    if horizon < 1:
        raise ValueError("horizon N must be >= 1")
    d = len(params.channels)
    lags = params.dt * np.arange(horizon)
    steps = np.abs(np.arange(horizon)[:, None] - np.arange(horizon)[None, :])

    Sigma = np.zeros((horizon * d, horizon * d))
    for i, channel in enumerate(params.channels):
        acov = dryden_autocovariance(channel, lags, params)
        if params.scale_angular and channel.is_angular:
            acov = acov * params.dt**2
        Sigma[i::d, i::d] = acov[steps]

    if not project:
        return Sigma
    projected, clipped = project_psd(Sigma)
    if clipped > 0.0:
        _logger.info(
            "dryden_psd_projected",
            clipped=clipped,
            relative=clipped / max(float(np.linalg.eigvalsh(projected)[-1]), 1e-300),
        )
    return projected
