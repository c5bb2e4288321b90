from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import structlog

from drds.ambiguity.radius import maximal_scale
from drds.noise.types import NoiseKind, NoiseModel
from drds.types import FloatArray
from drds.util.linalg import psd_factor

_logger = structlog.get_logger()

_CHUNK = 512


def noise_covariance(model: NoiseModel) -> FloatArray:
    """Covariance of the injected disturbance (the t shape is rescaled to match it)."""
    match model.kind:
        case NoiseKind.MAXIMAL:
            return maximal_scale(model.base, model.radius) ** 2 * model.base
        case NoiseKind.CUSTOM:
            assert model.custom_cov is not None
            return model.custom_cov
        case _:
            return model.base


def _draw(model: NoiseModel, factor: FloatArray, index: int) -> FloatArray:
    # One substream per sample index keeps draws independent of batching.
    rng = np.random.default_rng(np.random.SeedSequence(model.seed, spawn_key=(index,)))
    z = rng.standard_normal(model.dim)
    if model.kind is NoiseKind.STUDENT_T:
        assert model.dof is not None
        chi2 = rng.chisquare(model.dof)
        return factor @ z * np.sqrt((model.dof - 2.0) / chi2)
    out: FloatArray = factor @ z
    return out


def sample_noise(
    model: NoiseModel, samples: int, start: int = 0, workers: int = 1
) -> FloatArray:
    """Draw samples ``start .. start+samples-1`` as a (samples, N·d) array."""
    if samples < 0 or start < 0:
        raise ValueError("sample count and start index must be >= 0")
    factor = psd_factor(noise_covariance(model))
    out = np.zeros((samples, model.dim))

    def fill(lo: int, hi: int) -> None:
        for i in range(lo, hi):
            out[i] = _draw(model, factor, start + i)

    chunks = [(lo, min(lo + _CHUNK, samples)) for lo in range(0, samples, _CHUNK)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda bounds: fill(*bounds), chunks))
    else:
        for lo, hi in chunks:
            fill(lo, hi)

    _logger.debug(
        "noise_sampled", kind=model.kind.value, samples=samples, start=start, seed=model.seed
    )
    return out
