"""Noise-sample dump and load, as .npy (binary) or .csv (17 significant digits)."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import structlog

from drds.types import FloatArray

_logger = structlog.get_logger()


def save_samples(path: Path, samples: FloatArray) -> None:
    W = np.atleast_2d(np.asarray(samples, dtype=float))
    match path.suffix:
        case ".npy":
            np.save(path, W)
        case ".csv":
            np.savetxt(path, W, fmt="%.17g", delimiter=",")
        case _:
            raise ValueError(f"unsupported sample format {path.suffix!r}; use .npy or .csv")
    _logger.info("noise_samples_saved", path=str(path), rows=W.shape[0], cols=W.shape[1])


def load_samples(path: Path) -> FloatArray:
    match path.suffix:
        case ".npy":
            W = np.load(path, allow_pickle=False)
        case ".csv":
            W = np.loadtxt(path, delimiter=",", ndmin=2)
        case _:
            raise ValueError(f"unsupported sample format {path.suffix!r}; use .npy or .csv")
    out: FloatArray = np.atleast_2d(np.asarray(W, dtype=float))
    return out
