"""Policy files: a dimension header plus dense v, L and K."""

from __future__ import annotations

from pathlib import Path
from typing import Any

import numpy as np
import structlog

from drds.errors import ScenarioError
from drds.system.augmented import AugmentedSystem
from drds.system.policy import Policy
from drds.types import FloatArray
from drds.util import dump_yaml, load_yaml_document

_logger = structlog.get_logger()

POLICY_FORMAT = 1

# Stored K and the K recomputed from L agree to this relative tolerance.
GAIN_CONSISTENCY_TOL = 1e-6


def policy_to_dict(policy: Policy, aug: AugmentedSystem, digest: str = "") -> dict[str, Any]:
    return {
        "format": POLICY_FORMAT,
        "dims": {"n": aug.n, "m": aug.m, "d": aug.d, "N": aug.horizon},
        "scenario_digest": digest,
        "v": policy.v,
        "L": policy.L,
        "K": policy.K,
    }


def write_policy(path: Path, policy: Policy, aug: AugmentedSystem, digest: str = "") -> None:
    dump_yaml(policy_to_dict(policy, aug, digest), path)
    _logger.info("policy_written", path=str(path), horizon=aug.horizon)


def _array(raw: dict[str, Any], key: str, shape: tuple[int, ...]) -> FloatArray:
    if key not in raw:
        raise ScenarioError(f"policy.{key}", "is required")
    try:
        value: FloatArray = np.asarray(raw[key], dtype=float)
    except (TypeError, ValueError) as e:
        raise ScenarioError(f"policy.{key}", f"not a numeric array ({e})") from e
    if value.shape != shape:
        raise ScenarioError(f"policy.{key}", f"expected shape {shape}, got {value.shape}")
    return value


def load_policy(path: Path, aug: AugmentedSystem) -> Policy:
    """Read a policy and check it against the scenario's stacked dimensions.

    The feedback gain is recomputed from L; a stored K that disagrees is rejected.
    """
    raw = load_yaml_document(path)
    dims = raw.get("dims")
    expected = {"n": aug.n, "m": aug.m, "d": aug.d, "N": aug.horizon}
    if dims != expected:
        raise ScenarioError("policy.dims", f"expected {expected}, got {dims}")

    v = _array(raw, "v", (aug.control_dim,))
    L = _array(raw, "L", (aug.control_dim, aug.state_dim))
    try:
        policy = Policy.from_disturbance_gain(v, L, aug)
    except ValueError as e:
        raise ScenarioError("policy.L", str(e)) from e

    if "K" in raw:
        K = _array(raw, "K", (aug.control_dim, aug.state_dim))
        scale = max(1.0, float(np.abs(policy.K).max()))
        if float(np.abs(K - policy.K).max()) > GAIN_CONSISTENCY_TOL * scale:
            raise ScenarioError("policy.K", "does not match the gain recovered from L")
    _logger.info("policy_loaded", path=str(path), digest=raw.get("scenario_digest", ""))
    return policy
