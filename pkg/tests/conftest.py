from pathlib import Path

import numpy as np
import pytest

from drds.ambiguity.types import AmbiguitySpec, GaussianMoments
from drds.conic.backend.registry import BackendRegistry
from drds.steering.types import CostWeights, Halfspace, Scenario, TerminalTarget
from drds.system.model import LtiModel


def make_scalar_scenario(
    epsilon: float = 0.05,
    delta: float = 1.0,
    offset: float = -2.0,
    gamma: float = 0.1,
    horizon: int = 2,
) -> Scenario:
    """Integrator x' = x + u + w from x0 = 1 back to the origin, with x <= 2 after step 0."""
    model = LtiModel.time_invariant(1.0, 1.0, 1.0, horizon)
    return Scenario(
        model=model,
        x0=np.array([1.0]),
        weights=CostWeights.uniform(np.eye(1), np.eye(1), horizon),
        halfspaces=(Halfspace.uniform([1.0], offset, gamma, range(1, horizon + 1)),),
        noise=AmbiguitySpec(
            center=GaussianMoments.zero_mean(0.01 * np.eye(horizon)), radius=epsilon
        ),
        terminal=TerminalTarget(mu_f=np.zeros(1), Sigma_f=np.eye(1), delta=delta),
        name="scalar",
    )


@pytest.fixture
def scalar_scenario() -> Scenario:
    return make_scalar_scenario()


@pytest.fixture
def clarabel_registry(tmp_path: Path) -> BackendRegistry:
    config = tmp_path / "solvers.yaml"
    config.write_text("clarabel:\n  max_iter: 200\n")
    return BackendRegistry(config_location=config)
