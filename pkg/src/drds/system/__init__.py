from drds.system.augmented import (
    AugmentedSystem,
    build_augmented,
    closed_loop_map,
    error_map,
    nominal_trajectory,
)
from drds.system.model import LtiModel, rollout
from drds.system.policy import (
    Policy,
    apply_policy,
    gain_k_to_l,
    gain_l_to_k,
    rollout_feedback,
)

__all__ = [
    "AugmentedSystem",
    "LtiModel",
    "Policy",
    "apply_policy",
    "build_augmented",
    "closed_loop_map",
    "error_map",
    "gain_k_to_l",
    "gain_l_to_k",
    "nominal_trajectory",
    "rollout",
    "rollout_feedback",
]
