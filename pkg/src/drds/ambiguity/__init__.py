from drds.ambiguity.distance import gaussian_pushforward, gaussian_w2, gelbrich_distance
from drds.ambiguity.radius import (
    cvar_coeff,
    iid_sequence_radius,
    maximal_scale,
    pushforward_radius,
    state_ambiguity,
    worstcase_cvar,
)
from drds.ambiguity.types import (
    AmbiguitySpec,
    CostMetric,
    GaussianMoments,
    RadiusMode,
    StructuralSet,
)

__all__ = [
    "AmbiguitySpec",
    "CostMetric",
    "GaussianMoments",
    "RadiusMode",
    "StructuralSet",
    "cvar_coeff",
    "gaussian_pushforward",
    "gaussian_w2",
    "gelbrich_distance",
    "iid_sequence_radius",
    "maximal_scale",
    "pushforward_radius",
    "state_ambiguity",
    "worstcase_cvar",
]
