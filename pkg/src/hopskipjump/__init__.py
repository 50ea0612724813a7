"""Query-efficient decision-based adversarial attacks.

A library and CLI for crafting adversarial examples from hard-label
model decisions alone, with analytic and serialized-model oracles, a
rejection-sampling baseline attack, and an evaluation harness that
measures distance-versus-query curves and success rates.
"""

from .attack import (
    AttackConfig,
    AttackTrace,
    GradientDirectionEstimate,
    bin_search,
    estimate_gradient_direction,
    hsja_attack,
    init_targeted,
    init_untargeted,
    schedule_batch,
    schedule_delta,
    schedule_initial_step,
    schedule_theta,
    step_size_search,
)
from .boundary import BoundaryConfig, boundary_attack
from .geometry import (
    Norm,
    clip_to_domain,
    distance,
    project_l2,
    project_linf,
    sample_unit_sphere,
)
from .oracles import (
    AttackObjective,
    Classifier,
    Hyperplane,
    MlpModel,
    QuadraticBoundary,
    QueryingOracle,
    RegionBasedWrapper,
    SphereBoundary,
    TreeEnsembleModel,
    load_model,
)
from .rng import RngStream

__version__ = "0.1.0"

__all__ = [
    "AttackConfig",
    "AttackObjective",
    "AttackTrace",
    "BoundaryConfig",
    "Classifier",
    "GradientDirectionEstimate",
    "Hyperplane",
    "MlpModel",
    "Norm",
    "QuadraticBoundary",
    "QueryingOracle",
    "RegionBasedWrapper",
    "RngStream",
    "SphereBoundary",
    "TreeEnsembleModel",
    "bin_search",
    "boundary_attack",
    "clip_to_domain",
    "distance",
    "estimate_gradient_direction",
    "hsja_attack",
    "init_targeted",
    "init_untargeted",
    "load_model",
    "project_l2",
    "project_linf",
    "sample_unit_sphere",
    "schedule_batch",
    "schedule_delta",
    "schedule_initial_step",
    "schedule_theta",
    "step_size_search",
]
