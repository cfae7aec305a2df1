"""Population dynamics of a three-strategy cross-inhibition game:
well-mixed, degree-structured and one-directional variants, plus
absolute-stability tools for a time-varying cross-inhibition gain."""

from .engine import IntegratorConfig, Trajectory, bifurcation_bisect, integrate, settle_time
from .errors import (DomainError, DomainWarning, NumericalError, SingularThresholdError,
                     SwarmError, ValidationError)
from .game_core import ModelParams, SimplexState

__all__ = [
    "IntegratorConfig", "Trajectory", "bifurcation_bisect", "integrate", "settle_time",
    "DomainError", "DomainWarning", "NumericalError", "SingularThresholdError",
    "SwarmError", "ValidationError", "ModelParams", "SimplexState",
]
__version__ = "0.1.0"
