"""One-directional cross-inhibition (SIR-like) model.

Strategy-1 players inhibit strategy-2 players only, and uncommitted
players commit spontaneously at rates gamma1, gamma2::

    x1' = gamma1 x3
    x2' = -sigma x1 x2 + gamma2 x3
    x3' = -(gamma1 + gamma2) x3 + sigma x1 x2

Read as an epidemic: x1 susceptible, x2 infected, x3 removed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import ValidationError
from .game_core import SimplexState
from .network import ClassState, DegreeDistribution, theta_of
from .unstructured import StabilityReport


@dataclass(frozen=True)
class AsymParams:
    gamma1: float
    gamma2: float
    sigma: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool) or not isinstance(v, (int, float, np.floating, np.integer)):
                raise ValidationError(f"{f.name} must be a real number")
            if not math.isfinite(v) or v < 0:
                raise ValidationError(f"{f.name} must be finite and non-negative, got {v}")
            object.__setattr__(self, f.name, float(v))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "AsymParams":
        if set(d) != {"gamma1", "gamma2", "sigma"}:
            raise ValidationError(f"AsymParams needs gamma1, gamma2, sigma; got {sorted(d)}")
        return cls(d["gamma1"], d["gamma2"], d["sigma"])


def _rhs3(p: AsymParams, x1, x2, x3):
    infection = p.sigma * x2 * x1
    return (p.gamma1 * x3,
            -infection + p.gamma2 * x3,
            -p.gamma1 * x3 - p.gamma2 * x3 + infection)


def rhs_asym(p: AsymParams, x) -> np.ndarray:
    if isinstance(x, SimplexState):
        x = x.as_array()
    x = np.asarray(x, dtype=float)
    return np.stack(_rhs3(p, x[0], x[1], x[2]))


def asym_vector_field(p: AsymParams):
    """``f(t, x)`` over full (x1, x2, x3) states for the integrators."""
    return lambda t, x: rhs_asym(p, x)


def _class_rhs(p: AsymParams, psi, X, theta1):
    x2, x3 = X[:, 1], X[:, 2]
    infection = p.sigma * psi * x2 * theta1
    return np.stack([p.gamma1 * x3,
                     -infection + p.gamma2 * x3,
                     -p.gamma1 * x3 - p.gamma2 * x3 + infection], axis=1)


def structured_asym_rhs_array(p: AsymParams, dist: DegreeDistribution, X) -> np.ndarray:
    """Per-class right-hand side for an (n_classes, 3, ...) state array."""
    psi = dist.psi.reshape((-1,) + (1,) * (X.ndim - 2))
    return _class_rhs(p, psi, X, theta_of(dist, X[:, 0]))


def rhs_asym_structured(p: AsymParams, cs: ClassState) -> np.ndarray:
    return structured_asym_rhs_array(p, cs.dist, cs.states)


def structured_asym_vector_field(p: AsymParams, dist: DegreeDistribution):
    return lambda t, X: structured_asym_rhs_array(p, dist, X)


def theta1_rate(p: AsymParams, dist: DegreeDistribution, X) -> float:
    """Time derivative of Theta1: (1/<k>) sum_k k P(k) gamma1 x3k."""
    return float(theta_of(dist, p.gamma1 * np.asarray(X)[:, 2]))


def second_order_form(p: AsymParams, psi_k: float, theta1: float, psi_dot: float,
                      x3: float, x3_dot: float) -> tuple:
    """Mass-spring-damper realisation of the x2 dynamics of one class.

    With state (x2, x2'), returns ``(M, f)`` such that
    ``d/dt (x2, x2') = M (x2, x2') + f``. ``psi_dot`` is the rate of change
    of Theta1, which acts as the spring constant, while Theta1 itself acts
    as viscous damping. ``x3`` enters only through the class's own x2'.
    """
    if not (0.0 <= psi_k <= 1.0):
        raise ValidationError("psi_k must lie in [0, 1]")
    M = np.array([[0.0, 1.0],
                  [-p.sigma * psi_dot * psi_k, -p.sigma * theta1 * psi_k]])
    f = np.array([0.0, p.gamma2 * x3_dot])
    return M, f


def x2_acceleration(p: AsymParams, psi_k: float, theta1: float, psi_dot: float,
                    x2: float, x2_dot: float, x3_dot: float) -> float:
    """x2'' = -sigma psi (x2' Theta1 + x2 Theta1') + gamma2 x3'."""
    return -p.sigma * psi_k * (x2_dot * theta1 + x2 * psi_dot) + p.gamma2 * x3_dot


def asym_equilibria(p: AsymParams) -> list:
    """Consensus points (1,0,0) and (0,1,0) with their planar Jacobians in
    (x1, x2), x3 = 1 - x1 - x2."""
    g1, g2, s = p.gamma1, p.gamma2, p.sigma
    j10 = np.array([[-g1, -g1], [-g2, -g2 - s]])
    j01 = np.array([[-g1, -g1], [-g2 - s, -g2]])
    return [
        StabilityReport.from_jacobian(SimplexState(1.0, 0.0, 0.0), j10),
        StabilityReport.from_jacobian(SimplexState(0.0, 1.0, 0.0), j01),
    ]
