"""Payoff matrix, expected-gain revision protocol and the mean dynamics
on the 3-strategy simplex.

Strategy indices are 1-based in the public API (1, 2 = the two options,
3 = uncommitted). Rate matrices are numpy arrays, so ``rho[i-1, j-1]`` is
the rate from strategy ``i`` to strategy ``j``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import ValidationError

SIMPLEX_SLACK = 1e-12
SIMPLEX_SUM_TOL = 1e-9

FIELD_NAMES = ("r1", "r2", "sigma1", "sigma2", "alpha1", "alpha2", "gamma1", "gamma2")


@dataclass(frozen=True)
class ModelParams:
    """Rate constants of the game.

    ``r`` rewards matching an option, ``sigma`` is cross-inhibition,
    ``alpha`` spontaneous abandonment and ``gamma`` spontaneous commitment.
    Subscript 1/2 refers to the option concerned.
    """

    r1: float
    r2: float
    sigma1: float
    sigma2: float
    alpha1: float
    alpha2: float
    gamma1: float
    gamma2: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float, np.floating, np.integer)) or isinstance(v, bool):
                raise ValidationError(f"{f.name} must be a real number, got {v!r}")
            if not math.isfinite(v) or v < 0:
                raise ValidationError(f"{f.name} must be finite and non-negative, got {v}")
            object.__setattr__(self, f.name, float(v))

    @classmethod
    def symmetric_params(cls, r: float, sigma: float, alpha: float, gamma: float) -> "ModelParams":
        return cls(r, r, sigma, sigma, alpha, alpha, gamma, gamma)

    def symmetric(self) -> bool:
        return (self.r1 == self.r2 and self.sigma1 == self.sigma2
                and self.alpha1 == self.alpha2 and self.gamma1 == self.gamma2)

    # shorthand for the symmetric case
    @property
    def r(self) -> float:
        return self.r1

    @property
    def sigma(self) -> float:
        return self.sigma1

    @property
    def alpha(self) -> float:
        return self.alpha1

    @property
    def gamma(self) -> float:
        return self.gamma1

    def with_sigma(self, sigma: float) -> "ModelParams":
        d = asdict(self)
        d["sigma1"] = d["sigma2"] = sigma
        return ModelParams(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        """Build from the canonical eight-field JSON object.

        The shorthand ``{"r", "sigma", "alpha", "gamma"}`` is also accepted
        for symmetric parameter sets.
        """
        keys = set(d)
        if keys == set(FIELD_NAMES):
            return cls(**{k: d[k] for k in FIELD_NAMES})
        if keys == {"r", "sigma", "alpha", "gamma"}:
            return cls.symmetric_params(d["r"], d["sigma"], d["alpha"], d["gamma"])
        missing = sorted(set(FIELD_NAMES) - keys)
        extra = sorted(keys - set(FIELD_NAMES))
        raise ValidationError(f"bad ModelParams fields: missing={missing} unexpected={extra}")

    def require_symmetric(self):
        if not self.symmetric():
            raise ValidationError(
                "symmetric parameters required (r1=r2, sigma1=sigma2, alpha1=alpha2, gamma1=gamma2)")


@dataclass(frozen=True)
class SimplexState:
    x1: float
    x2: float
    x3: float

    def __post_init__(self):
        vals = (self.x1, self.x2, self.x3)
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError(f"non-finite simplex state {vals}")
        if min(vals) < -SIMPLEX_SLACK or abs(sum(vals) - 1.0) > SIMPLEX_SUM_TOL:
            raise ValidationError(f"state {vals} is off the simplex")
        for name, v in zip(("x1", "x2", "x3"), vals):
            object.__setattr__(self, name, float(v))

    @classmethod
    def from_planar(cls, x1: float, x2: float) -> "SimplexState":
        return cls(x1, x2, 1.0 - x1 - x2)

    @classmethod
    def from_array(cls, x) -> "SimplexState":
        x1, x2, x3 = (float(v) for v in x)
        return cls(x1, x2, x3)

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3])

    def __iter__(self):
        return iter((self.x1, self.x2, self.x3))


def project_to_simplex(x) -> np.ndarray:
    """Clamp negative entries to zero and rescale to unit sum."""
    y = np.clip(np.asarray(x, dtype=float), 0.0, None)
    s = y.sum()
    if s <= 0:
        raise ValidationError("cannot project a vector with no positive mass")
    return y / s


def payoff_matrix(p: ModelParams) -> np.ndarray:
    return np.array([
        [p.r1, -p.sigma2, 0.0],
        [-p.sigma1, p.r2, 0.0],
        [0.0, 0.0, 0.0],
    ])


def _as_simplex_array(x) -> np.ndarray:
    if isinstance(x, SimplexState):
        return x.as_array()
    return SimplexState.from_array(x).as_array()


def expected_gain(A, j: int, i: int, x, b_ji: float) -> float:
    """Expected gain of a switch from strategy ``j`` to ``i`` at state ``x``:
    sum_k (a_ik - a_jk)_+ x_k + b_ji."""
    if i == j:
        raise ValidationError("expected gain needs two distinct strategies")
    if b_ji < 0:
        raise ValidationError("offset must be non-negative")
    A = np.asarray(A, dtype=float)
    xa = _as_simplex_array(x)
    diff = np.clip(A[i - 1] - A[j - 1], 0.0, None)
    return float(diff @ xa + b_ji)


# (from, to) -> offset field; strategies 1 and 2 never exchange players directly
_OFFSETS = {(3, 1): "gamma1", (1, 3): "alpha1", (3, 2): "gamma2", (2, 3): "alpha2"}


def transition_rates(p: ModelParams, x) -> np.ndarray:
    A = payoff_matrix(p)
    rho = np.zeros((3, 3))
    for (j, i), name in _OFFSETS.items():
        rho[j - 1, i - 1] = expected_gain(A, j, i, x, getattr(p, name))
    return rho


def mean_dynamics_rhs(p: ModelParams, x) -> np.ndarray:
    """x_i' = sum_j x_j rho_ji - x_i sum_j rho_ij."""
    xa = _as_simplex_array(x)
    rho = transition_rates(p, xa)
    return xa @ rho - xa * rho.sum(axis=1)
