"""Degree distributions and the link-weighted aggregates of per-class states.

Per-class states are stored as an ``(n_classes, 3)`` array aligned with
``dist.support``. The ``*_of`` functions work on raw arrays (any trailing
shape, no simplex check) so that linearity can be exercised directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ValidationError
from .game_core import SIMPLEX_SLACK, SIMPLEX_SUM_TOL, SimplexState


@dataclass(frozen=True)
class DegreeDistribution:
    support: tuple
    probs: tuple
    raw_weights: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        support = tuple(int(k) for k in self.support)
        probs = tuple(float(q) for q in self.probs)
        if len(support) == 0:
            raise ValidationError("degree support is empty")
        if len(support) != len(probs):
            raise ValidationError("support and probs differ in length")
        if any(k <= 0 for k in support):
            raise ValidationError("degrees must be positive integers")
        if any(b <= a for a, b in zip(support, support[1:])):
            raise ValidationError("support must be strictly ascending")
        if any(q < 0 or not math.isfinite(q) for q in probs):
            raise ValidationError("probabilities must be finite and non-negative")
        if abs(math.fsum(probs) - 1.0) > 1e-12:
            raise ValidationError(f"probabilities sum to {math.fsum(probs)!r}, not 1")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    @property
    def k(self) -> np.ndarray:
        return np.array(self.support, dtype=float)

    @property
    def p(self) -> np.ndarray:
        return np.array(self.probs)

    @property
    def k_max(self) -> int:
        return self.support[-1]

    @property
    def mean_k(self) -> float:
        return math.fsum(k * q for k, q in zip(self.support, self.probs))

    @property
    def second_moment(self) -> float:
        return math.fsum(k * k * q for k, q in zip(self.support, self.probs))

    @property
    def psi(self) -> np.ndarray:
        """Normalised connectivity k / k_max of every class."""
        return self.k / self.k_max

    def __len__(self):
        return len(self.support)

    @classmethod
    def single(cls, k: int) -> "DegreeDistribution":
        return cls((k,), (1.0,))

    def to_dict(self) -> dict:
        return {"support": list(self.support), "probs": list(self.probs)}

    @classmethod
    def from_dict(cls, d: dict) -> "DegreeDistribution":
        if "power_law" in d:
            pl = d["power_law"]
            return power_law(pl["mean_k"], pl["k_max"])
        return cls(tuple(d["support"]), tuple(d["probs"]))


def power_law(mean_k_target: float, k_max: int) -> DegreeDistribution:
    """Discretised P(k) = 2 m^2 / k^3 on k = ceil(m) .. k_max, m = <k>/2,
    renormalised to sum to one."""
    m = mean_k_target / 2.0
    if m < 1:
        raise ValidationError("power law needs mean_k_target >= 2")
    lo = math.ceil(m)
    if lo > k_max:
        raise ValidationError(f"empty support: ceil(m)={lo} > k_max={k_max}")
    ks = np.arange(lo, k_max + 1)
    w = 2.0 * m * m / ks.astype(float) ** 3
    probs = w / math.fsum(w)
    return DegreeDistribution(tuple(ks.tolist()), tuple(probs.tolist()), tuple(w.tolist()))


@dataclass(frozen=True)
class ClassState:
    dist: DegreeDistribution
    states: np.ndarray  # (n_classes, 3)

    def __post_init__(self):
        X = np.array(self.states, dtype=float)
        if X.shape != (len(self.dist), 3):
            raise ValidationError(
                f"states must have shape ({len(self.dist)}, 3), got {X.shape}")
        if np.any(X < -SIMPLEX_SLACK) or np.any(np.abs(X.sum(axis=1) - 1) > SIMPLEX_SUM_TOL):
            raise ValidationError("every class state must lie on the simplex")
        X.setflags(write=False)
        object.__setattr__(self, "states", X)

    @classmethod
    def uniform(cls, dist: DegreeDistribution, x) -> "ClassState":
        return cls(dist, np.tile(np.asarray(list(x), dtype=float), (len(dist), 1)))

    @classmethod
    def from_mapping(cls, dist: DegreeDistribution, states: dict) -> "ClassState":
        if set(states) != set(dist.support):
            raise ValidationError("class states must be keyed exactly by the degree support")
        return cls(dist, np.array([list(states[k]) for k in dist.support], dtype=float))

    def state(self, k: int) -> SimplexState:
        return SimplexState.from_array(self.states[self.dist.support.index(k)])


def theta_of(dist: DegreeDistribution, X) -> np.ndarray:
    """(1/<k>) sum_k k P(k) X[k, ...] over the class axis."""
    X = np.asarray(X, dtype=float)
    w = dist.k * dist.p / dist.mean_k
    return np.tensordot(w, X, axes=(0, 0))


def psi_weighted_of(dist: DegreeDistribution, X) -> np.ndarray:
    """(1/<k>) sum_k k^2 P(k) X[k, ...] over the class axis."""
    X = np.asarray(X, dtype=float)
    w = dist.k ** 2 * dist.p / dist.mean_k
    return np.tensordot(w, X, axes=(0, 0))


def theta(cs: ClassState, i: int) -> float:
    """Probability that a random link points at a strategy-``i`` player."""
    return float(theta_of(cs.dist, cs.states[:, i - 1]))


def psi_weighted(cs: ClassState, i: int) -> float:
    return float(psi_weighted_of(cs.dist, cs.states[:, i - 1]))


def v_moment(dist: DegreeDistribution) -> float:
    """sum_k k^2 P(k); the uncommitted-mass coefficient of the theta dynamics."""
    return dist.second_moment


def continuum_mean_gap(dist: DegreeDistribution, mean_k_target: float) -> float:
    """Relative gap between the discrete mean degree and the continuum value."""
    return (dist.mean_k - mean_k_target) / mean_k_target
