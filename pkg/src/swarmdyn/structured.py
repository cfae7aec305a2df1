"""Degree-class dynamics on a network.

Each class k sees the network only through the link-weighted shares
theta_1, theta_2 scaled by its connectivity psi_k = k / k_max::

    x1k' = x3k (psi_k r theta1 + gamma) - x1k (alpha + psi_k sigma theta2)
    x2k' = x3k (psi_k r theta2 + gamma) - x2k (alpha + psi_k sigma theta1)

Note that psi_k depends on the largest degree in the support: adding one
high-degree class rescales every psi_k.

Micro states are ``(n_classes, 2)`` arrays of (x1, x2); x3 is implied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, NumericalError, ValidationError
from .game_core import ModelParams
from .network import ClassState, DegreeDistribution, psi_weighted_of, theta_of, v_moment

SIMPLEX_EXIT_TOL = 1e-6


def _per_class_rhs(p: ModelParams, psi, x1, x2, th1, th2):
    r, s, a, g = p.r, p.sigma, p.alpha, p.gamma
    x3 = 1.0 - x1 - x2
    return (x3 * (psi * r * th1 + g) - x1 * (a + psi * s * th2),
            x3 * (psi * r * th2 + g) - x2 * (a + psi * s * th1))


def structured_rhs_array(p: ModelParams, dist: DegreeDistribution, X) -> np.ndarray:
    """Right-hand side for micro states ``X`` of shape (n_classes, 2, ...),
    with theta computed from ``X`` itself."""
    th1 = theta_of(dist, X[:, 0])
    th2 = theta_of(dist, X[:, 1])
    psi = dist.psi.reshape((-1,) + (1,) * (X.ndim - 2))
    d1, d2 = _per_class_rhs(p, psi, X[:, 0], X[:, 1], th1, th2)
    return np.stack([d1, d2], axis=1)


def rhs_structured(p: ModelParams, cs: ClassState) -> np.ndarray:
    """Per-class (dx1, dx2), one row per degree in ``cs.dist.support``."""
    p.require_symmetric()
    return structured_rhs_array(p, cs.dist, cs.states[:, :2])


@dataclass(frozen=True)
class MeanFieldSystem:
    a_matrix: np.ndarray
    c_vector: np.ndarray
    psi_k: float
    theta: float

    def rhs(self, t, x):
        return self.a_matrix @ x + self.c_vector


def _check_unit(name, v):
    if not (0.0 <= v <= 1.0):
        raise ValidationError(f"{name} must lie in [0, 1], got {v}")


def mean_field_system(p: ModelParams, psi_k: float, theta: float) -> MeanFieldSystem:
    """Affine per-class system x' = A x + c with theta1 = theta2 = theta frozen."""
    p.require_symmetric()
    _check_unit("psi_k", psi_k)
    _check_unit("theta", theta)
    r, s, a, g = p.r, p.sigma, p.alpha, p.gamma
    d = -(r + s) * psi_k * theta - a - g
    o = -psi_k * r * theta - g
    c = psi_k * r * theta + g
    return MeanFieldSystem(np.array([[d, o], [o, d]]), np.array([c, c]), psi_k, theta)


def mean_field_eigenvalues(p: ModelParams, psi_k: float, theta: float) -> tuple:
    """(fast, slow) eigenvalues of the mean-field matrix.

    Written as -(2r+sigma) psi theta - alpha - 2 gamma and
    -sigma psi theta - alpha, which equal -(sigma+r) psi theta - alpha - gamma
    -/+ (psi r theta + gamma) but are exact at psi = 0.
    """
    p.require_symmetric()
    _check_unit("psi_k", psi_k)
    _check_unit("theta", theta)
    r, s, a, g = p.r, p.sigma, p.alpha, p.gamma
    fast = -(2 * r + s) * psi_k * theta - a - 2 * g
    slow = -s * psi_k * theta - a
    return (fast, slow)


def mean_field_equilibrium(p: ModelParams, psi_k: float, theta: float) -> np.ndarray:
    """Steady state -A^{-1} c as (x1, x2, x3)."""
    p.require_symmetric()
    _check_unit("psi_k", psi_k)
    _check_unit("theta", theta)
    r, s, a, g = p.r, p.sigma, p.alpha, p.gamma
    den = (2 * r + s) * psi_k * theta + a + 2 * g
    if den <= 0:
        raise DomainError("mean-field matrix is singular (needs alpha + 2 gamma > 0)")
    x = (psi_k * r * theta + g) / den
    return np.array([x, x, 1.0 - 2.0 * x])


@dataclass(frozen=True)
class MacroState:
    theta1: float
    theta2: float

    def __post_init__(self):
        if self.theta1 < 0 or self.theta2 < 0 or self.theta1 + self.theta2 > 1 + 1e-9:
            raise ValidationError(f"invalid macro state ({self.theta1}, {self.theta2})")


def _macro_rhs(p: ModelParams, dist: DegreeDistribution, th1, th2, psi1, psi2, v):
    r, s, a, g = p.r, p.sigma, p.alpha, p.gamma
    km = dist.k_max
    uncommitted = v / dist.mean_k - psi1 - psi2
    common = g - th1 * g - th2 * g
    d1 = (r * th1 / km) * uncommitted - (s * th2 / km) * psi1 - th1 * a + common
    d2 = (r * th2 / km) * uncommitted - (s * th1 / km) * psi2 - th2 * a + common
    return d1, d2


def rhs_macro(p: ModelParams, dist: DegreeDistribution, m: MacroState,
              psi1: float, psi2: float, v: float) -> tuple:
    """theta dynamics given the k^2-weighted aggregates psi1, psi2 and
    v = sum k^2 P(k)."""
    p.require_symmetric()
    return _macro_rhs(p, dist, m.theta1, m.theta2, psi1, psi2, v)


@dataclass
class MicroMacroTrajectory:
    dist: DegreeDistribution
    times: np.ndarray
    micro: np.ndarray  # (T, n_classes, 3)
    theta: np.ndarray  # (T, 2) evolved by the macro equation
    theta_micro: np.ndarray  # (T, 2) recomputed from micro states
    step: float

    def consistency_gap(self) -> float:
        return float(np.max(np.abs(self.theta - self.theta_micro)))

    def final_class_state(self) -> ClassState:
        X = np.clip(self.micro[-1], 0.0, None)
        return ClassState(self.dist, X / X.sum(axis=1, keepdims=True))


def _rk4(f, x, h):
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def simulate_micro_macro(p: ModelParams, cs0: ClassState, horizon: float, step: float,
                         freeze_theta: bool = False, theta0: Optional[tuple] = None,
                         steady_tol: Optional[float] = None, steady_window: int = 10,
                         record_every: int = 1) -> MicroMacroTrajectory:
    """Coupled simulation of the per-class equations and the theta dynamics.

    Each step: (1) psi aggregates from the micro states, (2) advance theta
    with those aggregates frozen, (3) advance every class with the new
    theta. With ``freeze_theta`` theta stays at ``theta0`` (the mean-field
    response).
    """
    p.require_symmetric()
    if step <= 0 or horizon <= 0:
        raise ValidationError("step and horizon must be positive")
    dist = cs0.dist
    psi = dist.psi
    v = v_moment(dist)
    X = cs0.states[:, :2].copy()
    if theta0 is None:
        th = np.array([theta_of(dist, X[:, 0]), theta_of(dist, X[:, 1])])
    else:
        th = np.array(theta0, dtype=float)

    def micro_f(theta_now):
        def f(Y):
            d1, d2 = _per_class_rhs(p, psi, Y[:, 0], Y[:, 1], theta_now[0], theta_now[1])
            return np.stack([d1, d2], axis=1)
        return f

    def record(t):
        times.append(t)
        micro.append(np.column_stack([X, 1.0 - X.sum(axis=1)]))
        thetas.append(th.copy())
        thetas_micro.append([theta_of(dist, X[:, 0]), theta_of(dist, X[:, 1])])

    times, micro, thetas, thetas_micro = [], [], [], []
    record(0.0)
    n = int(np.ceil(horizon / step - 1e-9))
    quiet = 0
    for i in range(n):
        if not freeze_theta:
            psi1 = psi_weighted_of(dist, X[:, 0])
            psi2 = psi_weighted_of(dist, X[:, 1])
            th = _rk4(lambda T: np.array(_macro_rhs(p, dist, T[0], T[1], psi1, psi2, v)),
                      th, step)
        X = _rk4(micro_f(th), X, step)
        t = (i + 1) * step
        x3 = 1.0 - X.sum(axis=1)
        if (np.min(X) < -SIMPLEX_EXIT_TOL or np.min(x3) < -SIMPLEX_EXIT_TOL
                or np.min(th) < -SIMPLEX_EXIT_TOL or th.sum() > 1 + SIMPLEX_EXIT_TOL
                or not np.all(np.isfinite(X))):
            raise NumericalError(
                f"state left the simplex at t={t:.6g}; retry with step={step / 2:g}")
        done = False
        if steady_tol is not None:
            res = np.max(np.abs(micro_f(th)(X)))
            if not freeze_theta:
                psi1 = psi_weighted_of(dist, X[:, 0])
                psi2 = psi_weighted_of(dist, X[:, 1])
                res = max(res, np.max(np.abs(_macro_rhs(p, dist, th[0], th[1], psi1, psi2, v))))
            quiet = quiet + 1 if res < steady_tol else 0
            done = quiet >= steady_window
        if done or (i + 1) % record_every == 0 or i == n - 1:
            record(t)
        if done:
            break
    return MicroMacroTrajectory(dist, np.array(times), np.array(micro), np.array(thetas),
                                np.array(thetas_micro), step)


def structured_threshold(p: ModelParams, dist: DegreeDistribution, psi: float) -> float:
    """Cross-inhibition bound 2r - r V / (<k> Psi) + alpha k_max / Psi."""
    p.require_symmetric()
    if psi == 0:
        raise DomainError("structured threshold undefined for Psi = 0")
    r, a = p.r, p.alpha
    return 2 * r - r * v_moment(dist) / (dist.mean_k * psi) + a * dist.k_max / psi


def symmetric_equilibrium(p: ModelParams, dist: DegreeDistribution) -> tuple:
    """Symmetric steady state of the full structured system.

    Returns (theta, X) with X the (n_classes, 3) per-class states; theta
    solves theta = theta_of(mean-field equilibria at theta).
    """
    p.require_symmetric()
    psi = dist.psi
    r, s, a, g = p.r, p.sigma, p.alpha, p.gamma

    def x1_at(th):
        return (psi * r * th + g) / ((2 * r + s) * psi * th + a + 2 * g)

    if a + 2 * g <= 0:
        raise DomainError("symmetric structured equilibrium needs alpha + 2 gamma > 0")
    gap = lambda th: float(theta_of(dist, x1_at(th))) - th
    if gap(0.0) <= 0:
        th = 0.0
    else:
        th = brentq(gap, 0.0, 0.5, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    x1 = x1_at(th)
    return th, np.column_stack([x1, x1, 1.0 - 2 * x1])


THRESHOLD_HORIZON = 100.0
THRESHOLD_STEP = 0.02


def returns_to_symmetric_structured(p: ModelParams, dist: DegreeDistribution,
                                    perturbation: float = 1e-3,
                                    horizon: float = THRESHOLD_HORIZON,
                                    step: float = THRESHOLD_STEP) -> bool:
    th, X = symmetric_equilibrium(p, dist)
    X0 = X.copy()
    X0[:, 0] += perturbation
    X0[:, 1] -= perturbation
    X0 = np.clip(X0, 0.0, None)
    X0[:, 2] = 1.0 - X0[:, 0] - X0[:, 1]
    traj = simulate_micro_macro(p, ClassState(dist, X0), horizon, step, record_every=10**9)
    d0 = np.max(np.abs(X0[:, :2] - X[:, :2]))
    d1 = np.max(np.abs(traj.micro[-1][:, :2] - X[:, :2]))
    return bool(d1 < d0)


def empirical_structured_threshold(p: ModelParams, dist: DegreeDistribution,
                                   low: float = 0.0, high: float = 10.0,
                                   tol: float = 1e-3, **kw) -> Optional[tuple]:
    """Bisect sigma on the micro-macro return-to-symmetry predicate.

    Returns the final bracket (low, high) or None when the predicate does
    not change sign on [low, high].
    """
    pred = lambda s: returns_to_symmetric_structured(p.with_sigma(s), dist, **kw)
    if pred(low) == pred(high):
        return None
    lo, hi = low, high
    p_lo = pred(lo)
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        if pred(mid) == p_lo:
            lo = mid
        else:
            hi = mid
    return (lo, hi)


def psi_at_symmetric_equilibrium(p: ModelParams, dist: DegreeDistribution) -> float:
    _, X = symmetric_equilibrium(p, dist)
    return float(psi_weighted_of(dist, X[:, 0]))


def threshold_comparison(p: ModelParams, dist: DegreeDistribution,
                         empirical: bool = True) -> dict:
    """Evaluate the structured bound next to the well-mixed threshold.

    The structured bound depends on Psi, itself a function of sigma through
    the symmetric equilibrium. Two evaluations are reported: with Psi taken
    at sigma = sigma* and the self-consistent sigma solving
    sigma = bound(Psi(sigma)) when one exists in [0, 100 sigma*].
    """
    from .unstructured import consensus_threshold

    sig_star = consensus_threshold(p)
    at_star = structured_threshold(p, dist, psi_at_symmetric_equilibrium(p.with_sigma(sig_star), dist))

    def excess(s):
        q = p.with_sigma(s)
        return structured_threshold(q, dist, psi_at_symmetric_equilibrium(q, dist)) - s

    self_consistent = None
    hi = max(100.0 * sig_star, 1.0)
    if excess(0.0) > 0 and excess(hi) < 0:
        self_consistent = brentq(excess, 0.0, hi, xtol=1e-12)
    out = {
        "sigma_star_well_mixed": sig_star,
        "structured_bound_at_sigma_star": at_star,
        "structured_bound_self_consistent": self_consistent,
        "ratio_at_sigma_star": at_star / sig_star if sig_star else math.inf,
        "ratio_self_consistent": (self_consistent / sig_star
                                  if self_consistent is not None and sig_star else None),
        "empirical_bracket": None,
    }
    if empirical:
        br = empirical_structured_threshold(p, dist, 0.0, 4.0 * sig_star if sig_star else 1.0,
                                            tol=1e-3 * max(sig_star, 1e-3))
        out["empirical_bracket"] = list(br) if br is not None else None
    return out
