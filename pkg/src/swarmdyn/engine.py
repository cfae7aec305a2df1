"""Numerical substrate: fixed-step RK4, adaptive Dormand-Prince, settling
times and bisection on a boolean predicate."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import NumericalError, ValidationError

RHS = Callable[[float, np.ndarray], np.ndarray]

METHODS = ("rk4_fixed", "rk45_adaptive")


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk4_fixed"
    step: float = 1e-3
    horizon: float = 50.0
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    # stop once ||rhs||_inf < steady_tol for `steady_window` consecutive steps
    steady_tol: Optional[float] = None
    steady_window: int = 10
    # keep every n-th fixed step in the stored trajectory
    record_every: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"unknown integrator method {self.method!r}")
        if not (self.step > 0 and np.isfinite(self.step)):
            raise ValidationError("step must be positive")
        if not (self.horizon > 0 and np.isfinite(self.horizon)):
            raise ValidationError("horizon must be positive")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValidationError("tolerances must be positive")
        if self.record_every < 1:
            raise ValidationError("record_every must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "IntegratorConfig":
        return cls(**d)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "step": self.step,
            "horizon": self.horizon,
            "rel_tol": self.rel_tol,
            "abs_tol": self.abs_tol,
            "steady_tol": self.steady_tol,
        }


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), *state_shape)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.times.ndim != 1 or len(self.times) != len(self.states):
            raise ValueError("times and states must have matching length")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def _rk4_step(rhs: RHS, t: float, x: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(t, x)
    k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2)
    k4 = rhs(t + h, x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_finite(x: np.ndarray, t: float):
    if not np.all(np.isfinite(x)):
        raise NumericalError(f"non-finite state at t={t:.6g}")


def _integrate_rk4(rhs: RHS, x0: np.ndarray, cfg: IntegratorConfig) -> Trajectory:
    h = cfg.step
    n = int(np.ceil(cfg.horizon / h - 1e-9))
    times = [0.0]
    states = [x0.copy()]
    x = x0.copy()
    quiet = 0
    for i in range(n):
        t = i * h
        x = _rk4_step(rhs, t, x, h)
        _check_finite(x, t + h)
        keep = (i + 1) % cfg.record_every == 0 or i == n - 1
        if cfg.steady_tol is not None:
            if np.max(np.abs(rhs(t + h, x))) < cfg.steady_tol:
                quiet += 1
            else:
                quiet = 0
            if quiet >= cfg.steady_window:
                times.append((i + 1) * h)
                states.append(x.copy())
                break
        if keep:
            times.append((i + 1) * h)
            states.append(x.copy())
    return Trajectory(np.array(times), np.array(states),
                      {"integrator": "rk4_fixed", "step": h})


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
                187 / 2100, 1 / 40])
_E = _B5 - _B4


def _integrate_rk45(rhs: RHS, x0: np.ndarray, cfg: IntegratorConfig) -> Trajectory:
    # PI controller gains for a 5th order pair (Hairer & Wanner, II.4)
    beta = 0.04
    alpha = 0.2 - 0.75 * beta
    safety, fac_min, fac_max = 0.9, 0.2, 5.0
    h_min = 1e-14 * max(1.0, cfg.horizon)

    t, x = 0.0, x0.copy()
    h = min(cfg.step, cfg.horizon)
    err_prev = 1e-4
    times, states = [t], [x.copy()]
    k = [None] * 7
    k[0] = rhs(t, x)
    quiet = 0
    while t < cfg.horizon:
        h = min(h, cfg.horizon - t)
        for s in range(1, 7):
            dx = sum(a * k[j] for j, a in enumerate(_A[s]) if a != 0.0)
            k[s] = rhs(t + _C[s] * h, x + h * dx)
        x_new = x + h * sum(b * k[j] for j, b in enumerate(_B5) if b != 0.0)
        err_vec = h * sum(e * k[j] for j, e in enumerate(_E))
        scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(x), np.abs(x_new))
        err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))
        if not np.isfinite(err):
            raise NumericalError(f"non-finite error estimate at t={t:.6g}")
        if err <= 1.0:
            t += h
            x = x_new
            _check_finite(x, t)
            k[0] = k[6]  # FSAL
            times.append(t)
            states.append(x.copy())
            err = max(err, 1e-10)
            fac = safety * err ** (-alpha) * err_prev ** beta
            h *= min(fac_max, max(fac_min, fac))
            err_prev = err
            if cfg.steady_tol is not None:
                quiet = quiet + 1 if np.max(np.abs(k[0])) < cfg.steady_tol else 0
                if quiet >= cfg.steady_window:
                    break
        else:
            h *= max(fac_min, safety * err ** (-alpha))
        if h < h_min:
            raise NumericalError(f"step size underflow at t={t:.6g}")
    return Trajectory(np.array(times), np.array(states),
                      {"integrator": "rk45_adaptive", "rel_tol": cfg.rel_tol,
                       "abs_tol": cfg.abs_tol})


def integrate(rhs: RHS, x0, cfg: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Integrate ``x' = rhs(t, x)`` from ``x0`` over ``[0, cfg.horizon]``.

    ``x0`` may have any shape; ``rhs`` must return an array of that shape.
    Batched simulations are therefore just extra trailing axes.
    """
    x0 = np.array(x0, dtype=float)
    _check_finite(x0, 0.0)
    if cfg.method == "rk4_fixed":
        return _integrate_rk4(rhs, x0, cfg)
    return _integrate_rk45(rhs, x0, cfg)


def settle_time(traj: Trajectory, target, tol: float) -> Optional[float]:
    """First time after which ``||state - target||_inf < tol`` for the rest
    of the trajectory, or None if the final state is not within ``tol``."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    target = np.asarray(target, dtype=float)
    dev = np.abs(traj.states - target).reshape(len(traj), -1).max(axis=1)
    inside = dev < tol
    if not inside[-1]:
        return None
    outside = np.flatnonzero(~inside)
    if len(outside) == 0:
        return float(traj.times[0])
    return float(traj.times[outside[-1] + 1])


def bifurcation_bisect(low: float, high: float, predicate: Callable[[float], bool],
                       tol: float, max_iter: int = 200) -> float:
    """Locate the parameter where ``predicate`` flips, to within ``tol``."""
    p_low, p_high = bool(predicate(low)), bool(predicate(high))
    if p_low == p_high:
        raise ValueError(
            f"predicate has the same value ({p_low}) at both ends [{low}, {high}]")
    for _ in range(max_iter):
        if abs(high - low) < tol:
            break
        mid = 0.5 * (low + high)
        if bool(predicate(mid)) == p_low:
            low = mid
        else:
            high = mid
    return 0.5 * (low + high)
