"""Absolute stability under a time-varying cross-inhibition sigma(t) in [0, k].

The sigma-terms are pulled out of the symmetric dynamics into a feedback
channel. What remains is linearised at x1 = x2 = x:

    A = [[r - 3rx - gamma - alpha, -rx - gamma],
         [-rx - gamma, r - 3rx - gamma - alpha]]

With B = C = I and K = k 11^T, the loop is absolutely stable when
Z(s) = I + K (sI - A)^{-1} is strictly positive real. A quadratic
certificate V = x^T P x is built from

    A^T P + P A + eps P + L^T L = 0,    K - P = sqrt(2) L^T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .engine import IntegratorConfig, Trajectory, integrate
from .errors import ValidationError
from .game_core import ModelParams
from .unstructured import symmetric_quadratic_roots

SQRT2 = math.sqrt(2.0)
INCONCLUSIVE_BAND = 1e-9


@dataclass(frozen=True)
class SectorBound:
    k_tilde: float

    def __post_init__(self):
        # k_tilde = 0 is the trivial sector, kept for degenerate checks
        if not (math.isfinite(self.k_tilde) and self.k_tilde >= 0):
            raise ValidationError(f"sector bound must be finite and >= 0, got {self.k_tilde}")
        object.__setattr__(self, "k_tilde", float(self.k_tilde))

    @property
    def gain(self) -> np.ndarray:
        return self.k_tilde * np.ones((2, 2))


def _poly(c) -> np.ndarray:
    c = np.atleast_1d(np.asarray(c, dtype=float))
    nz = np.flatnonzero(c)
    return c[nz[0]:] if len(nz) else np.zeros(1)


@dataclass(frozen=True)
class RationalTransfer:
    """Matrix of rational functions; coefficients are highest power first."""

    num: tuple  # rows of numerator coefficient arrays
    den: tuple  # rows of denominator coefficient arrays

    def __post_init__(self):
        num = tuple(tuple(_poly(c) for c in row) for row in self.num)
        den = tuple(tuple(_poly(c) for c in row) for row in self.den)
        if len(num) != len(den) or any(len(a) != len(b) for a, b in zip(num, den)):
            raise ValidationError("numerator and denominator shapes differ")
        if any(not np.any(d) for row in den for d in row):
            raise ValidationError("zero denominator polynomial")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def scalar(cls, num, den) -> "RationalTransfer":
        return cls(((num,),), ((den,),))

    @property
    def shape(self) -> tuple:
        return (len(self.num), len(self.num[0]))

    @property
    def is_scalar(self) -> bool:
        return self.shape == (1, 1)

    def __call__(self, s: complex) -> np.ndarray:
        n, m = self.shape
        out = np.empty((n, m), dtype=complex)
        for i in range(n):
            for j in range(m):
                out[i, j] = np.polyval(self.num[i][j], s) / np.polyval(self.den[i][j], s)
        return out

    def at_infinity(self) -> np.ndarray:
        n, m = self.shape
        out = np.empty((n, m))
        for i in range(n):
            for j in range(m):
                a, b = self.num[i][j], self.den[i][j]
                if not np.any(a):
                    out[i, j] = 0.0
                elif len(a) < len(b):
                    out[i, j] = 0.0
                elif len(a) == len(b):
                    out[i, j] = a[0] / b[0]
                else:
                    out[i, j] = math.copysign(math.inf, a[0] / b[0])
        return out

    def poles(self) -> np.ndarray:
        """Roots of every entry's denominator after cancelling common roots
        with its numerator (distinct values, sorted)."""
        found = []
        for nrow, drow in zip(self.num, self.den):
            for a, b in zip(nrow, drow):
                za = list(np.roots(a)) if len(a) > 1 else []
                for pole in np.roots(b) if len(b) > 1 else []:
                    hit = [z for z in za if abs(z - pole) < 1e-10 * max(1.0, abs(pole))]
                    if hit:
                        za.remove(hit[0])
                    else:
                        found.append(complex(pole))
        uniq = []
        for z in found:
            if not any(abs(z - u) < 1e-9 * max(1.0, abs(u)) for u in uniq):
                uniq.append(z)
        return np.array(sorted(uniq, key=lambda z: (z.real, z.imag)), dtype=complex)


# --- linearisation ---------------------------------------------------------

def linearized_a(p: ModelParams, x: float) -> np.ndarray:
    p.require_symmetric()
    if not (0.0 <= x <= 0.5):
        raise ValidationError("linearisation point x must lie in [0, 0.5]")
    r, a, g = p.r, p.alpha, p.gamma
    d = r - 3 * r * x - g - a
    o = -r * x - g
    return np.array([[d, o], [o, d]])


def zeta(p: ModelParams, x: float) -> float:
    """Pole of Z(s) sits at -zeta, zeta = 4rx + 2gamma + alpha - r."""
    return 4 * p.r * x + 2 * p.gamma + p.alpha - p.r


def default_linearization_point(p: ModelParams) -> float:
    """The symmetric equilibrium coordinate at the given sigma."""
    plus, _ = symmetric_quadratic_roots(p)
    return plus


@dataclass(frozen=True)
class HurwitzVerdict:
    hurwitz: bool
    trace: float
    determinant: float
    eigenvalues: tuple
    trace_bound: Optional[float] = None  # 2(r(1 - 3/2) - gamma - alpha)
    det_factor: Optional[float] = None  # 2rx + alpha - r

    def to_dict(self) -> dict:
        return {
            "hurwitz": self.hurwitz,
            "trace": self.trace,
            "determinant": self.determinant,
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "trace_bound": self.trace_bound,
            "det_factor": self.det_factor,
        }


def hurwitz_check(m, p: Optional[ModelParams] = None, x: Optional[float] = None) -> HurwitzVerdict:
    """2x2 Hurwitz test (tr < 0 and det > 0). When the matrix is a
    linearisation, pass ``p`` and ``x`` to also report the trace bound and
    the determinant factor 2rx + alpha - r."""
    m = np.asarray(m, dtype=float)
    if m.shape != (2, 2):
        raise ValidationError("hurwitz_check expects a 2x2 matrix")
    tr = float(m[0, 0] + m[1, 1])
    det = float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    eig = tuple(complex(z) for z in np.linalg.eigvals(m))
    tb = df = None
    if p is not None and x is not None:
        tb = 2 * (p.r * (1 - 1.5) - p.gamma - p.alpha)
        df = 2 * p.r * x + p.alpha - p.r
    return HurwitzVerdict(tr < 0 and det > 0, tr, det, eig, tb, df)


# --- transfer functions ----------------------------------------------------

def z_of_s(p: ModelParams, x: float, sector: SectorBound) -> RationalTransfer:
    """Z(s) = (1/(s+zeta)) [[s+zeta+k, k], [k, s+zeta+k]]."""
    A = linearized_a(p, x)
    v = hurwitz_check(A, p, x)
    if not v.hurwitz:
        raise ValidationError(
            f"linearisation at x={x} is not Hurwitz (trace={v.trace:.4g}, det={v.determinant:.4g})")
    z, k = zeta(p, x), sector.k_tilde
    den = [1.0, z]
    return RationalTransfer((([1.0, z + k], [k]), ([k], [1.0, z + k])),
                            ((den, den), (den, den)))


def z_state_space(a, sector: SectorBound, s: complex) -> np.ndarray:
    """I + K (sI - A)^{-1} evaluated directly from the state-space data."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    return np.eye(n) + sector.gain @ np.linalg.solve(s * np.eye(n) - a, np.eye(n))


def z_hermitian_closed_form(zeta_: float, k: float, omega: float) -> np.ndarray:
    """Z(jw) + Z(-jw)^T for the symmetric loop, in closed form."""
    den = zeta_ ** 2 + omega ** 2
    d = (2 * omega ** 2 + 2 * zeta_ ** 2 + 2 * zeta_ * k) / den
    o = 2 * zeta_ * k / den
    return np.array([[d, o], [o, d]])


def default_omega_grid() -> np.ndarray:
    return np.logspace(-3, 3, 400)


@dataclass(frozen=True)
class SprVerdict:
    spr: bool
    inconclusive: bool
    poles: tuple
    poles_stable: bool
    min_eig_margin: float
    worst_omega: float
    infinity_min_eig: float

    def to_dict(self) -> dict:
        return {
            "spr": self.spr,
            "inconclusive": self.inconclusive,
            "pole_list": [[z.real, z.imag] for z in self.poles],
            "poles_stable": self.poles_stable,
            "min_eig_margin": self.min_eig_margin,
            "worst_omega": self.worst_omega,
            "infinity_min_eig": self.infinity_min_eig,
        }


def _hermitian_min_eig(z: RationalTransfer, w: float) -> float:
    Zj = z(1j * w)
    H = Zj + Zj.conj().T  # Z(-jw)^T for real-rational Z
    return float(np.min(np.linalg.eigvalsh(0.5 * (H + H.conj().T))))


def spr_check(z: RationalTransfer, omega_grid: Optional[Sequence[float]] = None) -> SprVerdict:
    """Strict positive realness: stable poles, Z(jw) + Z(-jw)^T > 0 on the
    grid (refined around the worst point), and Z(inf) + Z(inf)^T > 0."""
    grid = default_omega_grid() if omega_grid is None else np.asarray(omega_grid, dtype=float)
    if len(grid) == 0 or np.any(grid <= 0):
        raise ValidationError("omega grid must be non-empty and positive")
    grid = np.sort(grid)
    poles = z.poles()
    poles_stable = bool(np.all(poles.real < 0)) if len(poles) else True
    vals = np.array([_hermitian_min_eig(z, w) for w in grid])
    i = int(np.argmin(vals))
    worst_w, margin = float(grid[i]), float(vals[i])
    if 0 < i < len(grid) - 1:
        f = lambda lw: _hermitian_min_eig(z, math.exp(lw))
        lo, mid, hi = math.log(grid[i - 1]), math.log(grid[i]), math.log(grid[i + 1])
        if f(mid) < f(lo) and f(mid) < f(hi):
            res = minimize_scalar(f, bracket=(lo, mid, hi), method="golden")
            if res.fun < margin:
                worst_w, margin = float(math.exp(res.x)), float(res.fun)
    Zinf = z.at_infinity()
    inf_eig = float(np.min(np.linalg.eigvalsh(Zinf + Zinf.T))) if np.all(np.isfinite(Zinf)) else -math.inf
    inconclusive = abs(margin) < INCONCLUSIVE_BAND or abs(inf_eig) < INCONCLUSIVE_BAND
    ok = poles_stable and margin > 0 and inf_eig > 0 and not inconclusive
    return SprVerdict(ok, inconclusive, tuple(complex(p) for p in poles), poles_stable,
                      margin, worst_w, inf_eig)


def asym_transfer(p) -> RationalTransfer:
    """G(s) = (s + gamma1) sigma / (s (s + gamma1 + gamma2)) of the
    asymmetric loop, constant input dropped."""
    g1, g2, s = p.gamma1, p.gamma2, p.sigma
    if g1 + g2 <= 0:
        raise ValidationError("asymmetric transfer needs gamma1 + gamma2 > 0")
    return RationalTransfer.scalar([s, s * g1], [1.0, g1 + g2, 0.0])


@dataclass(frozen=True)
class PositiveRealVerdict:
    positive_real: bool
    poles: tuple
    rhp_poles: tuple
    axis_poles: tuple
    worst_re: float
    worst_omega: float
    skipped: tuple

    def to_dict(self) -> dict:
        c = lambda zs: [[z.real, z.imag] for z in zs]
        return {
            "positive_real": self.positive_real,
            "poles": c(self.poles),
            "rhp_poles": c(self.rhp_poles),
            "axis_poles": c(self.axis_poles),
            "worst_re": self.worst_re,
            "worst_omega": self.worst_omega,
            "skipped": list(self.skipped),
        }


PR_RE_TOL = 1e-12


def positive_real_check(g: RationalTransfer, omega_grid: Optional[Sequence[float]] = None,
                        axis_tol: float = 1e-12) -> PositiveRealVerdict:
    """(1) no pole with Re s > 0; (2) Re G(jw) >= 0 on the grid."""
    if not g.is_scalar:
        raise ValidationError("positive_real_check expects a scalar transfer function")
    grid = default_omega_grid() if omega_grid is None else np.asarray(omega_grid, dtype=float)
    poles = g.poles()
    rhp = tuple(complex(z) for z in poles if z.real > axis_tol)
    axis = tuple(complex(z) for z in poles if abs(z.real) <= axis_tol)
    worst_re, worst_w, skipped = math.inf, math.nan, []
    for w in grid:
        if any(abs(1j * w - z) < 1e-12 * max(1.0, abs(w)) for z in axis):
            skipped.append(float(w))
            continue
        re = float(g(1j * w)[0, 0].real)
        if re < worst_re:
            worst_re, worst_w = re, float(w)
    ok = not rhp and worst_re >= -PR_RE_TOL
    return PositiveRealVerdict(ok, tuple(complex(z) for z in poles), rhp, axis,
                               worst_re, worst_w, tuple(skipped))


# --- KYP certificate -------------------------------------------------------

@dataclass(frozen=True)
class KypCertificate:
    found: bool
    epsilon: float
    p_matrix: Optional[np.ndarray]
    l_matrix: Optional[np.ndarray]
    residuals: tuple  # (lyapunov equation, K - P - sqrt(2) L^T)
    iterations: int
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "epsilon": self.epsilon,
            "P": None if self.p_matrix is None else self.p_matrix.tolist(),
            "L": None if self.l_matrix is None else self.l_matrix.tolist(),
            "residuals": list(self.residuals),
            "iterations": self.iterations,
            "message": self.message,
        }


def kyp_residuals(a, K, P, L, eps) -> tuple:
    r1 = a.T @ P + P @ a + eps * P + L.T @ L
    r2 = K - P - SQRT2 * L.T
    return float(np.max(np.abs(r1))), float(np.max(np.abs(r2)))


PD_RTOL = 1e-9


def _is_pd(P) -> bool:
    # relative floor: Newton can land on the singular root with a round-off sized eigenvalue
    eig = np.linalg.eigvalsh(0.5 * (P + P.T))
    return eig[0] > PD_RTOL * max(eig[-1], 1.0)


_SYM_BASIS = (np.array([[1.0, 0.0], [0.0, 0.0]]),
              np.array([[0.0, 1.0], [1.0, 0.0]]),
              np.array([[0.0, 0.0], [0.0, 1.0]]))


def _vec(S):
    return np.array([S[0, 0], S[0, 1], S[1, 1]])


def _mat(v):
    return np.array([[v[0], v[1]], [v[1], v[2]]])


def _newton(a, K, eps, P0, max_iter, tol):
    """Damped Newton on F(P) = A^T P + P A + eps P + (K - P)^2 / 2."""
    def F(P):
        D = K - P
        return a.T @ P + P @ a + eps * P + 0.5 * D @ D

    P = P0.copy()
    res = np.max(np.abs(F(P)))
    for it in range(1, max_iter + 1):
        D = K - P
        J = np.column_stack([
            _vec(a.T @ E + E @ a + eps * E - 0.5 * (D @ E + E @ D)) for E in _SYM_BASIS])
        try:
            step = np.linalg.solve(J, -_vec(F(P)))
        except np.linalg.LinAlgError:
            return P, res, it, "singular Newton system"
        lam = 1.0
        while lam > 1e-8:
            cand = P + lam * _mat(step)
            cres = np.max(np.abs(F(cand)))
            if cres < res or cres < tol:
                break
            lam *= 0.5
        P, res = cand, cres
        if res < tol:
            return P, res, it, "converged"
    return P, res, max_iter, "no convergence"


KYP_EPSILON = 1e-3
KYP_BACKOFF = 0.1
KYP_RETRIES = 3
KYP_TOL = 1e-12
# fallback Newton starts; P0 = I may converge to a singular root
KYP_STARTS = (1.0, 10.0, 100.0, 1000.0)


def kyp_solve(a, sector: SectorBound, epsilon: Optional[float] = None,
              max_iter: int = 200) -> KypCertificate:
    """Find P = P^T > 0 and L with A^T P + P A + eps P + L^T L = 0 and
    K - P = sqrt(2) L^T, K = k 11^T.

    L is eliminated as (K - P)/sqrt(2) and the remaining quadratic matrix
    equation is solved by damped Newton. Without ``epsilon`` the solve
    starts at 1e-3 and backs off by 10x up to three times.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (2, 2) or np.max(np.abs(a - a.T)) > 1e-12:
        raise ValidationError("kyp_solve expects a symmetric 2x2 matrix")
    if not hurwitz_check(a).hurwitz:
        raise ValidationError("kyp_solve needs a Hurwitz matrix")
    K = sector.gain
    if epsilon is None:
        eps_list = [KYP_EPSILON * KYP_BACKOFF ** i for i in range(KYP_RETRIES + 1)]
    else:
        if epsilon <= 0:
            raise ValidationError("epsilon must be positive")
        eps_list = [epsilon]
    last = None
    for eps in eps_list:
        for scale in KYP_STARTS:
            P, res, its, msg = _newton(a, K, eps, scale * np.eye(2), max_iter, KYP_TOL)
            P = 0.5 * (P + P.T)
            L = (K - P).T / SQRT2
            resid = kyp_residuals(a, K, P, L, eps)
            if msg == "converged" and _is_pd(P) and max(resid) < 1e-8:
                return KypCertificate(True, eps, P, L, resid, its, f"converged from {scale:g} I")
            last = KypCertificate(False, eps, P, L, resid, its,
                                  msg if msg != "converged" else "solution not positive definite")
    return last


# --- sector-bounded simulation ---------------------------------------------

def constant_signal(value: float) -> Callable:
    return lambda t: value


def sinusoid_signal(k_tilde: float, freq: float = 1.0, phase: float = 0.0) -> Callable:
    """k (1 + sin(freq t + phase)) / 2."""
    return lambda t: 0.5 * k_tilde * (1.0 + np.sin(freq * t + phase))


def switching_signal(k_tilde: float, dwell: float, horizon: float, seed: int,
                     n: Optional[int] = None) -> Callable:
    """Piecewise-constant values drawn uniformly in [0, k] every ``dwell``
    time units. With ``n`` it returns ``n`` independent signals as an array."""
    rng = np.random.default_rng(seed)
    m = int(np.ceil(horizon / dwell)) + 2
    vals = rng.uniform(0.0, k_tilde, size=(m,) if n is None else (m, n))

    def f(t):
        # left-continuous so a step ending on a switch uses the old value
        j = max(int(np.ceil(t / dwell - 1e-9)) - 1, 0)
        return vals[min(j, m - 1)]

    return f


def check_signal_range(signal: Callable, sector: SectorBound, horizon: float,
                       n_samples: int = 2001) -> None:
    for t in np.linspace(0.0, horizon, n_samples):
        v = np.asarray(signal(t))
        if np.any(v < 0) or np.any(v > sector.k_tilde) or not np.all(np.isfinite(v)):
            raise ValidationError(
                f"sigma signal leaves [0, {sector.k_tilde}] at t={t:.6g}")


def sector_rhs(p: ModelParams, signal: Callable, alpha_on_cross: bool = False):
    """Symmetric dynamics with sigma replaced by ``signal(t)``.

    ``alpha_on_cross=True`` places alpha on the cross term, x2 (sigma x1 +
    alpha), as in one printed variant of the model; that variant does not
    keep the simplex invariant (from (0, 1) it drives x1 negative).
    """
    r, a, g = p.r, p.alpha, p.gamma

    def f(t, x):
        s = signal(t)
        x1, x2 = x[0], x[1]
        x3 = 1.0 - x1 - x2
        if alpha_on_cross:
            return np.stack([x3 * (r * x1 + g) - x2 * (s * x1 + a),
                             x3 * (r * x2 + g) - x1 * (s * x2 + a)])
        return np.stack([x3 * (r * x1 + g) - x1 * (a + s * x2),
                         x3 * (r * x2 + g) - x2 * (a + s * x1)])

    return f


def lure_rhs(p: ModelParams, x_ref: float, signal: Callable):
    """Linearised loop around x1 = x2 = x_ref with the sigma channel
    psi(t, y) = sigma(t) x_ref 11^T y fed back negatively."""
    A = linearized_a(p, x_ref)

    def f(t, d):
        s = signal(t)
        fb = s * x_ref * (d[0] + d[1])
        return np.einsum("ij,j...->i...", A, d) - np.stack([fb, fb])

    return f


@dataclass
class SectorReport:
    trajectory: Trajectory  # states are simplex points (x1, x2, x3)
    loop: str
    sup_norm: float
    bounded: bool
    min_coordinate: float
    max_sum_error: float
    final_spread: float  # max |x - x_final| over the last 10% of the run
    lyapunov: Optional[np.ndarray] = None  # V(t) = d^T P d, d = (x1, x2) - x_ref
    lyapunov_max_rise: Optional[float] = None  # max relative step-to-step increase
    lyapunov_envelope_ok: Optional[bool] = None  # V(t) <= V(0) exp(-eps t) (linear loop)
    sector_violation: Optional[float] = None  # max psi^T (psi - K y), must be <= 0
    extra: dict = field(default_factory=dict)

    def summary(self) -> dict:
        out = {
            "loop": self.loop,
            "sup_norm": self.sup_norm,
            "bounded": self.bounded,
            "min_coordinate": self.min_coordinate,
            "max_sum_error": self.max_sum_error,
            "final_spread": self.final_spread,
        }
        if self.lyapunov is not None:
            out.update(lyapunov_initial=np.max(self.lyapunov[0]).item(),
                       lyapunov_final=np.max(self.lyapunov[-1]).item(),
                       lyapunov_max_rise=self.lyapunov_max_rise,
                       lyapunov_envelope_ok=self.lyapunov_envelope_ok)
        if self.sector_violation is not None:
            out["sector_violation"] = self.sector_violation
        out.update(self.extra)
        return out


ENVELOPE_RTOL = 1e-9


def simulate_sector(p: ModelParams, sigma_signal: Callable, x0, horizon: float, step: float,
                    sector: Optional[SectorBound] = None,
                    certificate: Optional[KypCertificate] = None,
                    x_ref: Optional[float] = None, loop: str = "nonlinear",
                    alpha_on_cross: bool = False, check_range: bool = True) -> SectorReport:
    """Integrate the dynamics with a time-varying sigma(t).

    ``loop="nonlinear"`` runs the full symmetric dynamics on the simplex.
    ``loop="lure"`` runs the linearised loop around (x_ref, x_ref), the
    setting in which a KYP certificate guarantees V(t) <= V(0) e^{-eps t}.
    ``x0`` holds (x1, x2) with optional trailing batch axes; ``sigma_signal``
    may return one value per batch member.
    """
    if loop not in ("nonlinear", "lure"):
        raise ValidationError(f"unknown loop {loop!r}")
    if sector is not None and check_range:
        check_signal_range(sigma_signal, sector, horizon)
    if x_ref is None:
        x_ref = default_linearization_point(p.with_sigma(0.0))
    x0 = np.array(x0, dtype=float)
    cfg = IntegratorConfig(method="rk4_fixed", step=step, horizon=horizon)
    if loop == "nonlinear":
        traj = integrate(sector_rhs(p, sigma_signal, alpha_on_cross), x0, cfg)
        planar = traj.states
    else:
        dtraj = integrate(lure_rhs(p, x_ref, sigma_signal), x0 - x_ref, cfg)
        planar = dtraj.states + x_ref
    x3 = 1.0 - planar[:, 0] - planar[:, 1]
    full = np.concatenate([planar, x3[:, None]], axis=1)
    traj = Trajectory(dtraj.times if loop == "lure" else traj.times, full,
                      {"integrator": "rk4_fixed", "step": step, "loop": loop})
    tail = full[int(0.9 * len(full)):]
    report = SectorReport(
        trajectory=traj,
        loop=loop,
        sup_norm=float(np.max(np.abs(full))),
        bounded=bool(np.all(np.isfinite(full)) and np.max(np.abs(full)) < 1e6),
        min_coordinate=float(np.min(full)),
        max_sum_error=float(np.max(np.abs(full.sum(axis=1) - 1.0))),
        final_spread=float(np.max(np.abs(tail - full[-1]))),
    )
    d = planar - x_ref
    if certificate is not None and certificate.found:
        P = certificate.p_matrix
        V = np.einsum("ti...,ij,tj...->t...", d, P, d)
        prev = np.maximum(V[:-1], 1e-300)
        report.lyapunov = V
        report.lyapunov_max_rise = float(np.max((V[1:] - V[:-1]) / prev)) if len(V) > 1 else 0.0
        decay = np.exp(-certificate.epsilon * traj.times)
        decay = decay.reshape((-1,) + (1,) * (V.ndim - 1))
        report.lyapunov_envelope_ok = bool(np.all(V <= V[0] * decay * (1 + ENVELOPE_RTOL) + 1e-18))
    if sector is not None and loop == "lure":
        sig = np.stack([np.broadcast_to(sigma_signal(t), d.shape[2:]) for t in traj.times])
        y = d
        psi = sig[:, None] * x_ref * (y[:, 0] + y[:, 1])[:, None] * np.ones_like(y)
        Ky = sector.k_tilde * (y[:, 0] + y[:, 1])[:, None] * np.ones_like(y)
        report.sector_violation = float(np.max(np.sum(psi * (psi - Ky), axis=1)))
    return report


def ellipsoid_start_radius(P, x_ref: float) -> float:
    """Largest c with {d : d^T P d <= c} inside the simplex around (x_ref, x_ref)."""
    Pinv = np.linalg.inv(P)
    c = math.inf
    for n, b in ((np.array([-1.0, 0.0]), x_ref), (np.array([0.0, -1.0]), x_ref),
                 (np.array([1.0, 1.0]), 1.0 - 2.0 * x_ref)):
        c = min(c, b * b / float(n @ Pinv @ n))
    return c


def ellipsoid_starts(P, x_ref: float, n: int, seed: int, fill: float = 0.95) -> np.ndarray:
    """``n`` random (x1, x2) starts, shape (2, n), inside the invariant
    sublevel set of V scaled by ``fill``."""
    rng = np.random.default_rng(seed)
    c = fill * ellipsoid_start_radius(P, x_ref)
    ang = rng.uniform(0, 2 * np.pi, n)
    rad = np.sqrt(rng.uniform(0, 1, n))
    u = np.stack([np.cos(ang), np.sin(ang)]) * rad
    # map the unit disc onto {d^T P d <= c}
    Lc = np.linalg.cholesky(P)  # P = Lc Lc^T
    d = np.linalg.solve(Lc.T, u) * math.sqrt(c)
    return d + x_ref


def frozen_band(p: ModelParams, sector: SectorBound, x_ref: float, P=None, n: int = 201) -> dict:
    """Symmetric equilibria for every frozen sigma in [0, k].

    In the nonlinear loop the sigma channel also carries a constant term
    -sigma x_ref^2, so trajectories settle onto this band rather than onto
    x_ref itself. With ``P`` the band's largest V value is returned as the
    residual level.
    """
    xs = np.array([default_linearization_point(p.with_sigma(s))
                   for s in np.linspace(0.0, sector.k_tilde, n)])
    out = {"x_low": float(xs.min()), "x_high": float(xs.max()), "residual_v": None}
    if P is not None:
        d = xs - x_ref
        out["residual_v"] = float(np.max(d * d * np.sum(P)))
    return out
