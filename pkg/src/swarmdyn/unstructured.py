"""Well-mixed (unstructured) symmetric model on the simplex.

    x1' = x3 (r x1 + gamma) - x1 (alpha + sigma x2)
    x2' = x3 (r x2 + gamma) - x2 (alpha + sigma x1),   x3 = 1 - x1 - x2
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .engine import IntegratorConfig, bifurcation_bisect, integrate
from .errors import DomainError, DomainWarning, SingularThresholdError, ValidationError
from .game_core import ModelParams, SimplexState

CASE1 = "Case1"
CASE1_AUX = "Case1Aux"
CASE2_PLUS = "Case2Plus"
CASE2_MINUS = "Case2Minus"
CASE3 = "Case3"

DEGENERATE_BAND = 1e-9
FEASIBLE_SLACK = 1e-12
# relative distance to the threshold under which the Case 3 point is exact
CASE3_RTOL = 1e-9


def rhs(p: ModelParams, x1, x2):
    """Planar right-hand side; ``x1`` and ``x2`` may be arrays."""
    p.require_symmetric()
    r, s, a, g = p.r, p.sigma, p.alpha, p.gamma
    x3 = 1.0 - x1 - x2
    return (x3 * (r * x1 + g) - x1 * (a + s * x2),
            x3 * (r * x2 + g) - x2 * (a + s * x1))


def rhs_vector(p: ModelParams):
    """``rhs`` packaged as ``f(t, x)`` for the integrators; ``x[0], x[1]``
    are x1, x2 (trailing axes are batch dimensions)."""
    p.require_symmetric()

    def f(t, x):
        return np.stack(rhs(p, x[0], x[1]))

    return f


@dataclass(frozen=True)
class EquilibriumFamily:
    case_tag: str
    point: tuple  # (x1, x2, x3); NaN when the family has no real solution
    constraint: str
    valid: bool  # the family's existence conditions hold
    feasible: bool  # valid and inside the closed simplex
    note: str = ""

    @property
    def state(self) -> Optional[SimplexState]:
        if not self.feasible:
            return None
        x1, x2, x3 = (min(max(v, 0.0), 1.0) for v in self.point)
        return SimplexState(x1, x2, 1.0 - x1 - x2)

    def to_dict(self) -> dict:
        return {
            "case": self.case_tag,
            "point": [None if math.isnan(v) else v for v in self.point],
            "constraint": self.constraint,
            "valid": self.valid,
            "feasible": self.feasible,
            "note": self.note,
        }


def _in_simplex(pt) -> bool:
    return (all(math.isfinite(v) for v in pt)
            and min(pt) >= -FEASIBLE_SLACK and max(pt) <= 1 + FEASIBLE_SLACK)


def _family(tag, pt, constraint, valid, note=""):
    return EquilibriumFamily(tag, tuple(float(v) for v in pt), constraint, valid,
                             valid and _in_simplex(pt), note)


def symmetric_quadratic_roots(p: ModelParams) -> tuple:
    """Roots (plus, minus) of (2r+sigma) x^2 - (r - 2gamma - alpha) x - gamma = 0,
    the equilibrium condition along x1 = x2 = x."""
    r, s, a, g = p.r, p.sigma, p.alpha, p.gamma
    qa = 2 * r + s
    qb = r - 2 * g - a
    if qa == 0.0:
        if qb == 0.0:
            return (math.nan, math.nan)
        x = -g / qb
        return (x, x)
    disc = qb * qb + 4 * g * qa
    sq = math.sqrt(disc)
    plus = (qb + sq) / (2 * qa)
    # product of roots is -gamma/qa; avoids cancellation in the minus root
    minus = -g / (qa * plus) if plus != 0 else (qb - sq) / (2 * qa)
    return (plus, minus)


def equilibria(p: ModelParams) -> list:
    """Closed-form equilibrium families.

    Case 1 (x1 = x2) always exists. Case 2 (x3 = alpha/r) has real roots
    only for sigma >= the consensus threshold; below it the family is
    returned invalid with NaN coordinates. Case 3 is the point where both
    constraints hold, which is an equilibrium only at the threshold itself.
    Points outside the simplex are flagged, never dropped.
    """
    p.require_symmetric()
    r, s, a, g = p.r, p.sigma, p.alpha, p.gamma
    plus, minus = symmetric_quadratic_roots(p)
    out = [
        _family(CASE1, (plus, plus, 1 - 2 * plus), "x1=x2", not math.isnan(plus)),
        _family(CASE1_AUX, (minus, minus, 1 - 2 * minus), "x1=x2",
                not math.isnan(minus), note="auxiliary root of the symmetric quadratic"),
    ]
    if r == 0.0 or s == 0.0:
        warnings.warn("Case 2 and Case 3 need r > 0 and sigma > 0; only Case 1 returned",
                      DomainWarning, stacklevel=2)
        return out

    x3 = a / r
    lead = 1.0 - x3
    disc = lead * lead - 4.0 * a * g / (s * r)
    if disc >= 0:
        sq = math.sqrt(disc)
        roots = ((lead + sq) / 2.0, (lead - sq) / 2.0)
        for tag, x1 in zip((CASE2_PLUS, CASE2_MINUS), roots):
            out.append(_family(tag, (x1, lead - x1, x3), "x3=alpha/r", True))
    else:
        nan = (math.nan, math.nan, math.nan)
        note = "no real root: sigma below the consensus threshold"
        out.append(_family(CASE2_PLUS, nan, "x3=alpha/r", False, note))
        out.append(_family(CASE2_MINUS, nan, "x3=alpha/r", False, note))

    xc = (r - a) / (2.0 * r)
    exact = False
    if r != a:
        sig_star = consensus_threshold(p)
        exact = abs(s - sig_star) <= CASE3_RTOL * max(1.0, sig_star)
    out.append(_family(CASE3, (xc, xc, x3), "x1=x2 and x3=alpha/r", exact,
                       note="" if exact else "equilibrium only at sigma = consensus threshold"))
    return out


def consensus_threshold(p: ModelParams) -> float:
    """sigma* = 4 r alpha gamma / (r - alpha)^2."""
    p.require_symmetric()
    r, a, g = p.r, p.alpha, p.gamma
    if r <= 0:
        raise DomainError("consensus threshold needs r > 0")
    if r == a:
        raise SingularThresholdError("consensus threshold is singular for r == alpha")
    return 4.0 * r * a * g / (r - a) ** 2


def classify_planar(trace: float, det: float, band: float = DEGENERATE_BAND) -> str:
    if abs(det) < band or abs(trace) < band:
        return "degenerate"
    if det < 0:
        return "saddle"
    if trace > 0:
        return "unstable"
    return "stable node" if trace * trace - 4 * det >= 0 else "stable focus"


STABLE = ("stable node", "stable focus")


@dataclass(frozen=True)
class StabilityReport:
    equilibrium: SimplexState
    jacobian: np.ndarray
    trace: float
    determinant: float
    eigenvalues: tuple
    classification: str

    @property
    def is_stable(self) -> bool:
        return self.classification in STABLE

    @classmethod
    def from_jacobian(cls, eq: SimplexState, J) -> "StabilityReport":
        J = np.asarray(J, dtype=float)
        tr = float(np.trace(J))
        det = float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
        eig = tuple(complex(v) for v in np.linalg.eigvals(J))
        return cls(eq, J, tr, det, eig, classify_planar(tr, det))

    def to_dict(self) -> dict:
        return {
            "equilibrium": list(self.equilibrium),
            "jacobian": self.jacobian.tolist(),
            "trace": self.trace,
            "determinant": self.determinant,
            "eigenvalues": [[v.real, v.imag] for v in self.eigenvalues],
            "classification": self.classification,
        }


def symmetric_jacobian(p: ModelParams, x: float) -> np.ndarray:
    r, s, a, g = p.r, p.sigma, p.alpha, p.gamma
    d = r - 3 * r * x - g - a - s * x
    o = -x * (r + s) - g
    return np.array([[d, o], [o, d]])


def planar_jacobian(p: ModelParams, x1: float, x2: float) -> np.ndarray:
    """Jacobian of ``rhs`` in (x1, x2) at any point, symmetric or not."""
    r, s, a, g = p.r, p.sigma, p.alpha, p.gamma
    x3 = 1.0 - x1 - x2
    return np.array([
        [r * x3 - (r * x1 + g) - a - s * x2, -(r * x1 + g) - s * x1],
        [-(r * x2 + g) - s * x2, r * x3 - (r * x2 + g) - a - s * x1],
    ])


def classify_point(p: ModelParams, eq: SimplexState) -> StabilityReport:
    p.require_symmetric()
    return StabilityReport.from_jacobian(eq, planar_jacobian(p, eq.x1, eq.x2))


def classify(p: ModelParams, eq: SimplexState) -> StabilityReport:
    """Linear stability of a symmetric equilibrium x1 = x2."""
    p.require_symmetric()
    if abs(eq.x1 - eq.x2) > 1e-9:
        raise ValidationError("classify needs a symmetric point (x1 == x2)")
    return StabilityReport.from_jacobian(eq, symmetric_jacobian(p, eq.x1))


def case1_point(p: ModelParams) -> SimplexState:
    fam = equilibria_case1(p)
    return fam.state


def equilibria_case1(p: ModelParams) -> EquilibriumFamily:
    p.require_symmetric()
    plus, _ = symmetric_quadratic_roots(p)
    return _family(CASE1, (plus, plus, 1 - 2 * plus), "x1=x2", not math.isnan(plus))


# predicate integration: coarse RK4 is ample to read off growth vs decay
THRESHOLD_CFG = IntegratorConfig(method="rk4_fixed", step=0.05, horizon=100.0)
PERTURBATION = 1e-3


def returns_to_symmetric(p: ModelParams, perturbation: float = PERTURBATION,
                         cfg: IntegratorConfig = THRESHOLD_CFG,
                         on_trajectory=None) -> bool:
    """Start off the Case 1 point along (1, -1) and report whether the
    trajectory ends closer to it than it started."""
    eq = equilibria_case1(p)
    x = eq.point[0]
    start = np.array([x + perturbation, x - perturbation])
    traj = integrate(rhs_vector(p), start, cfg)
    if on_trajectory is not None:
        on_trajectory(traj)
    d0 = perturbation
    d1 = float(np.max(np.abs(traj.final - x)))
    return d1 < d0


def empirical_threshold(p: ModelParams, rel_tol: float = 1e-3, high: Optional[float] = None,
                        cfg: IntegratorConfig = THRESHOLD_CFG, on_trajectory=None) -> float:
    """Bisect sigma on the simulated return-to-symmetry predicate."""
    p.require_symmetric()
    ref = consensus_threshold(p)
    if high is None:
        high = 4.0 * ref if ref > 0 else 1.0
    return bifurcation_bisect(
        0.0, high,
        lambda s: returns_to_symmetric(p.with_sigma(s), cfg=cfg, on_trajectory=on_trajectory),
        tol=rel_tol * max(ref, 1e-12))
