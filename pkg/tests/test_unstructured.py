import math

import numpy as np
import pytest

from swarmdyn.engine import IntegratorConfig, integrate
from swarmdyn.errors import DomainError, DomainWarning, SingularThresholdError, ValidationError
from swarmdyn.game_core import ModelParams, SimplexState
from swarmdyn import unstructured as un


def sym(r, s, a, g):
    return ModelParams.symmetric_params(r, s, a, g)


def by_tag(fams):
    return {f.case_tag: f for f in fams}


def test_case3_point_is_stationary_at_threshold():
    p = sym(1.0, 0.375, 0.2, 0.3)
    d1, d2 = un.rhs(p, 0.4, 0.4)
    assert abs(d1) < 1e-12 and abs(d2) < 1e-12


def test_rhs_symmetric_on_diagonal(rng):
    for _ in range(50):
        p = sym(*rng.uniform(0, 3, 4))
        x = rng.uniform(0, 0.5)
        d1, d2 = un.rhs(p, x, x)
        assert d1 == d2


def test_equilibria_at_threshold():
    fams = by_tag(un.equilibria(sym(1.0, 0.375, 0.2, 0.3)))
    c3 = fams[un.CASE3]
    assert c3.valid and c3.feasible
    assert np.allclose(c3.point, (0.4, 0.4, 0.2), atol=1e-12)
    # at the threshold the two Case 2 roots merge into the Case 3 point
    assert np.allclose(fams[un.CASE2_PLUS].point, c3.point, atol=1e-6)


def test_case3_invalid_off_threshold():
    c3 = by_tag(un.equilibria(sym(1.0, 1.0, 0.2, 0.3)))[un.CASE3]
    assert not c3.valid and not c3.feasible


def test_small_alpha_limits():
    fams = by_tag(un.equilibria(sym(1.0, 5.0, 1e-8, 0.3)))
    plus, minus = fams[un.CASE2_PLUS].point, fams[un.CASE2_MINUS].point
    assert np.max(np.abs(np.array(plus) - (1, 0, 0))) < 1e-6
    assert np.max(np.abs(np.array(minus) - (0, 1, 0))) < 1e-6
    assert np.max(np.abs(np.array(fams[un.CASE3].point) - (0.5, 0.5, 0))) < 1e-6


def test_case2_missing_below_threshold():
    fams = by_tag(un.equilibria(sym(1.0, 0.1, 0.2, 0.3)))
    assert not fams[un.CASE2_PLUS].valid
    assert all(math.isnan(v) for v in fams[un.CASE2_PLUS].point)


def test_degenerate_rates_warn():
    with pytest.warns(DomainWarning):
        fams = un.equilibria(sym(1.0, 0.0, 0.2, 0.3))
    assert {f.case_tag for f in fams} == {un.CASE1, un.CASE1_AUX}


def test_threshold_values():
    assert un.consensus_threshold(sym(1.0, 0.0, 0.2, 0.3)) == pytest.approx(0.375, rel=1e-14)
    assert un.consensus_threshold(sym(1.0, 0.0, 0.0, 0.3)) == 0.0
    with pytest.raises(SingularThresholdError):
        un.consensus_threshold(sym(1.0, 0.0, 1.0, 0.3))
    with pytest.raises(DomainError):
        un.consensus_threshold(sym(0.0, 0.0, 1.0, 0.3))


def test_threshold_matches_case2_double_root(rng):
    # independent oracle: sigma where the Case 2 discriminant vanishes, by root finding
    from scipy.optimize import brentq
    for _ in range(20):
        r = rng.uniform(0.5, 2)
        a = rng.uniform(0.05, 0.9 * r)
        g = rng.uniform(0.05, 1)
        disc = lambda s: (1 - a / r) ** 2 - 4 * a * g / (s * r)
        root = brentq(disc, 1e-9, 1e6, xtol=1e-14, rtol=1e-14)
        assert un.consensus_threshold(sym(r, 0, a, g)) == pytest.approx(root, rel=1e-10)


def test_classify_examples():
    below = sym(1.0, 0.1, 0.2, 0.3)
    assert un.classify(below, un.case1_point(below)).is_stable
    above = sym(1.0, 1.0, 0.2, 0.3)
    assert un.classify(above, un.case1_point(above)).classification == "saddle"
    at = sym(1.0, 0.375, 0.2, 0.3)
    rep = un.classify(at, SimplexState(0.4, 0.4, 0.2))
    assert rep.classification == "degenerate"
    assert abs(rep.determinant) < 1e-9


def test_case3_point_jacobian_always_singular(rng):
    # at x = (r - alpha)/2r the antisymmetric eigenvalue r - 2rx - alpha vanishes for any sigma
    for _ in range(20):
        r, a = rng.uniform(0.5, 2), rng.uniform(0, 0.4)
        x = (r - a) / (2 * r)
        J = un.symmetric_jacobian(sym(r, rng.uniform(0, 5), a, rng.uniform(0, 1)), x)
        assert abs(np.linalg.det(J)) < 1e-12


def test_classify_rejects_asymmetric_point():
    with pytest.raises(ValidationError):
        un.classify(sym(1, 1, 0.2, 0.3), SimplexState(0.5, 0.3, 0.2))


def test_classify_planar_taxonomy():
    assert un.classify_planar(-1, -1) == "saddle"
    assert un.classify_planar(1, 1) == "unstable"
    assert un.classify_planar(-3, 1) == "stable node"
    assert un.classify_planar(-1, 1) == "stable focus"
    assert un.classify_planar(-1, 1e-12) == "degenerate"


def test_jacobian_matches_finite_differences(rng):
    for _ in range(20):
        p = sym(*rng.uniform(0.1, 3, 4))
        x1, x2 = rng.dirichlet([1, 1, 1])[:2]
        J = un.planar_jacobian(p, x1, x2)
        h = 1e-6
        fd = np.column_stack([
            (np.array(un.rhs(p, x1 + h, x2)) - np.array(un.rhs(p, x1 - h, x2))) / (2 * h),
            (np.array(un.rhs(p, x1, x2 + h)) - np.array(un.rhs(p, x1, x2 - h))) / (2 * h)])
        assert np.max(np.abs(J - fd)) < 1e-7
        assert np.allclose(un.symmetric_jacobian(p, x1), un.planar_jacobian(p, x1, x1), atol=1e-14)


def _draw(rng):
    r = rng.uniform(0.2, 3)
    a = rng.uniform(0.01, 0.95 * r)
    g = rng.uniform(0.01, 2)
    return r, a, g


def test_residuals_random(rng):
    worst = 0.0
    for _ in range(1000):
        r, a, g = _draw(rng)
        p = sym(r, rng.uniform(0.01, 10), a, g)
        for f in un.equilibria(p):
            if f.feasible:
                worst = max(worst, np.max(np.abs(un.rhs(p, f.point[0], f.point[1]))))
    assert worst < 1e-8


def test_threshold_dichotomy(rng):
    n = 0
    while n < 200:
        r, a, g = _draw(rng)
        star = un.consensus_threshold(sym(r, 0, a, g))
        s = rng.uniform(0, 3 * star)
        if abs(s - star) < 1e-6 * max(1.0, star):
            continue
        p = sym(r, s, a, g)
        assert un.classify(p, un.case1_point(p)).is_stable == (s < star)
        n += 1


def test_case2_roots_swap(rng):
    for _ in range(50):
        r, a, g = _draw(rng)
        star = un.consensus_threshold(sym(r, 0, a, g))
        f = by_tag(un.equilibria(sym(r, 1.5 * star + 0.01, a, g)))
        p1, p2 = f[un.CASE2_PLUS].point, f[un.CASE2_MINUS].point
        assert np.allclose(p1, (p2[1], p2[0], p2[2]), atol=1e-12)


def test_simulation_consistency(rng):
    cfg = IntegratorConfig(step=0.05, horizon=400)
    starts = rng.dirichlet([1, 1, 1], size=100).T[:2]
    low = sym(1.0, 0.2, 0.2, 0.3)
    x = un.equilibria_case1(low).point[0]
    fin = integrate(un.rhs_vector(low), starts, cfg).final
    assert np.max(np.abs(fin - x)) < 1e-6

    high = sym(1.0, 2.0, 0.2, 0.3)
    f = by_tag(un.equilibria(high))
    targets = np.array([f[un.CASE2_PLUS].point[:2], f[un.CASE2_MINUS].point[:2]])
    # keep off the stable manifold of the symmetric saddle
    starts = starts[:, np.abs(starts[0] - starts[1]) > 1e-3]
    fin = integrate(un.rhs_vector(high), starts, cfg).final
    dist = np.min(np.abs(fin.T[:, None, :] - targets[None]).max(axis=2), axis=1)
    assert np.all(dist < 1e-6)


def test_empirical_threshold_default():
    p = sym(1.0, 0.0, 0.2, 0.3)
    est = un.empirical_threshold(p)
    assert abs(est - 0.375) / 0.375 < 0.01
