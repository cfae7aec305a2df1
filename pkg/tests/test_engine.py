import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from swarmdyn.engine import IntegratorConfig, Trajectory, bifurcation_bisect, integrate, settle_time
from swarmdyn.errors import NumericalError, ValidationError
from swarmdyn.game_core import ModelParams
from swarmdyn import unstructured as un


def decay(t, x):
    return -x


def test_rk4_exponential_decay():
    traj = integrate(decay, 1.0, IntegratorConfig(step=1e-3, horizon=1.0))
    assert traj.times[-1] == pytest.approx(1.0, abs=1e-12)
    assert abs(traj.final - math.exp(-1.0)) < 1e-9


def test_rk4_global_order():
    errs = []
    steps = [1e-1, 1e-2, 1e-3]
    for h in steps:
        x = integrate(decay, 1.0, IntegratorConfig(step=h, horizon=1.0)).final
        errs.append(abs(x - math.exp(-1.0)))
    # frozen from this integrator: 3.33e-7, 3.09e-11, 4.0e-15 (last is near round-off)
    order = np.polyfit(np.log10(steps), np.log10(errs), 1)[0]
    assert order >= 3.8
    assert math.log10(errs[0] / errs[1]) >= 3.8


def test_zero_rhs_is_constant():
    traj = integrate(lambda t, x: np.zeros_like(x), [0.2, 0.3], IntegratorConfig(step=0.1, horizon=2))
    assert np.all(traj.states == np.array([0.2, 0.3]))


def test_rk45_matches_reference_solver():
    f = lambda t, x: np.array([x[1], -x[0] - 0.1 * x[1]])
    cfg = IntegratorConfig(method="rk45_adaptive", horizon=10.0, rel_tol=1e-10, abs_tol=1e-12)
    ours = integrate(f, [1.0, 0.0], cfg).final
    ref = solve_ivp(f, (0, 10), [1.0, 0.0], method="DOP853", rtol=1e-12, atol=1e-14).y[:, -1]
    assert np.max(np.abs(ours - ref)) < 1e-8


def test_adaptive_and_fixed_agree_on_benchmark():
    p = ModelParams.symmetric_params(1.0, 0.2, 0.2, 0.3)
    f = un.rhs_vector(p)
    rel = 1e-8
    a = integrate(f, [0.5, 0.3], IntegratorConfig(method="rk45_adaptive", horizon=20, rel_tol=rel)).final
    b = integrate(f, [0.5, 0.3], IntegratorConfig(step=1e-3, horizon=20)).final
    assert np.max(np.abs(a - b)) < 10 * rel


def test_converges_to_case1_below_threshold():
    p = ModelParams.symmetric_params(1.0, 0.2, 0.2, 0.3)
    x = un.equilibria_case1(p).point[0]
    traj = integrate(un.rhs_vector(p), [0.6, 0.1], IntegratorConfig(step=0.01, horizon=400))
    assert np.max(np.abs(traj.final - x)) < 1e-6


def test_determinism():
    p = ModelParams.symmetric_params(1.0, 2.0, 0.1, 0.2)
    cfg = IntegratorConfig(method="rk45_adaptive", horizon=5)
    a = integrate(un.rhs_vector(p), [0.3, 0.2], cfg)
    b = integrate(un.rhs_vector(p), [0.3, 0.2], cfg)
    assert a.states.tobytes() == b.states.tobytes()
    assert a.times.tobytes() == b.times.tobytes()


def test_batched_states_match_individual_runs():
    p = ModelParams.symmetric_params(1.0, 2.0, 0.1, 0.2)
    cfg = IntegratorConfig(step=0.01, horizon=3)
    x0 = np.array([[0.3, 0.1, 0.5], [0.2, 0.6, 0.1]])
    batch = integrate(un.rhs_vector(p), x0, cfg).final
    for j in range(3):
        single = integrate(un.rhs_vector(p), x0[:, j], cfg).final
        assert np.array_equal(batch[:, j], single)


def test_steady_state_stop():
    cfg = IntegratorConfig(step=0.01, horizon=1000, steady_tol=1e-9, steady_window=10)
    traj = integrate(decay, 1.0, cfg)
    assert traj.times[-1] < 1000
    assert abs(traj.final) < 1e-8


def test_record_every_keeps_endpoint():
    traj = integrate(decay, 1.0, IntegratorConfig(step=0.01, horizon=1.0, record_every=7))
    assert traj.times[-1] == pytest.approx(1.0)
    assert len(traj) == 1 + 100 // 7 + 1


def test_divergence_raises():
    with pytest.raises(NumericalError), np.errstate(over="ignore", invalid="ignore"):
        integrate(lambda t, x: x ** 2, 1.0, IntegratorConfig(step=0.01, horizon=5))


def test_config_validation():
    with pytest.raises(ValidationError):
        IntegratorConfig(method="euler")
    with pytest.raises(ValidationError):
        IntegratorConfig(step=0)
    cfg = IntegratorConfig(step=0.5, horizon=3)
    assert IntegratorConfig.from_dict(cfg.to_dict()) == cfg


def test_settle_time_constant_trajectory():
    traj = Trajectory([0, 1, 2], [[1.0], [1.0], [1.0]])
    assert settle_time(traj, [1.0], 1e-6) == 0.0


def test_settle_time_decay():
    traj = integrate(decay, 1.0, IntegratorConfig(step=1e-4, horizon=10))
    t = settle_time(traj, 0.0, 1e-3)
    assert t == pytest.approx(math.log(1e3), abs=2e-4)  # 6.9078


def test_settle_time_divergent_is_none():
    traj = integrate(lambda t, x: x, 1.0, IntegratorConfig(step=0.01, horizon=3))
    assert settle_time(traj, 0.0, 1e-3) is None


def test_bisect_step_predicate():
    s = bifurcation_bisect(0.0, 1.0, lambda v: v < 0.375, 1e-4)
    assert abs(s - 0.375) <= 1e-4


def test_bisect_rejects_same_sign():
    with pytest.raises(ValueError):
        bifurcation_bisect(0.0, 1.0, lambda v: True, 1e-3)
