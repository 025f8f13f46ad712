"""Characteristic oracle: closed-form flow, RK4 convergence, caustic detection."""
from __future__ import annotations

import numpy as np
import pytest

from hodoflow import model, oracle


def test_exact_flow_t0_identity():
    spec = model.coriolis2d_spec(1.3, g=np.array([0.5, -0.2]))
    res = oracle.exact_flow(spec, [1.0, 2.0], [0.3, -0.4], 0.0)
    assert np.allclose(res.x, [1.0, 2.0]) and np.allclose(res.u, [0.3, -0.4])


def test_exact_flow_composition():
    """Flowing t1 then t2 from the intermediate state equals flowing t1 + t2."""
    spec = model.ForceSpec(np.array([[0.4, 1.0], [-0.7, 0.2]]), np.array([0.1, -0.3]))
    x0, u0 = np.array([0.2, -1.0]), np.array([1.1, 0.5])
    one = oracle.exact_flow(spec, x0, u0, 0.7)
    two = oracle.exact_flow(spec, one.x, one.u, 0.5)
    direct = oracle.exact_flow(spec, x0, u0, 1.2)
    assert np.allclose(two.x, direct.x, atol=1e-12)
    assert np.allclose(two.u, direct.u, atol=1e-12)


def test_exact_flow_free_streaming():
    spec = model.ForceSpec(np.zeros((2, 2)), np.zeros(2))
    res = oracle.exact_flow(spec, [0.0, 0.0], [1.0, -2.0], 3.0)
    assert np.allclose(res.x, [3.0, -6.0]) and np.allclose(res.u, [1.0, -2.0])


def test_rk4_matches_exact_flow():
    spec = model.coriolis3d_spec(1.1, g_mag=0.4)
    x0, u0 = np.array([0.1, -0.2, 0.5]), np.array([0.7, 0.3, -0.6])
    exact = oracle.exact_flow(spec, x0, u0, 1.5)
    rk = oracle.rk4_flow(spec, x0, u0, 1.5, dt=1e-3)
    assert np.max(np.abs(rk.x - exact.x)) < 1e-10
    assert np.max(np.abs(rk.u - exact.u)) < 1e-10


def test_rk4_fourth_order_convergence():
    spec = model.ForceSpec(np.array([[0.3, 0.8], [-0.5, -0.1]]), np.array([0.2, 0.1]))
    x0, u0 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    exact = oracle.exact_flow(spec, x0, u0, 2.0)

    def err(dt):
        rk = oracle.rk4_flow(spec, x0, u0, 2.0, dt=dt)
        return np.max(np.abs(np.concatenate([rk.x - exact.x, rk.u - exact.u])))

    e1, e2 = err(0.02), err(0.01)
    ratio = e1 / e2
    assert 12.0 < ratio < 20.0, f"RK4 halving ratio {ratio}, expected about 16"


def test_rk4_accepts_callable_force():
    calls = []

    def force(s, x, u):
        calls.append(s)
        return np.array([0.0])

    res = oracle.rk4_flow(force, [0.0], [1.0], 1.0, dt=0.25)
    assert np.allclose(res.x, [1.0]) and calls, "callable force was not used"


def test_flow_jacobian_det_starts_at_one():
    data = model.make_data("tanh1d", mu=1.0, kappa=1.0)
    spec = model.ForceSpec(np.zeros((1, 1)), np.zeros(1))
    assert oracle.flow_jacobian_det(spec, data, np.array([0.0]), 0.0) == pytest.approx(1.0)


def test_first_caustic_time_free_tanh():
    """Free 1D tanh: the map x0 + t u0(x0) folds first at t = -1/min u0' = 1/(mu kappa)."""
    data = model.make_data("tanh1d", mu=1.0, kappa=1.0)
    spec = model.ForceSpec(np.zeros((1, 1)), np.zeros(1))
    t_c = oracle.first_caustic_time(spec, data, np.array([0.0]), t_max=3.0)
    assert t_c == pytest.approx(1.0, abs=1e-8), f"caustic at {t_c}, expected 1"
    # a point away from the steepest slope folds strictly later
    t_off = oracle.first_caustic_time(spec, data, np.array([0.8]), t_max=10.0)
    assert t_off is not None and t_off > t_c + 0.1


def test_first_caustic_time_none_when_certified_absent():
    data = model.make_data("tanh1d", mu=1.0, kappa=1.0)
    spec = model.ForceSpec(np.array([[-2.0]]), np.zeros(1))
    assert oracle.first_caustic_time(spec, data, np.array([0.0]), t_max=20.0) is None


def test_pde_residual_on_exact_solution():
    """The implicit solver's field satisfies u_t + (u.grad)u = g + Au pointwise."""
    from hodoflow import hodograph

    spec = model.ForceSpec(np.array([[1.0]]), np.array([1.0]))
    data = model.make_data("tanh1d", mu=1.0, kappa=1.0)
    problem = model.HodographProblem(spec, data)

    def u_field(t, x):
        return hodograph.solve_u(problem, t, x).u

    for t, x in [(0.1, -0.4), (0.25, 0.3), (0.4, 1.0)]:
        res = oracle.pde_residual(u_field, spec, t, np.array([x]))
        assert np.max(np.abs(res)) < 1e-5, f"PDE residual {res} at (t={t}, x={x})"
