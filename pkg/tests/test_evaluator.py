import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hsrep import cases
from hsrep.errors import BlowupProximity, HypothesisViolated, SpecialCase
from hsrep.evaluator import (eulerian_slice, eval_rho, eval_ux, jacobian, sample, slice_to_csv,
                             steady_constants, trajectory)
from hsrep.model import ProblemSpec, make_builtin
from hsrep.quadratic import root_report


def ex1_closed(alpha, t):
    # [PAPER] closed forms for the first worked example (eta = t there)
    c1, c2 = np.cos(2 * np.pi * alpha), np.cos(4 * np.pi * alpha)
    den = 8 + 8 * t * c1 + t * t * c2
    return (8 * c1 + 2 * t * c2) / den, 4 / den


def test_example_one_closed_forms():
    spec = cases.worked_example(1)
    r = root_report(spec)
    alpha = np.linspace(0, 1, 64)
    for t in np.linspace(0.05, 1.1, 10):
        ux = eval_ux(spec, r, alpha, t)
        rho = eval_rho(spec, r, alpha, t)
        ux_ref, rho_ref = ex1_closed(alpha, t)
        assert np.max(np.abs(ux - ux_ref) / np.maximum(1, np.abs(ux_ref))) < 1e-7
        assert np.max(np.abs(rho - rho_ref) / np.abs(rho_ref)) < 1e-7


def test_scalar_and_array_inputs():
    spec = cases.worked_example(1)
    r = root_report(spec)
    assert isinstance(eval_ux(spec, r, 0.3, 0.5), float)
    assert eval_ux(spec, r, np.array([0.3]), 0.5).shape == (1,)


def test_initial_time_recovers_data():
    # [TRIVIAL] eta = 0: jacobian 1, u_x = u0', rho = rho0, gamma = alpha
    spec = cases.worked_example(3)
    r = root_report(spec)
    a = np.linspace(0, 1, 17)
    assert np.allclose(jacobian(spec, r, a, 0.0), 1.0)
    assert np.allclose(eval_ux(spec, r, a, 0.0), spec.data.up(a), atol=1e-12)
    assert np.allclose(eval_rho(spec, r, a, 0.0), spec.data.rho(a), atol=1e-12)
    assert np.allclose(trajectory(spec, r, a, 0.0), a, atol=1e-12)


def test_blowup_guard():
    spec = cases.worked_example(1)
    r = root_report(spec)
    with pytest.raises(BlowupProximity) as exc:
        eval_ux(spec, r, 0.5, r.eta_star * (1 - 1e-8))
    assert exc.value.sign == -1
    # opting out of the guard returns the large value
    v = eval_ux(spec, r, 0.5, r.eta_star * (1 - 1e-8), check=False)
    assert v < -1e6


def test_lambda_zero_refused():
    spec = ProblemSpec(0.0, 1.0, make_builtin("cos2pi"))
    with pytest.raises(SpecialCase):
        eval_ux(spec, root_report(cases.worked_example(1)), 0.1, 0.1)


def test_steady_constants_example_four():
    # [PAPER] M = 7/12, rho_inf(alpha) = 7 / (3 (4 alpha^2 - 4 alpha + 3))
    st_ = steady_constants(cases.worked_example(4))
    assert st_.curly_m == pytest.approx(7 / 12, rel=1e-12)
    a = np.linspace(0, 1, 64)
    assert np.max(np.abs(st_.p_inf(a) - 7 / (3 * (4 * a * a - 4 * a + 3)))) < 1e-6


def test_steady_constants_require_negative_product():
    with pytest.raises(HypothesisViolated):
        steady_constants(cases.worked_example(3))
    with pytest.raises(HypothesisViolated):
        steady_constants(cases.worked_example(2).__class__(-1.0, -1.0, make_builtin("sin2pi")))


def test_steady_convergence_rate_example_four():
    # [DERIVED] u_x along characteristics approaches u_inf like 1/eta; the
    # error times eta settles to a constant
    spec = cases.worked_example(4)
    r = root_report(spec)
    st_ = steady_constants(spec)
    a = np.linspace(0, 1, 33)
    scaled = []
    for eta in (1e2, 1e3, 1e4):
        err = np.max(np.abs(eval_ux(spec, r, a, eta) - st_.u_inf(a)))
        scaled.append(err * eta)
    assert scaled[-1] == pytest.approx(scaled[-2], rel=0.02)
    assert np.max(np.abs(eval_ux(spec, r, a, 1e4) - st_.u_inf(a))) < 1e-3


def test_example_four_closed_form_at_left_end():
    # [DERIVED] with pbar0 = 1 + 7 eta^2 / 12, u_x at alpha = 0 has a closed form
    spec = cases.worked_example(4)
    r = root_report(spec)
    for eta in (0.5, 3.0, 20.0):
        pb = 1 + 7 * eta ** 2 / 12
        Q = 0.75 * eta ** 2 + eta + 1
        ref = -2 * pb * ((-0.5 - 0.75 * eta) / Q + (7 * eta / 12) / pb)
        assert eval_ux(spec, r, 0.0, eta) == pytest.approx(ref, rel=1e-9)


def test_dirichlet_characteristics_solve_the_ode():
    # d gamma / dt = u(gamma), with u(gamma) = integral of u_x gamma_alpha from 0
    from hsrep import gk
    from hsrep.quadrature import eta_of_time
    spec = cases.worked_example(4).with_tol(quad_abs=1e-12, quad_rel=1e-11)
    r = root_report(spec)
    t, h = 0.8, 1e-4
    e0, ep, em = (eta_of_time(spec, r, s) for s in (t, t + h, t - h))
    for a0 in (0.3, 0.7):
        speed = (trajectory(spec, r, a0, ep) - trajectory(spec, r, a0, em)) / (2 * h)
        f = lambda a: eval_ux(spec, r, a, e0) * jacobian(spec, r, a, e0)
        u = gk.integrate(f, [0.0, a0], 1e-12, 1e-11).value[0]
        assert speed == pytest.approx(u, abs=1e-4)


def test_slice_sorted_and_written(tmp_path):
    spec = cases.worked_example(2)
    r = root_report(spec)
    sl = eulerian_slice(spec, r, 0.4, 33)
    assert np.all(np.diff(sl["x"]) >= 0)
    assert np.allclose(sl["eta"], 0.4)
    slice_to_csv(sl, tmp_path / "s.csv")
    rows = (tmp_path / "s.csv").read_text().splitlines()
    assert rows[0] == "alpha,x,eta,t,jac,ux,rho" and len(rows) == 34


@given(st.floats(0.0, 0.9), st.floats(0.0, 1.0))
def test_sample_consistency(frac, a):
    spec = cases.worked_example(3)
    r = root_report(spec)
    eta = frac * r.eta_star
    s = sample(spec, r, np.array([a]), eta, with_time=False)
    assert s.jac[0] > 0
    # density transport: rho(gamma) = rho0 * gamma_alpha^(2 lam) * pbar0^0 identity
    pb = float(np.atleast_1d(jacobian(spec, r, np.array([a]), eta))[0])
    assert s.rho[0] == pytest.approx(spec.data.rho(np.array([a]))[0] * pb ** (2 * spec.lam), rel=1e-10)
