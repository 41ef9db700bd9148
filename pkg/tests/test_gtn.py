import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradfiber.errors import YieldSurfaceDegenerate
from gradfiber.gtn import (PlasticHistory, PlasticParams, effective_stress, effective_stress_kernel,
                           gtn_function, hardening, hardening_field, plastic_rate_terms, return_map,
                           void_fraction, yield_function)
from gradfiber.matrix import MatrixParams

PP = PlasticParams()


def test_hardening_oracle():
    # y0 + y1 exp(0.1) + y2 (1 - exp(-11.5)), extended precision
    assert hardening(0.1, 293.0, PP) == pytest.approx(114.773404243888826168, rel=1e-14)
    # ten kelvin below the reference temperature scales every yield by 1 + 0.4 * 10
    assert hardening(0.1, 283.0, PP) == pytest.approx(573.867021219444130840, rel=1e-14)
    assert hardening(0.0, 293.0, PP) == pytest.approx(22.0 + 56.8)


def test_hardening_clamps_at_high_temperature():
    assert hardening(0.3, 300.0, PP) == 0.0
    assert np.allclose(hardening_field([0.0, 0.1], [293.0, 293.0], PP),
                       [hardening(0.0, 293.0, PP), hardening(0.1, 293.0, PP)])
    with pytest.raises(ValueError):
        hardening(-0.1, 293.0, PP)


def test_effective_stress_oracle():
    sbar, _, st_ = effective_stress_kernel(100.0, 30.0, 0.05, 3.0, 0.8)
    assert st_ == 0
    assert sbar == pytest.approx(118.793777993453073246, rel=1e-12)


def test_effective_stress_without_voids_is_von_mises():
    tau = np.diag([120.0, -30.0, 10.0])
    dev = tau - np.trace(tau) / 3 * np.eye(3)
    vm = np.sqrt(1.5 * np.sum(dev * dev))
    assert effective_stress(tau, 1.0, 0.0, PP) == pytest.approx(vm, rel=1e-13)


def test_void_free_material_ignores_pressure():
    sbar, _, _ = effective_stress_kernel(0.0, 50.0, 0.0, 3.0, 0.8)
    assert sbar == 0.0


def test_degenerate_yield_surface():
    with pytest.raises(YieldSurfaceDegenerate):
        effective_stress(np.diag([10.0, 0, 0]), 1.0, 0.4, PP)


@settings(max_examples=300, deadline=None)
@given(st.floats(0.0, 500.0), st.floats(-300.0, 300.0), st.floats(1e-3, 0.3))
def test_effective_stress_is_a_root(seq, p, f):
    if seq < 1e-3 and abs(p) < 1e-3:
        return
    sbar, d, st_ = effective_stress_kernel(seq, p, f, 3.0, 0.8)
    assert st_ == 0 and sbar > 0
    assert abs(gtn_function(sbar, seq, p, f, 3.0, 0.8)) < 1e-9
    # positively homogeneous of degree one
    s2, _, _ = effective_stress_kernel(2 * seq, 2 * p, f, 3.0, 0.8)
    assert s2 == pytest.approx(2 * sbar, rel=1e-10)
    # porosity only weakens the material
    s0, _, _ = effective_stress_kernel(seq, p, 0.0, 3.0, 0.8)
    assert sbar >= s0 * (1 - 1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(1.0, 300.0), st.floats(-200.0, 200.0), st.floats(0.0, 0.3))
def test_effective_stress_derivatives(seq, p, f):
    _, d, _ = effective_stress_kernel(seq, p, f, 3.0, 0.8)
    h = 1e-5 * max(seq, abs(p), 1.0)
    ds = (effective_stress_kernel(seq + h, p, f, 3.0, 0.8)[0]
          - effective_stress_kernel(seq - h, p, f, 3.0, 0.8)[0]) / (2 * h)
    dp = (effective_stress_kernel(seq, p + h, f, 3.0, 0.8)[0]
          - effective_stress_kernel(seq, p - h, f, 3.0, 0.8)[0]) / (2 * h)
    # the first entry is taken with respect to seq squared
    assert 2 * seq * d[0] == pytest.approx(ds, rel=1e-6, abs=1e-8)
    assert d[1] == pytest.approx(dp, rel=1e-6, abs=1e-8)


def test_void_fraction_bounds():
    assert void_fraction(1.0, 0.01, 3.0) == pytest.approx(0.01, rel=1e-14)
    assert void_fraction(0.9, 0.01, 3.0) == 0.01
    assert void_fraction(1.1, 0.01, 3.0) == pytest.approx(1 - 0.99 / 1.1)
    assert void_fraction(100.0, 0.01, 3.0) < 1 / 3.0


def _hist():
    return PlasticHistory(np.eye(3), 1.0, 0.0, PP.f0, 0.0)


def test_elastic_step_leaves_plastic_state():
    hist, ell, n, lam, phi = return_map(np.diag([1.001, 1, 1]), _hist(), 0.53 * 78.8, 293.0, 0.1,
                                        PP, MatrixParams())
    assert lam == 0.0 and phi < 0
    assert np.allclose(hist.Fp, np.eye(3)) and hist.alpha == 0.0


def test_plastic_step_is_consistent():
    dt = 0.1
    rp = 0.53 * 78.8
    F = np.diag([1.08, 0.97, 0.97])
    hist, ell, n, lam, phi = return_map(F, _hist(), rp, 293.0, dt, PP, MatrixParams())
    assert lam > 0 and hist.alpha > 0
    # viscous overstress law
    assert phi == pytest.approx(PP.eta_p * lam, rel=1e-6)
    assert hist.f >= PP.f0
    assert np.linalg.det(hist.Fp) > 0
    _, alpha_dot = plastic_rate_terms(lam, None, hist.f, rp)
    assert hist.alpha == pytest.approx(alpha_dot * dt)


def test_yield_function_sign():
    assert yield_function(10.0, 12.0) < 0 < yield_function(13.0, 12.0)


def test_parameter_validation():
    with pytest.raises(ValueError):
        PlasticParams(f0=0.5, q1=3.0)
    with pytest.raises(ValueError):
        PlasticParams(eta_p=0.0)
