from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from gradfiber.errors import DegenerateFiber
from gradfiber.fiber import (FiberParams, fiber_driving_forces, fiber_energy, fiber_entropy,
                             fiber_first_piola, fiber_higher_order_stress, fiber_weighted_energy)
from gradfiber.kinematics import DeformationState

P = FiberParams(b=120.0, c_par=16.0, c_perp=9.0)


def state(F, G=None):
    G = np.zeros((3, 3, 3)) if G is None else G
    return DeformationState.from_F(np.asarray(F, float), G)


def random_state(seed):
    rng = np.random.default_rng(seed)
    F = np.eye(3) + rng.uniform(-0.15, 0.15, (3, 3))
    G = rng.uniform(-0.05, 0.05, (3, 3, 3))
    return F, 0.5 * (G + G.transpose(0, 2, 1))


def test_uniaxial_fiber_stretch():
    st_ = state(np.diag([1.1, 1, 1]))
    p = FiberParams()
    # 0.5 a (0.1)^2 on the L family, weight (1 - zeta)/2
    assert fiber_weighted_energy(st_, p.theta0, p) == pytest.approx(0.235 * 395.0, rel=1e-12)
    P1 = fiber_first_piola(st_, p.theta0, p)
    assert P1[0, 0] == pytest.approx(0.235 * 79000 * 0.1, rel=1e-12)
    assert np.count_nonzero(np.abs(P1) > 1e-9) == 1


def test_ruptured_family_carries_nothing():
    st_ = state(np.diag([1.1, 1.05, 1]))
    p = FiberParams()
    full = fiber_weighted_energy(st_, p.theta0, p)
    broken = fiber_weighted_energy(st_, p.theta0, p, sL=1.0)
    assert broken == pytest.approx(0.235 * 0.5 * 79000 * 0.05 ** 2, rel=1e-10)
    assert broken < full
    assert fiber_driving_forces(st_, p.theta0, p, sL=1.0)[0] == 0.0


def _fk(kappa, n):
    z = np.zeros(3)
    return SimpleNamespace(lambdaLTilde=1.0, lambdaMTilde=1.0, phiTilde=0.0, nTilde=n,
                           kappaLTilde=kappa, kappaMTilde=z)


def test_curvature_split_into_in_plane_and_normal_parts():
    n = np.array([0.0, 0.0, 1.0])
    assert fiber_energy(_fk(np.array([0, 0.2, 0]), n), 293.0, P) == pytest.approx(0.5 * 16.0 * 0.04)
    assert fiber_energy(_fk(np.array([0, 0, 0.2]), n), 293.0, P) == pytest.approx(0.5 * 9.0 * 0.04)
    assert fiber_energy(_fk(np.array([0, 0.3, 0.4]), n), 293.0, P) == pytest.approx(
        0.5 * (16.0 * 0.09 + 9.0 * 0.16))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 0.8), st.floats(0.0, 0.8))
def test_stresses_match_energy_derivatives(seed, sL, sM):
    F, G = random_state(seed)
    th = 300.0
    Pk = fiber_first_piola(state(F, G), th, P, sL, sM)
    Hk = fiber_higher_order_stress(state(F, G), P, sL, sM, theta=th)
    h = 1e-6
    W = lambda F_, G_: fiber_weighted_energy(state(F_, G_), th, P, sL, sM)
    for i in range(3):
        for J in range(3):
            E = np.zeros((3, 3))
            E[i, J] = h
            assert Pk[i, J] == pytest.approx((W(F + E, G) - W(F - E, G)) / (2 * h), rel=1e-5, abs=1e-4)
    for i in range(3):
        for J in range(3):
            for K in range(J, 3):
                E = np.zeros((3, 3, 3))
                E[i, J, K] += 0.5 * h
                E[i, K, J] += 0.5 * h
                fd = (W(F, G + E) - W(F, G - E)) / h
                assert Hk[i, J, K] + Hk[i, K, J] == pytest.approx(fd, rel=1e-5, abs=1e-5)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_frame_indifference(seed):
    F, G = random_state(seed)
    Q = Rotation.random(random_state=seed % 2**31).as_matrix()
    a = fiber_weighted_energy(state(F, G), 280.0, P)
    b = fiber_weighted_energy(state(Q @ F, np.einsum("ij,jKL->iKL", Q, G)), 280.0, P)
    assert b == pytest.approx(a, rel=1e-10, abs=1e-10)


def test_driving_force_and_entropy_derivatives():
    F, G = random_state(3)
    F = F + np.diag([0.1, 0.05, 0])
    st_ = state(F, G)
    h = 1e-6
    for k, (sL, sM) in enumerate([(0.3, 0.0), (0.0, 0.3)]):
        args_p = (sL + h * (k == 0), sM + h * (k == 1))
        args_m = (sL - h * (k == 0), sM - h * (k == 1))
        d = (fiber_weighted_energy(st_, 293.0, P, *args_p) - fiber_weighted_energy(st_, 293.0, P, *args_m)) / (2 * h)
        assert fiber_driving_forces(st_, 293.0, P, sL, sM)[k] == pytest.approx(max(-d, 0.0), rel=1e-5, abs=1e-7)
    d = (fiber_weighted_energy(st_, 300 + 1e-4, P) - fiber_weighted_energy(st_, 300 - 1e-4, P)) / 2e-4
    assert fiber_entropy(st_, 300.0, P) == pytest.approx(-d, rel=1e-6)


def test_collapsed_fiber_raises():
    with pytest.raises(DegenerateFiber):
        fiber_weighted_energy(state(np.diag([1e-14, 1, 1])), 293.0, FiberParams())


def test_parameter_validation():
    with pytest.raises(ValueError):
        FiberParams(L=(1, 0, 0), M=(1, 0, 0))
    with pytest.raises(ValueError):
        FiberParams(a=-1.0)
