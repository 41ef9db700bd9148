import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from gradfiber.errors import DegenerateFiber, InvalidState, InvertedElement, PlasticStateCorrupt
from gradfiber.kinematics import (DeformationState, degradation, degradation_slope, degrade_stretch,
                                  elastic_split, fiber_kinematics, spectral_stretches)

L, M = np.array([1.0, 0, 0]), np.array([0, 1.0, 0])


def random_F(seed, scale=0.3):
    rng = np.random.default_rng(seed)
    F = np.eye(3) + rng.uniform(-scale, scale, (3, 3))
    return F if np.linalg.det(F) > 0.1 else np.eye(3)


def test_degradation_end_values():
    assert degradation(0.0, 0.001) == 1.0
    assert degradation(1.0, 0.001) == 0.0


def test_degradation_slope_matches_difference_quotient():
    s = np.linspace(0.05, 0.95, 7)
    h = 1e-6
    fd = (degradation(s + h, 0.3) - degradation(s - h, 0.3)) / (2 * h)
    assert np.allclose(degradation_slope(s, 0.3), fd, rtol=1e-7)


def test_degrade_stretch_examples():
    assert degrade_stretch(1.7, 0.0, 0.5) == pytest.approx(1.7, abs=0)
    assert degrade_stretch(1.7, 1.0, 0.5) == 1.0
    # g(0.5) = 0.499875 for a_g = 0.001, evaluated in extended precision
    assert degrade_stretch(1.5, 0.5, 0.001) == pytest.approx(1.22468279905065239957, rel=1e-14)


def test_degrade_stretch_rejects_bad_input():
    with pytest.raises(InvalidState):
        degrade_stretch(-1.0, 0.0, 0.001)
    with pytest.raises(InvalidState):
        degrade_stretch(1.2, 1.5, 0.001)


def test_spectral_identity_and_diagonal():
    lam, n, N = spectral_stretches(np.eye(3))
    assert np.allclose(lam, 1.0)
    lam, n, N = spectral_stretches(np.diag([0.5, 2.0, 1.0]))
    assert np.allclose(lam, [2.0, 1.0, 0.5])
    assert np.allclose(np.abs(N), np.eye(3)[:, [1, 2, 0]])


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_spectral_reconstruction(seed):
    F = random_F(seed)
    lam, n, N = spectral_stretches(F)
    rec = sum(lam[a] * np.outer(n[:, a], N[:, a]) for a in range(3))
    assert np.linalg.norm(rec - F) < 1e-12 * max(1.0, np.linalg.norm(F))
    assert np.allclose(n.T @ n, np.eye(3), atol=1e-12)
    assert np.allclose(N.T @ N, np.eye(3), atol=1e-12)
    assert np.all(np.diff(lam) <= 0)


def test_spectral_errors():
    with pytest.raises(InvertedElement):
        spectral_stretches(np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(InvalidState):
        spectral_stretches(np.full((3, 3), np.nan))


def test_elastic_split_examples():
    st_ = DeformationState.from_F(np.eye(3))
    sp = elastic_split(st_, np.eye(3), 0.0, 0.001)
    assert np.allclose(sp.lambdaE, 1.0) and sp.Je == pytest.approx(1.0) and sp.JeTilde == pytest.approx(1.0)
    sp = elastic_split(DeformationState.from_F(0.9 * np.eye(3)), np.eye(3), 0.7, 0.001)
    assert sp.JeTilde == pytest.approx(0.729) and sp.Je == pytest.approx(0.729)
    sp = elastic_split(DeformationState.from_F(np.diag([1.2, 1, 1])), np.eye(3), 1.0, 0.001)
    assert sp.JeTilde == pytest.approx(1.0)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
def test_elastic_split_invariants(seed, s):
    sp = elastic_split(DeformationState.from_F(random_F(seed)), np.eye(3), s, 0.001)
    assert np.prod(sp.lambdaEIso) == pytest.approx(1.0, abs=1e-10)
    if sp.Je <= 1.0:
        assert sp.JeTilde == sp.Je


def test_elastic_split_singular_plastic_map():
    with pytest.raises(PlasticStateCorrupt):
        elastic_split(DeformationState.from_F(np.eye(3)), np.diag([1.0, 1.0, 0.0]), 0.0, 0.001)


def test_fiber_kinematics_identity_and_rotation():
    fk = fiber_kinematics(DeformationState.from_F(np.eye(3)), L, M)
    assert fk.lambdaL == 1.0 and fk.lambdaM == 1.0 and fk.phi == pytest.approx(0.0, abs=1e-15)
    assert np.all(fk.kappaL == 0) and np.all(fk.kappaM == 0)
    Q = Rotation.from_rotvec([0.3, -0.5, 1.1]).as_matrix()
    fk = fiber_kinematics(DeformationState.from_F(Q), L, M)
    assert fk.lambdaL == pytest.approx(1.0) and fk.phi == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(fk.kappaL, 0.0)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fiber_kinematics_invariants(seed):
    F = random_F(seed, 0.2)
    fk = fiber_kinematics(DeformationState.from_F(F), L, M)
    assert fk.lambdaL == pytest.approx(np.linalg.norm(F @ L), rel=1e-14)
    assert abs(fk.phi) < np.pi / 2
    assert np.linalg.norm(fk.lTilde) == pytest.approx(1.0, abs=1e-12)
    # homogeneous deformation has no curvature
    assert np.all(fk.kappaL == 0.0) and np.all(fk.kappaM == 0.0)


def test_fiber_kinematics_shear_degradation():
    F = np.array([[1.0, 0.2, 0], [0, 1, 0], [0, 0, 1]])
    fk = fiber_kinematics(DeformationState.from_F(F), L, M, sL=1.0)
    assert fk.phiTilde == 0.0
    assert fk.phi == pytest.approx(np.arccos(0.2 / np.hypot(1, 0.2)) - np.pi / 2)


def test_fiber_kinematics_collapsed_fiber():
    F = np.diag([0.0, 1.0, 1.0])
    st_ = DeformationState(F, np.zeros((3, 3, 3)), 0.0, np.ones(3), np.eye(3), np.eye(3))
    with pytest.raises(DegenerateFiber):
        fiber_kinematics(st_, L, M)
