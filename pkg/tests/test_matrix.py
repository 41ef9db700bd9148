import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradfiber.kinematics import DeformationState, elastic_split
from gradfiber.matrix import (MatrixParams, matrix_driving_force, matrix_energy, matrix_entropy,
                              matrix_kirchhoff_stress)

P = MatrixParams()


def split(F, s=0.0):
    return elastic_split(DeformationState.from_F(np.asarray(F, float)), np.eye(3), s, 0.001)


def test_reference_state_is_stress_free():
    sp = split(np.eye(3))
    assert matrix_energy(sp, P.theta0, P) == pytest.approx(0.0, abs=1e-12)
    dev, vol = matrix_kirchhoff_stress(sp, P.theta0, P)
    assert np.allclose(dev, 0) and np.allclose(vol, 0)


def test_uniaxial_energy_oracle():
    # extended-precision evaluation of the Ogden and volumetric terms at F = diag(1.1, 1, 1)
    p = MatrixParams(mu=(1630.4,))
    assert matrix_energy(split(np.diag([1.1, 1, 1])), 293.0, p) == pytest.approx(
        40.3737316435738408106824403142, rel=1e-12)
    p_iso = MatrixParams(mu=(1630.4,), kappa=1e-300 + 1e-9)
    assert matrix_energy(split(np.diag([1.1, 1, 1])), 293.0, p_iso) == pytest.approx(
        10.0930435320890284480328255668, rel=1e-9)


def test_fully_cracked_matrix_keeps_no_tensile_energy():
    assert matrix_energy(split(np.diag([1.3, 1.1, 1.05]), s=1.0), 293.0, P) == pytest.approx(0, abs=1e-9)
    # compression survives cracking
    assert matrix_energy(split(0.9 * np.eye(3), s=1.0), 293.0, P) > 0


def test_invalid_parameters():
    with pytest.raises(ValueError):
        MatrixParams(mu=(1.0,), alpha=())
    with pytest.raises(ValueError):
        MatrixParams(kappa=-1.0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.8, 1.25), min_size=3, max_size=3), st.floats(0.0, 0.9),
       st.floats(260.0, 320.0))
def test_kirchhoff_stress_matches_energy_derivative(lams, s, theta):
    lam = np.array(lams)
    sp = split(np.diag(lam), s)
    dev, vol = matrix_kirchhoff_stress(sp, theta, P)
    tau = np.diag(dev + vol)
    h = 1e-6
    for a in range(3):
        up, dn = lam.copy(), lam.copy()
        up[a] += h
        dn[a] -= h
        d = (matrix_energy(split(np.diag(up), s), theta, P)
             - matrix_energy(split(np.diag(dn), s), theta, P)) / (2 * h)
        assert tau[a] == pytest.approx(P.zeta * lam[a] * d, rel=2e-6, abs=1e-5)
    assert abs(np.trace(dev)) < 1e-9 * max(1.0, np.abs(dev).max())


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.85, 1.2), min_size=3, max_size=3), st.floats(0.0, 0.9))
def test_driving_force_is_energy_release(lams, s):
    F = np.diag(lams)
    h = 1e-6
    sp = split(F, s)
    d = (matrix_energy(split(F, s + h), 293.0, P) - matrix_energy(split(F, s - h), 293.0, P)) / (2 * h)
    assert matrix_driving_force(sp, 293.0, P) == pytest.approx(max(-P.zeta * d, 0.0), rel=1e-5, abs=1e-7)


def test_entropy_matches_temperature_derivative():
    sp = split(np.diag([1.05, 0.98, 1.0]))
    h = 1e-4
    d = (matrix_energy(sp, 300 + h, P) - matrix_energy(sp, 300 - h, P)) / (2 * h)
    assert matrix_entropy(sp, 300.0, P) == pytest.approx(-P.zeta * d, rel=1e-6)
