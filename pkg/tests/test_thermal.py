import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradfiber.errors import InvertedElement
from gradfiber.phasefield import FractureParams
from gradfiber.thermal import (ThermalParams, conductivity_tensor, heat_capacity, heat_flux,
                               internal_dissipation)

TP = ThermalParams(K_mat=0.25, K_fib=0.5, K_conv=0.01)


def test_conductivity_examples():
    assert np.allclose(conductivity_tensor(np.eye(3), 0.0, TP, 0.6), (0.6 * 0.25 + 0.4 * 0.5) * np.eye(3))
    assert np.allclose(conductivity_tensor(np.eye(3), 1.0, TP, 0.6), 0.01 * np.eye(3))
    K = conductivity_tensor(np.diag([2.0, 1, 1]), 0.0, TP, 1.0)
    assert K[0, 0] == pytest.approx(0.25 / 4)


def test_flux_runs_down_the_gradient():
    Q = heat_flux(np.eye(3), [1.0, 0, 0], 0.0, TP, 0.5)
    assert Q[0] < 0 and Q[1] == 0 and Q[2] == 0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
def test_conduction_is_dissipative(seed, s):
    rng = np.random.default_rng(seed)
    F = np.eye(3) + rng.uniform(-0.3, 0.3, (3, 3))
    if np.linalg.det(F) < 0.1:
        return
    g = rng.normal(size=3)
    # -Q . grad theta >= 0
    assert -heat_flux(F, g, s, TP, 0.53) @ g >= -1e-14


def test_inverted_map_rejected():
    with pytest.raises(InvertedElement):
        conductivity_tensor(np.diag([1.0, 1, -1]), 0.0, TP, 0.5)


def test_dissipation():
    fp = FractureParams()
    assert internal_dissipation(1.0, 0.0, 10.0, 0.0, 5.0, 0.0, 0.0, 0.0, 0.0, 0.0, fp) == 0.0
    d = internal_dissipation(1.0, 0.1, 10.0, 2.0, 5.0, 1.0, 3.0, 0.5, 0.2, 0.1, fp)
    assert d == pytest.approx(0.9 * 0.9 * 10 * 2 + 0.9 * 5 * 0.5 + 0.9 * (0.2 + 0.3))
    rng = np.random.default_rng(1)
    args = rng.uniform(0, 1, (11, 50))
    assert np.all(internal_dissipation(*args[:10], fp) >= 0)


def test_heat_capacity():
    assert heat_capacity(0.53, 1.86, 2.08, 0.47) == pytest.approx(0.53 * 1.86 + 0.47 * 2.08)
    with pytest.raises(ValueError):
        ThermalParams(K_mat=-1.0)
