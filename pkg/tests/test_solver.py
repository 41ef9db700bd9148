import numpy as np
import pytest

from gradfiber.checks import run_properties, small_tension
from gradfiber.solver import Simulation
from gradfiber.solver.assembly import _mech_kernel, _mech_numpy
from gradfiber.solver.layout import DirichletBC, DofLayout


@pytest.fixture(scope="module")
def sim():
    sc = small_tension()
    return Simulation(sc.patch, sc.material, sc.layout, sc.options)


def test_compiled_and_numpy_assembly_agree(sim):
    rng = np.random.default_rng(0)
    ne, nq = sim.ne, sim.nq
    args = (sim.quad.dR, sim.cfib, sim.quad.wdet, rng.normal(size=(ne, nq, 3, 3)),
            rng.normal(size=(ne, nq, 12)), rng.normal(size=(ne, nq, 9, 9)), rng.normal(size=(ne, nq, 12, 12)))
    fa, Ka = _mech_kernel(*args, True)
    fb, Kb = _mech_numpy(*args, True)
    assert np.allclose(fa, fb, rtol=1e-12, atol=1e-10)
    assert np.allclose(Ka, Kb, rtol=1e-12, atol=1e-10)


@pytest.mark.parametrize("amp", [1e-3, 2e-2])
def test_tangent_matches_residual_differences(sim, amp):
    rng = np.random.default_rng(1)
    st = sim.initial_state()
    X = sim.patch.flat_points
    # a smooth stretch plus noise; the larger amplitude goes plastic
    u = np.column_stack([amp * X[:, 0], -0.3 * amp * X[:, 1], 0 * X[:, 2]])
    u = u + 0.1 * amp * rng.normal(size=u.shape)
    s3 = (st.s, st.sL, st.sM)
    ev = sim.evaluate(u, st, st.rp, st.theta, s3, 0.1, True)
    _, K, _, _ = sim.mechanical_residual(ev, u, 0.0, True)
    K = K.toarray()
    h = 1e-7
    for j in rng.choice(u.size, 6, replace=False):
        up, um = u.ravel().copy(), u.ravel().copy()
        up[j] += h
        um[j] -= h
        rp = sim.mechanical_residual(sim.evaluate(up.reshape(-1, 3), st, st.rp, st.theta, s3, 0.1, False),
                                     up, 0.0, False)[0]
        rm = sim.mechanical_residual(sim.evaluate(um.reshape(-1, 3), st, st.rp, st.theta, s3, 0.1, False),
                                     um, 0.0, False)[0]
        fd = (rp - rm) / (2 * h)
        assert np.linalg.norm(K[:, j] - fd) <= 1e-4 * np.linalg.norm(fd) + 1e-6


def test_conflicting_dirichlet_values():
    lay = DofLayout(4, 1, dirichlet=[DirichletBC([0, 1], 0, 0.0), DirichletBC([1, 2], 0, 1.0)])
    with pytest.raises(ValueError, match="conflicting"):
        lay.mech_dirichlet(0.0)
    ok = DofLayout(4, 1, dirichlet=[DirichletBC([0, 1], 0, 0.5), DirichletBC([1, 2], 0, 0.5)])
    dofs, vals = ok.mech_dirichlet(0.0)
    assert list(dofs) == [0, 3, 6] and np.all(vals == 0.5)


def test_field_ranges_are_disjoint():
    lay = DofLayout(10, 4)
    r = lay.ranges
    spans = sorted(r.values())
    assert spans[0][0] == 0
    assert all(a[1] == b[0] for a, b in zip(spans, spans[1:]))
    assert r["u"][1] - r["u"][0] == 30 and r["alpha"][1] - r["alpha"][0] == 4


def test_short_run_is_irreversible_balanced_and_dissipative():
    irrev, resid, dmin, state = run_properties(small_tension())
    assert irrev
    assert resid < 1e-6
    assert dmin >= -1e-10
    assert state.alpha.max() > 0
