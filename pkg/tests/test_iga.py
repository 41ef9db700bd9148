import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradfiber.checks import basis_errors
from gradfiber.iga import NurbsPatch, bspline_basis, greville, open_uniform_knots


def test_open_knots():
    assert np.allclose(open_uniform_knots(3, 2), [0, 0, 0, 1 / 3, 2 / 3, 1, 1, 1])
    assert np.allclose(open_uniform_knots(2, 1, 4.0), [0, 0, 2, 4, 4])


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 1.0), st.integers(1, 4), st.integers(1, 9))
def test_partition_of_unity_and_linear_precision(xi, p, n_el):
    kn = open_uniform_knots(n_el, p)
    N, dN, d2N, first = bspline_basis(kn, p, xi)
    assert np.all(N >= -1e-15)
    assert N.sum() == pytest.approx(1.0, abs=1e-13)
    assert abs(dN.sum()) < 1e-10 * n_el * p
    g = greville(kn, p)[first:first + p + 1]
    assert N @ g == pytest.approx(xi, abs=1e-13)
    assert dN @ g == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.99))
def test_derivatives_match_differences(xi):
    kn = open_uniform_knots(5, 3)
    h = 1e-6
    N, dN, d2N, first = bspline_basis(kn, 3, xi)
    Np, dNp, _, fp = bspline_basis(kn, 3, xi + h)
    Nm, dNm, _, fm = bspline_basis(kn, 3, xi - h)
    if fp != first or fm != first:
        return
    assert np.allclose(dN, (Np - Nm) / (2 * h), atol=1e-6)
    assert np.allclose(d2N, (dNp - dNm) / (2 * h), atol=1e-4)


def test_basis_checks():
    pou, jump = basis_errors()
    assert pou < 1e-12 and jump < 1e-10


def test_outside_knot_range():
    with pytest.raises(ValueError):
        bspline_basis(open_uniform_knots(2, 2), 2, 1.5)


def test_box_patch_geometry():
    patch = NurbsPatch.box((20.0, 4.0, 2.0), (5, 2, 1))
    q = patch.quadrature()
    assert q.wdet.sum() == pytest.approx(160.0, rel=1e-12)
    X = np.array([13.0, 1.5, 0.7])
    xi = patch.locate(X)
    assert np.allclose(patch.geometry(xi), X, atol=1e-10)
    idx, R, dR, d2R, _ = patch.evaluate(xi)
    assert R.sum() == pytest.approx(1.0)
    # the identity map has unit gradient and no curvature
    assert np.allclose(patch.flat_points[idx].T @ dR, np.eye(3), atol=1e-12)
    assert np.allclose(np.einsum("a,aij->ij", patch.flat_points[idx][:, 0], d2R), 0, atol=1e-10)


def test_quadrature_integrates_quadratics():
    patch = NurbsPatch.box((2.0, 1.0, 1.0), (3, 2, 2))
    q = patch.quadrature()
    X = np.einsum("eqa,eai->eqi", q.R, patch.flat_points[q.conn])
    assert np.sum(q.wdet * X[..., 0] ** 2) == pytest.approx(8.0 / 3.0, rel=1e-12)


def test_companion_mesh():
    patch = NurbsPatch.box((40.0, 10.0, 2.0), (8, 2, 1))
    mesh = patch.companion_mesh()
    assert mesh.n_nodes == 9 * 3 * 2
    assert mesh.conn.shape == (16, 8)
    N, dN = patch.companion_quadrature(patch.quadrature())
    assert np.allclose(N.sum(axis=-1), 1.0)
