"""Univariate B-spline basis functions and derivatives."""
import numpy as np

from .._jit import njit


@njit
def find_span(knots, p, xi):
    """Index ``i`` with ``knots[i] <= xi < knots[i+1]`` (last span closed)."""
    n = knots.shape[0] - p - 1
    if xi >= knots[n]:
        return n - 1
    if xi <= knots[p]:
        return p
    lo = p
    hi = n
    mid = (lo + hi) // 2
    while xi < knots[mid] or xi >= knots[mid + 1]:
        if xi < knots[mid]:
            hi = mid
        else:
            lo = mid
        mid = (lo + hi) // 2
    return mid


@njit
def basis_derivatives(knots, p, span, xi, nd):
    """Non-zero basis functions and derivatives up to order ``nd``.

    Returns an ``(nd + 1, p + 1)`` array; row ``k`` holds the ``k``-th
    derivative of ``N[span - p], ..., N[span]``.
    """
    ndu = np.zeros((p + 1, p + 1))
    left = np.zeros(p + 1)
    right = np.zeros(p + 1)
    ndu[0, 0] = 1.0
    for j in range(1, p + 1):
        left[j] = xi - knots[span + 1 - j]
        right[j] = knots[span + j] - xi
        saved = 0.0
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved
    ders = np.zeros((nd + 1, p + 1))
    for j in range(p + 1):
        ders[0, j] = ndu[j, p]
    a = np.zeros((2, p + 1))
    for r in range(p + 1):
        s1 = 0
        s2 = 1
        a[0, 0] = 1.0
        for k in range(1, nd + 1):
            d = 0.0
            rk = r - k
            pk = p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d += a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d += a[s2, k] * ndu[r, pk]
            ders[k, r] = d
            s1, s2 = s2, s1
    fac = p
    for k in range(1, nd + 1):
        for j in range(p + 1):
            ders[k, j] *= fac
        fac *= p - k
    return ders


def bspline_basis(knots, degree, xi):
    """Active B-spline values with first and second derivatives at ``xi``.

    Parameters
    ----------
    knots : array_like
        Open knot vector.
    degree : int
    xi : float
        Parameter value inside the knot range.

    Returns
    -------
    values, d1, d2 : (degree + 1,) ndarray
    first : int
        Global index of the first active function.
    """
    knots = np.asarray(knots, float)
    if xi < knots[0] - 1e-14 or xi > knots[-1] + 1e-14:
        raise ValueError("parameter outside the knot range")
    span = find_span(knots, degree, float(xi))
    ders = basis_derivatives(knots, degree, span, float(xi), min(2, degree))
    if ders.shape[0] < 3:
        ders = np.vstack([ders, np.zeros((3 - ders.shape[0], degree + 1))])
    return ders[0].copy(), ders[1].copy(), ders[2].copy(), span - degree


def open_uniform_knots(n_el, degree, length=1.0):
    """Open knot vector with ``n_el`` equal spans on ``[0, length]``."""
    inner = np.linspace(0.0, length, n_el + 1)
    return np.concatenate([np.zeros(degree), inner, np.full(degree, length)])


def greville(knots, degree):
    """Greville abscissae (control point parameters of the identity map)."""
    knots = np.asarray(knots, float)
    n = knots.size - degree - 1
    return np.array([knots[i + 1:i + degree + 1].mean() for i in range(n)])
