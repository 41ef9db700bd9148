"""Deformation measures for the matrix and the two fiber families.

Conventions
-----------
``F[i, J]`` is the deformation gradient and ``gradF[i, J, K] = dF[i, J]/dX[K]``
(symmetric in the last two indices).  Principal stretches are always sorted
in descending order.
"""
from dataclasses import dataclass

import numpy as np

from ._jit import njit
from .errors import (DegenerateFiber, InvalidState, InvertedElement,
                     PlasticStateCorrupt)

# largest admissible |phi| (rad); beyond this tan(phi) is treated as invalid
PHI_LIMIT = 0.5 * np.pi - 1e-6
# relative separation enforced between coincident principal stretches
EIG_PERTURB = 1e-9


@njit
def degradation(s, a_g):
    """Cubic degradation g(s) with g(0) = 1, g(1) = 0 and g'(0) = -a_g."""
    u = 1.0 - s
    return a_g * (u * u * u - u * u) - 2.0 * u * u * u + 3.0 * u * u


@njit
def degradation_slope(s, a_g):
    """dg/ds."""
    u = 1.0 - s
    return -(a_g * (3.0 * u * u - 2.0 * u) - 6.0 * u * u + 6.0 * u)


@njit
def spectral_kernel(F):
    """Eigen-decomposition of F^T F.

    Returns ``(lam, n, N)`` with ``lam`` descending and the principal
    directions stored column-wise (``n[:, a]``, ``N[:, a]``).
    """
    C = F.T @ F
    w, V = np.linalg.eigh(C)
    lam = np.empty(3)
    N = np.empty((3, 3))
    n = np.empty((3, 3))
    # eigh returns ascending values; walk backwards for a descending order
    for a in range(3):
        k = 2 - a
        lam[a] = np.sqrt(max(w[k], 0.0))
        for i in range(3):
            N[i, a] = V[i, k]
    for a in range(3):
        for i in range(3):
            acc = 0.0
            for j in range(3):
                acc += F[i, j] * N[j, a]
            n[i, a] = acc / lam[a]
    return lam, n, N


@njit
def separate_stretches(lam):
    """Push coincident stretches apart by a relative 1e-9."""
    out = lam.copy()
    for a in range(1, 3):
        if out[a - 1] - out[a] < EIG_PERTURB * out[a - 1]:
            out[a] = out[a - 1] * (1.0 - EIG_PERTURB)
    return out


@dataclass(frozen=True)
class DeformationState:
    """Deformation at a quadrature point."""

    F: np.ndarray
    gradF: np.ndarray
    J: float
    lam: np.ndarray
    n: np.ndarray
    N: np.ndarray

    @classmethod
    def from_F(cls, F, gradF=None):
        F = np.asarray(F, dtype=float).reshape(3, 3)
        if gradF is None:
            gradF = np.zeros((3, 3, 3))
        gradF = np.asarray(gradF, dtype=float).reshape(3, 3, 3)
        lam, n, N = spectral_stretches(F)
        return cls(F, gradF, float(np.linalg.det(F)), lam, n, N)


@dataclass(frozen=True)
class ElasticSplit:
    """Elastic part of the multiplicative split and its degraded variants."""

    Fe: np.ndarray
    Je: float
    lambdaE: np.ndarray
    lambdaEIso: np.ndarray
    lambdaETilde: np.ndarray
    lambdaEIsoTilde: np.ndarray
    JeTilde: float
    n: np.ndarray
    N: np.ndarray
    s: float
    a_g: float


@dataclass(frozen=True)
class FiberKinematics:
    """Fiber stretches, shear angle and curvature vectors."""

    lambdaL: float
    lambdaM: float
    phi: float
    kappaL: np.ndarray
    kappaM: np.ndarray
    lTilde: np.ndarray
    mTilde: np.ndarray
    nTilde: np.ndarray
    lambdaLTilde: float
    lambdaMTilde: float
    phiTilde: float
    kappaLTilde: np.ndarray
    kappaMTilde: np.ndarray
    gL: float
    gM: float


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise InvalidState("non-finite entries in kinematic input")


def spectral_stretches(F):
    """Principal stretches and directions of ``F``.

    Parameters
    ----------
    F : (3, 3) array_like
        Deformation gradient with positive determinant.

    Returns
    -------
    lam : (3,) ndarray
        Principal stretches, descending.
    n, N : (3, 3) ndarray
        Spatial and material principal directions as columns, so that
        ``F = sum_a lam[a] * outer(n[:, a], N[:, a])``.
    """
    F = np.asarray(F, dtype=float).reshape(3, 3)
    _check_finite(F)
    if np.linalg.det(F) <= 0.0:
        raise InvertedElement("det F <= 0")
    return spectral_kernel(F)


def degrade_stretch(lam, s, a_g):
    """Degraded stretch ``lam ** g(s)``."""
    if np.any(np.asarray(lam) <= 0.0):
        raise InvalidState("stretch must be positive")
    if np.any((np.asarray(s) < 0.0) | (np.asarray(s) > 1.0)):
        raise InvalidState("phase field outside [0, 1]")
    return np.asarray(lam, dtype=float) ** degradation(np.asarray(s, dtype=float), a_g)


def elastic_split(state, Fp, s, a_g):
    """Split ``state.F`` with the plastic map ``Fp`` and degrade it with ``s``."""
    Fp = np.asarray(Fp, dtype=float).reshape(3, 3)
    _check_finite(Fp)
    det_p = np.linalg.det(Fp)
    if not det_p >= 1.0 - 1e-9:
        raise PlasticStateCorrupt(f"det Fp = {det_p}")
    Fe = state.F @ np.linalg.inv(Fp)
    lam, n, N = spectral_stretches(Fe)
    Je = float(np.prod(lam))
    iso = lam * Je ** (-1.0 / 3.0)
    g = degradation(s, a_g)
    lt = lam ** g
    isot = iso ** g
    Jt = float(np.prod(lt)) if Je > 1.0 else Je
    return ElasticSplit(Fe, Je, lam, iso, lt, isot, Jt, n, N, float(s), float(a_g))


@njit
def fiber_kinematics_kernel(l, m, bL, bM):
    """Stretch, shear angle and curvature from ``l = F L``, ``m = F M``,
    ``bL = (gradF L) L`` and ``bM = (gradF M) M``.

    Returns ``(lamL, lamM, cos_angle, kapL, kapM, tL, tM, nt)``.
    """
    lamL = np.sqrt(l[0] ** 2 + l[1] ** 2 + l[2] ** 2)
    lamM = np.sqrt(m[0] ** 2 + m[1] ** 2 + m[2] ** 2)
    tL = l / lamL
    tM = m / lamM
    c = tL[0] * tM[0] + tL[1] * tM[1] + tL[2] * tM[2]
    c = min(1.0, max(-1.0, c))
    w = np.cross(tL, tM)
    wn = np.sqrt(w[0] ** 2 + w[1] ** 2 + w[2] ** 2)
    nt = w / wn if wn > 0.0 else w
    pL = tL[0] * bL[0] + tL[1] * bL[1] + tL[2] * bL[2]
    pM = tM[0] * bM[0] + tM[1] * bM[1] + tM[2] * bM[2]
    kapL = (bL - pL * tL) / (lamL * lamL)
    kapM = (bM - pM * tM) / (lamM * lamM)
    return lamL, lamM, c, kapL, kapM, tL, tM, nt


def fiber_kinematics(state, L, M, sL=0.0, sM=0.0, a_gL=0.001, a_gM=0.001):
    """Fiber kinematics including degraded measures.

    Parameters
    ----------
    state : DeformationState
    L, M : (3,) array_like
        Orthonormal reference fiber directions.
    sL, sM : float
        Fiber phase fields.
    a_gL, a_gM : float
        Degradation parameters.
    """
    L = np.asarray(L, dtype=float)
    M = np.asarray(M, dtype=float)
    F, G = state.F, state.gradF
    _check_finite(F, G)
    l = F @ L
    m = F @ M
    bL = np.einsum("iJK,J,K->i", G, L, L)
    bM = np.einsum("iJK,J,K->i", G, M, M)
    if np.linalg.norm(l) < 1e-12 or np.linalg.norm(m) < 1e-12:
        raise DegenerateFiber("fiber stretch below 1e-12")
    lamL, lamM, c, kL, kM, tL, tM, nt = fiber_kinematics_kernel(l, m, bL, bM)
    phi = float(np.arccos(c) - 0.5 * np.pi)
    if abs(phi) > PHI_LIMIT:
        raise DegenerateFiber("fiber shear angle reached +-pi/2")
    gL = float(degradation(sL, a_gL))
    gM = float(degradation(sM, a_gM))
    ltL = lamL ** gL if lamL > 1.0 else lamL
    ltM = lamM ** gM if lamM > 1.0 else lamM
    return FiberKinematics(
        float(lamL), float(lamM), phi, kL, kM, tL, tM, nt,
        float(ltL), float(ltM), gL * gM * float(np.tan(phi)), gL * kL, gM * kM, gL, gM,
    )
