"""Second-gradient fiber material (stretch, shear and curvature of two families).

The energy depends on the deformation only through ``l = F L``, ``m = F M``
and the projected second gradients ``bL = (gradF L) L``, ``bM = (gradF M) M``.
The kernel therefore works on the 12-vector ``(l, m, bL, bM)``; stresses follow
from ``dPsi/dF = dPsi/dl (x) L + dPsi/dm (x) M`` and
``dPsi/dgradF = dPsi/dbL (x) L (x) L + dPsi/dbM (x) M (x) M``.
"""
from dataclasses import dataclass

import numpy as np

from ._jit import njit
from .errors import DegenerateFiber
from .kinematics import PHI_LIMIT, degradation, degradation_slope

_SIN_MIN = np.sin(0.5 * np.pi - PHI_LIMIT)


@dataclass(frozen=True)
class FiberParams:
    """Fiber constants and family weights.

    ``zeta`` is the matrix volume fraction.  By default each family carries the
    weight ``(1 - zeta)/2``; ``family_weights`` overrides this (for example
    ``(1 - zeta, 0)`` for a unidirectional layup).
    """

    a: float = 79000.0
    b: float = 0.0
    c_par: float = 16.46
    c_perp: float = 16.46
    upsilon: float = 5e-6
    c_fib: float = 2.08
    L: tuple = (1.0, 0.0, 0.0)
    M: tuple = (0.0, 1.0, 0.0)
    theta0: float = 293.0
    zeta: float = 0.53
    family_weights: tuple | None = None

    def __post_init__(self):
        for name in ("a", "b", "c_par", "c_perp"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")
        L, M = np.asarray(self.L, float), np.asarray(self.M, float)
        if abs(np.linalg.norm(L) - 1) > 1e-10 or abs(np.linalg.norm(M) - 1) > 1e-10:
            raise ValueError("fiber directions must be unit vectors")
        if abs(L @ M) > 1e-10:
            raise ValueError("fiber directions must be orthogonal")

    def weights(self):
        """(w_L, w_M, w_shear, w_thermal)."""
        if self.family_weights is None:
            wL = wM = 0.5 * (1.0 - self.zeta)
        else:
            wL, wM = (float(w) for w in self.family_weights)
        return wL, wM, np.sqrt(wL * wM), wL + wM

    def kernel_args(self):
        wL, wM, wS, _ = self.weights()
        return (self.a, self.b, self.c_par, self.c_perp, self.upsilon,
                self.theta0, wL, wM, wS)


@njit
def _dot(x, y):
    return x[0] * y[0] + x[1] * y[1] + x[2] * y[2]


@njit
def fiber_kernel(x, gL, gM, theta, a, b, cpar, cperp, ups, theta0, wL, wM, wS):
    """Weighted fiber elastic energy and its reverse-mode gradient.

    Parameters
    ----------
    x : (12,) ndarray
        ``(l, m, bL, bM)``.
    gL, gM : float
        Degradation values of the two families.

    Returns
    -------
    psi : float
    grad : (12,) ndarray
    dpsi_dgL, dpsi_dgM, dpsi_dtheta : float
    status : int
        0 on success, 3 for a degenerate fiber.
    """
    grad = np.zeros(12)
    l = x[0:3]
    m = x[3:6]
    bL = x[6:9]
    bM = x[9:12]
    lamL = np.sqrt(_dot(l, l))
    lamM = np.sqrt(_dot(m, m))
    if lamL < 1e-12 or lamM < 1e-12:
        return 0.0, grad, 0.0, 0.0, 0.0, 3
    tL = l / lamL
    tM = m / lamM
    c = min(1.0, max(-1.0, _dot(tL, tM)))
    w = np.cross(tL, tM)
    wn = np.sqrt(_dot(w, w))
    if wn < _SIN_MIN:
        return 0.0, grad, 0.0, 0.0, 0.0, 3
    nt = w / wn
    pL = _dot(tL, bL)
    pM = _dot(tM, bM)
    kL = (bL - pL * tL) / (lamL * lamL)
    kM = (bM - pM * tM) / (lamM * lamM)
    dth = theta - theta0

    psi = 0.0
    dgL = 0.0
    dgM = 0.0
    dtheta = 0.0
    glamL = 0.0
    glamM = 0.0

    # stretch with tension-only degradation
    if lamL > 1.0:
        ltL = lamL ** gL
        dlt = gL * ltL / lamL
    else:
        ltL = lamL
        dlt = 1.0
    fL = a * (ltL - 1.0) + a * ups * dth
    psi += wL * (0.5 * a * (ltL - 1.0) ** 2 + a * ups * dth * (ltL - 1.0))
    glamL += wL * fL * dlt
    if lamL > 1.0:
        dgL += wL * fL * ltL * np.log(lamL)
    dtheta += wL * a * ups * (ltL - 1.0)

    if lamM > 1.0:
        ltM = lamM ** gM
        dlt = gM * ltM / lamM
    else:
        ltM = lamM
        dlt = 1.0
    fM = a * (ltM - 1.0) + a * ups * dth
    psi += wM * (0.5 * a * (ltM - 1.0) ** 2 + a * ups * dth * (ltM - 1.0))
    glamM += wM * fM * dlt
    if lamM > 1.0:
        dgM += wM * fM * ltM * np.log(lamM)
    dtheta += wM * a * ups * (ltM - 1.0)

    gtL = np.zeros(3)
    gtM = np.zeros(3)
    gnt = np.zeros(3)

    # shear: b (gL gM tan(phi))^2 with tan(phi) = -c / sqrt(1 - c^2)
    if b != 0.0 and wS != 0.0:
        s2 = 1.0 - c * c
        T = -c / np.sqrt(s2)
        g2 = gL * gL * gM * gM
        psi += wS * b * g2 * T * T
        gc = 2.0 * wS * b * g2 * T * (-1.0 / (s2 * np.sqrt(s2)))
        gtL += gc * tM
        gtM += gc * tL
        dgL += 2.0 * wS * b * gL * gM * gM * T * T
        dgM += 2.0 * wS * b * gL * gL * gM * T * T

    # curvature: c_par on the in-plane part (I - nt nt), c_perp on the nt part
    kkL = _dot(kL, kL)
    kkM = _dot(kM, kM)
    pLn = _dot(kL, nt)
    pMn = _dot(kM, nt)
    eL = cpar * (kkL - pLn * pLn) + cperp * pLn * pLn
    eM = cpar * (kkM - pMn * pMn) + cperp * pMn * pMn
    psi += 0.5 * (wL * gL * gL * eL + wM * gM * gM * eM)
    dgL += wL * gL * eL
    dgM += wM * gM * eM
    sL = wL * gL * gL
    sM = wM * gM * gM
    gkL = sL * (cpar * kL + (cperp - cpar) * pLn * nt)
    gkM = sM * (cpar * kM + (cperp - cpar) * pMn * nt)
    gnt += sL * (cperp - cpar) * pLn * kL
    gnt += sM * (cperp - cpar) * pMn * kM

    # nt = w / |w|, w = tL x tM
    gw = (gnt - _dot(nt, gnt) * nt) / wn
    gtL += np.cross(tM, gw)
    gtM += np.cross(gw, tL)

    # kL = (bL - (tL.bL) tL) / lamL^2
    iL2 = 1.0 / (lamL * lamL)
    iM2 = 1.0 / (lamM * lamM)
    qL = _dot(gkL, tL)
    qM = _dot(gkM, tM)
    gbL = (gkL - qL * tL) * iL2
    gbM = (gkM - qM * tM) * iM2
    gtL -= (qL * bL + pL * gkL) * iL2
    gtM -= (qM * bM + pM * gkM) * iM2
    glamL -= 2.0 * _dot(gkL, kL) / lamL
    glamM -= 2.0 * _dot(gkM, kM) / lamM

    # t = x / |x|
    gl = (gtL - _dot(tL, gtL) * tL) / lamL + glamL * tL
    gm = (gtM - _dot(tM, gtM) * tM) / lamM + glamM * tM
    for i in range(3):
        grad[i] = gl[i]
        grad[3 + i] = gm[i]
        grad[6 + i] = gbL[i]
        grad[9 + i] = gbM[i]
    return psi, grad, dgL, dgM, dtheta, 0


@njit
def fiber_hessian(x, gL, gM, theta, a, b, cpar, cperp, ups, theta0, wL, wM, wS):
    """12x12 Hessian by central differences of the analytic gradient."""
    H = np.zeros((12, 12))
    xp = x.copy()
    for j in range(12):
        h = 1e-6 * max(1.0, abs(x[j])) if j < 6 else 1e-6
        xp[j] = x[j] + h
        gp = fiber_kernel(xp, gL, gM, theta, a, b, cpar, cperp, ups, theta0, wL, wM, wS)[1]
        xp[j] = x[j] - h
        gm = fiber_kernel(xp, gL, gM, theta, a, b, cpar, cperp, ups, theta0, wL, wM, wS)[1]
        xp[j] = x[j]
        for i in range(12):
            H[i, j] = (gp[i] - gm[i]) / (2.0 * h)
    for i in range(12):
        for j in range(i + 1, 12):
            v = 0.5 * (H[i, j] + H[j, i])
            H[i, j] = v
            H[j, i] = v
    return H


def fiber_inputs(F, gradF, L, M):
    """Pack ``(F L, F M, (gradF L) L, (gradF M) M)`` into the 12-vector."""
    F = np.asarray(F, float)
    G = np.asarray(gradF, float)
    L = np.asarray(L, float)
    M = np.asarray(M, float)
    return np.concatenate([F @ L, F @ M,
                           np.einsum("iJK,J,K->i", G, L, L),
                           np.einsum("iJK,J,K->i", G, M, M)])


def _evaluate(F, gradF, theta, p, sL, sM, a_gL, a_gM, weights=None):
    x = fiber_inputs(F, gradF, p.L, p.M)
    gL = degradation(sL, a_gL)
    gM = degradation(sM, a_gM)
    args = list(p.kernel_args())
    if weights is not None:
        args[6:9] = weights
    out = fiber_kernel(x, gL, gM, float(theta), *args)
    if out[5] != 0:
        raise DegenerateFiber("fiber collapsed or sheared to +-pi/2")
    return out


def fiber_energy(fk, theta, p):
    """Unweighted fiber energy ``Psi_fib^e + Psi_fib^theta`` from kinematics.

    Parameters
    ----------
    fk : FiberKinematics
    theta : float
    p : FiberParams
    """
    dth = theta - p.theta0
    nn = np.outer(fk.nTilde, fk.nTilde)
    C = p.c_par * (np.eye(3) - nn) + p.c_perp * nn
    psi = 0.5 * p.a * ((fk.lambdaLTilde - 1) ** 2 + (fk.lambdaMTilde - 1) ** 2)
    psi += p.b * fk.phiTilde ** 2
    psi += 0.5 * (fk.kappaLTilde @ C @ fk.kappaLTilde + fk.kappaMTilde @ C @ fk.kappaMTilde)
    psi += p.a * p.upsilon * dth * ((fk.lambdaLTilde - 1) + (fk.lambdaMTilde - 1))
    psi += 2.0 * p.c_fib * (dth - theta * np.log(theta / p.theta0))
    return float(psi)


def fiber_stress(state, theta, p, sL=0.0, sM=0.0, a_gL=0.001, a_gM=0.001):
    """Weighted fiber Kirchhoff stress ``tau_fib = (dPsi/dF) F^T``."""
    g = _evaluate(state.F, state.gradF, theta, p, sL, sM, a_gL, a_gM)[1]
    P = np.outer(g[0:3], p.L) + np.outer(g[3:6], p.M)
    return P @ np.asarray(state.F).T


def fiber_first_piola(state, theta, p, sL=0.0, sM=0.0, a_gL=0.001, a_gM=0.001):
    """Weighted fiber first Piola-Kirchhoff stress ``dPsi/dF``."""
    g = _evaluate(state.F, state.gradF, theta, p, sL, sM, a_gL, a_gM)[1]
    return np.outer(g[0:3], p.L) + np.outer(g[3:6], p.M)


def fiber_higher_order_stress(state, p, sL=0.0, sM=0.0, a_gL=0.001, a_gM=0.001, theta=None):
    """Weighted higher-order stress ``dPsi/dgradF`` as a (3, 3, 3) array."""
    theta = p.theta0 if theta is None else theta
    g = _evaluate(state.F, state.gradF, theta, p, sL, sM, a_gL, a_gM)[1]
    L = np.asarray(p.L, float)
    M = np.asarray(p.M, float)
    return (np.einsum("i,J,K->iJK", g[6:9], L, L)
            + np.einsum("i,J,K->iJK", g[9:12], M, M))


def fiber_driving_forces(state, theta, p, sL=0.0, sM=0.0, a_gL=0.001, a_gM=0.001):
    """Weighted fiber crack driving forces ``(H_L, H_M)``, clamped at zero."""
    out = _evaluate(state.F, state.gradF, theta, p, sL, sM, a_gL, a_gM)
    HL = -degradation_slope(sL, a_gL) * out[2]
    HM = -degradation_slope(sM, a_gM) * out[3]
    return max(float(HL), 0.0), max(float(HM), 0.0)


def fiber_entropy(state, theta, p, sL=0.0, sM=0.0, a_gL=0.001, a_gM=0.001):
    """Weighted fiber entropy ``-d(Psi_e + Psi_theta)/d theta``."""
    out = _evaluate(state.F, state.gradF, theta, p, sL, sM, a_gL, a_gM)
    wth = p.weights()[3]
    return float(-(out[4] - wth * p.c_fib * np.log(theta / p.theta0)))


def fiber_weighted_energy(state, theta, p, sL=0.0, sM=0.0, a_gL=0.001, a_gM=0.001):
    """Weighted fiber energy including the thermal part."""
    out = _evaluate(state.F, state.gradF, theta, p, sL, sM, a_gL, a_gM)
    dth = theta - p.theta0
    wth = p.weights()[3]
    return float(out[0] + wth * p.c_fib * (dth - theta * np.log(theta / p.theta0)))
