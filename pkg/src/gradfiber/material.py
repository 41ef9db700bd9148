"""Composite material container and the batched quadrature-point kernel."""
from dataclasses import dataclass, field, replace

import numpy as np

from ._jit import njit, prange
from .fiber import FiberParams, fiber_hessian, fiber_kernel
from .gtn import PlasticParams, return_map_kernel
from .matrix import MatrixParams, matrix_kernel
from .phasefield import FractureParams
from .thermal import ThermalParams

FD_STEP = 1e-7


@dataclass(frozen=True)
class Material:
    """All constitutive parameters of the composite."""

    matrix: MatrixParams = field(default_factory=MatrixParams)
    fiber: FiberParams = field(default_factory=FiberParams)
    plastic: PlasticParams = field(default_factory=PlasticParams)
    fracture: FractureParams = field(default_factory=FractureParams)
    thermal: ThermalParams = field(default_factory=ThermalParams)

    def __post_init__(self):
        if self.plastic.enabled and self.plastic.l_p < self.fracture.lf:
            raise ValueError("plastic length scale must not be below the fracture length scale")
        if abs(self.fiber.zeta - self.matrix.zeta) > 1e-14:
            object.__setattr__(self, "fiber", replace(self.fiber, zeta=self.matrix.zeta))

    @property
    def zeta(self):
        return self.matrix.zeta

    def heat_capacity(self):
        """Composite volumetric heat capacity (MPa/K)."""
        return self.zeta * self.matrix.c_mat + self.fiber.weights()[3] * self.fiber.c_fib

    def packed(self):
        """Arrays consumed by :func:`evaluate_points`."""
        m = self.matrix
        mu, alpha = m.arrays()
        mp = np.array([m.kappa, m.beta, m.eps, m.gamma, m.theta0, m.zeta])
        fp = np.array(self.fiber.kernel_args(), dtype=float)
        return mu, alpha, mp, self.plastic.array(), fp, np.asarray(self.fiber.L, float), np.asarray(self.fiber.M, float)


@njit
def _matrix_point(F, Fp_n, rp, theta, dt, g, mu, alpha, mp, pp, z0, warm):
    ell, nv, Fp, dgam, sbar, phi, f, st = return_map_kernel(F, Fp_n, rp, theta, dt, g, mu, alpha, mp, pp, z0, warm)
    P = np.zeros((3, 3))
    z = np.zeros(4)
    psi = 0.0
    dpsi_dg = 0.0
    dpsi_dth = 0.0
    if st != 0:
        return P, z, Fp, dgam, sbar, phi, f, psi, dpsi_dg, dpsi_dth, st
    psi, d_iso, d_vol, dpsi_dg, dpsi_dth = matrix_kernel(ell, g, theta, mu, alpha, mp[0], mp[1], mp[2], mp[3], mp[4])
    tau = np.zeros((3, 3))
    for a in range(3):
        ta = mp[5] * (d_iso[a] + d_vol)
        for i in range(3):
            for j in range(3):
                tau[i, j] += ta * nv[i, a] * nv[j, a]
    P = tau @ np.linalg.inv(F).T
    z[0:3] = ell
    z[3] = dgam
    return P, z, Fp, dgam, sbar, phi, f, psi, dpsi_dg, dpsi_dth, 0


@njit(parallel=True)
def evaluate_points(F, G, Fp_n, rp, theta, gs, gL, gM, dgs, dgL, dgM, dt,
                    mu, alpha, mp, pp, fp, L, M, want_tangent):
    """Constitutive response at ``n`` quadrature points.

    Parameters
    ----------
    F, G : (n, 3, 3), (n, 3, 3, 3) ndarray
        Deformation gradient and its material gradient.
    Fp_n : (n, 3, 3) ndarray
        Committed plastic maps.
    rp, theta : (n,) ndarray
    gs, gL, gM : (n,) ndarray
        Degradation values of the matrix and fiber phase fields.
    dgs, dgL, dgM : (n,) ndarray
        Degradation slopes ``dg/ds``.

    Returns
    -------
    P : (n, 3, 3)
        First Piola-Kirchhoff stress (matrix + fibers).
    gfib : (n, 12)
        Fiber energy gradient with respect to ``(FL, FM, (GL)L, (GM)M)``.
    D : (n, 9, 9)
        Matrix tangent dP/dF (forward differences through the return map).
    Hf : (n, 12, 12)
        Fiber Hessian.
    Fp : (n, 3, 3)
    dgam, sbar, phi, f : (n,)
    H, HL, HM : (n,)
        Clamped crack driving forces.
    psi : (n,)
        Weighted elastic energy density.
    eta_mech : (n,)
        Deformation part of the entropy density.
    status : (n,) int
    """
    n = F.shape[0]
    P = np.zeros((n, 3, 3))
    gfib = np.zeros((n, 12))
    nt = n if want_tangent else 1
    D = np.zeros((nt, 9, 9))
    Hf = np.zeros((nt, 12, 12))
    Fp = np.zeros((n, 3, 3))
    dgam = np.zeros(n)
    sbar = np.zeros(n)
    phi = np.zeros(n)
    f = np.zeros(n)
    H = np.zeros(n)
    HL = np.zeros(n)
    HM = np.zeros(n)
    psi = np.zeros(n)
    eta = np.zeros(n)
    status = np.zeros(n, np.int64)
    zeta = mp[5]
    for q in prange(n):
        Fq = F[q]
        z0 = np.zeros(4)
        Pm, z, Fpq, dg, sb, ph, fq, pm, dpg, dpt, st = _matrix_point(
            Fq, Fp_n[q], rp[q], theta[q], dt, gs[q], mu, alpha, mp, pp, z0, False)
        if st != 0:
            status[q] = st
            continue
        x = np.empty(12)
        Gq = G[q]
        for i in range(3):
            x[i] = Fq[i, 0] * L[0] + Fq[i, 1] * L[1] + Fq[i, 2] * L[2]
            x[3 + i] = Fq[i, 0] * M[0] + Fq[i, 1] * M[1] + Fq[i, 2] * M[2]
            bl = 0.0
            bm = 0.0
            for J in range(3):
                for K in range(3):
                    bl += Gq[i, J, K] * L[J] * L[K]
                    bm += Gq[i, J, K] * M[J] * M[K]
            x[6 + i] = bl
            x[9 + i] = bm
        pf, gf, dgl, dgm, dtf, stf = fiber_kernel(x, gL[q], gM[q], theta[q], fp[0], fp[1], fp[2], fp[3],
                                                  fp[4], fp[5], fp[6], fp[7], fp[8])
        if stf != 0:
            status[q] = stf
            continue
        for i in range(3):
            for J in range(3):
                P[q, i, J] = Pm[i, J] + gf[i] * L[J] + gf[3 + i] * M[J]
        for k in range(12):
            gfib[q, k] = gf[k]
        Fp[q] = Fpq
        dgam[q] = dg
        sbar[q] = sb
        phi[q] = ph
        f[q] = fq
        H[q] = max(-zeta * dgs[q] * dpg, 0.0)
        HL[q] = max(-dgL[q] * dgl, 0.0)
        HM[q] = max(-dgM[q] * dgm, 0.0)
        psi[q] = zeta * pm + pf
        eta[q] = -zeta * dpt - dtf
        if want_tangent:
            Fh = Fq.copy()
            for i in range(3):
                for J in range(3):
                    Fh[i, J] += FD_STEP
                    Ph = _matrix_point(Fh, Fp_n[q], rp[q], theta[q], dt, gs[q], mu, alpha, mp, pp, z, True)
                    Fh[i, J] = Fq[i, J]
                    if Ph[10] != 0:
                        status[q] = Ph[10]
                    for k in range(3):
                        for K in range(3):
                            D[q, 3 * k + K, 3 * i + J] = (Ph[0][k, K] - Pm[k, K]) / FD_STEP
            Hf[q] = fiber_hessian(x, gL[q], gM[q], theta[q], fp[0], fp[1], fp[2], fp[3],
                                  fp[4], fp[5], fp[6], fp[7], fp[8])
    return P, gfib, D, Hf, Fp, dgam, sbar, phi, f, H, HL, HM, psi, eta, status
