"""GTN porous viscoplasticity with an exponential return map.

The effective stress is the positive root of the GTN function.  Written in
``x = 1/sigma_bar`` the function is convex and increasing for ``x > 0`` and
negative at ``x = 0``, so Newton started from an upper bound converges
monotonically; a bisection guard is kept anyway.
"""
import logging
from dataclasses import dataclass

import numpy as np

from ._jit import njit
from .errors import ReturnMapDiverged, YieldSurfaceDegenerate, raise_for_status
from .kinematics import spectral_kernel
from .matrix import matrix_kernel

log = logging.getLogger(__name__)

# the void fraction is capped so that q1 * f stays below 1 - F_MARGIN
F_MARGIN = 1e-3
MAX_ITER = 50


@dataclass(frozen=True)
class PlasticParams:
    """Hardening, viscosity and GTN constants (MPa, 1/K, MPa s, mm)."""

    y0: float = 22.0
    y1: float = 56.8
    y2: float = 30.0
    om_p1: float = 1.0
    om_p2: float = 115.0
    om_t0: float = 0.4
    om_t1: float = 0.4
    om_t2: float = 0.4
    eta_p: float = 5000.0
    n_p: float = 1.0
    l_p: float = 3.1
    f0: float = 0.01
    q1: float = 3.0
    q2: float = 0.8
    theta_ref: float = 293.0
    enabled: bool = True

    def __post_init__(self):
        if not 0.0 <= self.f0 < 1.0:
            raise ValueError("f0 must lie in [0, 1)")
        if self.eta_p <= 0.0:
            raise ValueError("eta_p must be positive")
        if self.q1 * self.f0 >= 1.0:
            raise ValueError("q1 * f0 must be below 1")

    def array(self):
        return np.array([self.y0, self.y1, self.y2, self.om_p1, self.om_p2,
                         self.om_t0, self.om_t1, self.om_t2, self.theta_ref,
                         self.eta_p, self.n_p, self.f0, self.q1, self.q2,
                         1.0 if self.enabled else 0.0])

    def yields_at(self, theta):
        """Thermally scaled ``(y0, y1, y2)``, clamped at zero."""
        raw = thermal_yields(theta, self.array())
        if min(raw[3], raw[4], raw[5]) < 0.0:
            log.warning("yield stress clamped at zero for theta = %.2f K", theta)
        return raw[0], raw[1], raw[2]


@dataclass(frozen=True)
class PlasticHistory:
    """Plastic state of one quadrature point."""

    Fp: np.ndarray
    Jp: float
    alpha: float
    f: float
    rp: float


@njit
def thermal_yields(theta, pp):
    d = theta - pp[8]
    r0 = pp[0] * (1.0 - pp[5] * d)
    r1 = pp[1] * (1.0 - pp[6] * d)
    r2 = pp[2] * (1.0 - pp[7] * d)
    return max(r0, 0.0), max(r1, 0.0), max(r2, 0.0), r0, r1, r2


@njit
def hardening_kernel(alpha, theta, pp):
    """y(alpha, theta) and dy/dalpha."""
    y0, y1, y2, _, _, _ = thermal_yields(theta, pp)
    e1 = np.exp(pp[3] * alpha)
    e2 = np.exp(-pp[4] * alpha)
    return y0 + y1 * e1 + y2 * (1.0 - e2), pp[3] * y1 * e1 + pp[4] * y2 * e2


def hardening_field(alpha, theta, p):
    """Vectorized ``y(alpha, theta)`` with yields clamped at zero."""
    alpha = np.asarray(alpha, float)
    d = np.asarray(theta, float) - p.theta_ref
    y0 = np.maximum(p.y0 * (1.0 - p.om_t0 * d), 0.0)
    y1 = np.maximum(p.y1 * (1.0 - p.om_t1 * d), 0.0)
    y2 = np.maximum(p.y2 * (1.0 - p.om_t2 * d), 0.0)
    return y0 + y1 * np.exp(p.om_p1 * alpha) + y2 * (1.0 - np.exp(-p.om_p2 * alpha))


def hardening(alpha, theta, p):
    """Saturation-type hardening ``y(alpha, theta)`` in MPa."""
    if alpha < 0.0:
        raise ValueError("alpha must be non-negative")
    p.yields_at(theta)
    return float(hardening_kernel(float(alpha), float(theta), p.array())[0])


@njit
def gtn_function(sbar, seq, p, f, q1, q2):
    """GTN function value for a given effective stress."""
    qf = q1 * f
    return seq * seq / (sbar * sbar) + 2.0 * qf * np.cosh(1.5 * q2 * p / sbar) - (1.0 + qf * qf)


@njit
def effective_stress_kernel(seq, p, f, q1, q2):
    """Positive root of the GTN function.

    Returns ``(sigma_bar, x_derivs, status)`` where ``x_derivs`` holds
    ``(d sbar/d seq^2, d sbar/d p)`` for building the flow direction.
    """
    qf = q1 * f
    k = 1.5 * q2
    out = np.zeros(2)
    if qf >= 1.0:
        return 0.0, out, 5
    if seq <= 0.0 and (p == 0.0 or qf == 0.0):
        return 0.0, out, 0
    if qf == 0.0 or (p == 0.0 and qf == 1.0):
        out[0] = 0.5 / seq
        return seq, out, 0
    C = 1.0 + qf * qf
    # upper bounds of the root in x = 1 / sbar
    hi = 1e300
    if seq > 0.0:
        hi = 1.0 / seq
    if p != 0.0 and qf > 0.0:
        xc = np.arccosh(C / (2.0 * qf)) / (k * abs(p))
        if xc < hi:
            hi = xc
    lo = 0.0
    x = hi
    for _ in range(200):
        kpx = k * p * x
        val = seq * seq * x * x + 2.0 * qf * np.cosh(kpx) - C
        if val > 0.0:
            hi = x
        else:
            lo = x
        dval = 2.0 * seq * seq * x + 2.0 * qf * k * p * np.sinh(kpx)
        if dval > 0.0:
            xn = x - val / dval
        else:
            xn = 0.5 * (lo + hi)
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 1e-16 * x or hi - lo <= 1e-16 * hi:
            x = xn
            break
        x = xn
    kpx = k * p * x
    Fx = 2.0 * seq * seq * x + 2.0 * qf * k * p * np.sinh(kpx)
    # d sbar/d(.) = F_(.) / (x^2 F_x) with sbar = 1/x
    out[0] = x * x / (x * x * Fx)
    out[1] = 2.0 * qf * np.sinh(kpx) * k * x / (x * x * Fx)
    return 1.0 / x, out, 0


@njit
def principal_effective(sig, f, q1, q2):
    """sigma_bar and its gradient with respect to principal Cauchy stresses."""
    p = (sig[0] + sig[1] + sig[2]) / 3.0
    d0 = sig[0] - p
    d1 = sig[1] - p
    d2 = sig[2] - p
    seq = np.sqrt(1.5 * (d0 * d0 + d1 * d1 + d2 * d2))
    sbar, dd, st = effective_stress_kernel(seq, p, f, q1, q2)
    n = np.empty(3)
    # d seq^2/d sig_a = 3 dev_a, d p/d sig_a = 1/3
    n[0] = dd[0] * 3.0 * d0 + dd[1] / 3.0
    n[1] = dd[0] * 3.0 * d1 + dd[1] / 3.0
    n[2] = dd[0] * 3.0 * d2 + dd[1] / 3.0
    return sbar, n, st


@njit
def void_fraction(Jp, f0, q1):
    f = max(f0, 1.0 - (1.0 - f0) / Jp)
    if q1 > 0.0:
        f = min(f, (1.0 - F_MARGIN) / q1)
    return f


@njit
def _principal_cauchy(ell, g, theta, J, mu, alpha, mp):
    _, d_iso, d_vol, _, _ = matrix_kernel(ell, g, theta, mu, alpha, mp[0], mp[1], mp[2], mp[3], mp[4])
    sig = np.empty(3)
    for a in range(3):
        sig[a] = mp[5] * (d_iso[a] + d_vol) / J
    return sig


@njit
def _residual(z, ell_tr, g, theta, J, rp, dt, mu, alpha, mp, pp, dev_only):
    """Return-map residual in (ell_0..2, dgamma); the last entry is scaled
    by dt/eta_p so all entries are strains."""
    ell = z[0:3]
    dgam = z[3]
    sig = _principal_cauchy(ell, g, theta, J, mu, alpha, mp)
    Jp = J / np.exp(ell[0] + ell[1] + ell[2])
    f = void_fraction(Jp, pp[11], pp[12])
    sbar, n, st = principal_effective(sig, f, pp[12], pp[13])
    if dev_only:
        m = (n[0] + n[1] + n[2]) / 3.0
        for a in range(3):
            n[a] -= m
    R = np.empty(4)
    for a in range(3):
        R[a] = ell[a] - ell_tr[a] + dgam * n[a]
    phi = sbar - rp
    if phi >= 0.0:
        R[3] = dt / pp[9] * phi ** pp[10] - dgam
    else:
        R[3] = -dt / pp[9] * (-phi) ** pp[10] - dgam
    return R, sbar, phi, f, st


@njit
def _solve4(A, b):
    return np.linalg.solve(A, b)


@njit
def _newton(z, ell_tr, g, theta, J, rp, dt, mu, alpha, mp, pp, dev_only):
    R, sbar, phi, f, st = _residual(z, ell_tr, g, theta, J, rp, dt, mu, alpha, mp, pp, dev_only)
    if st != 0:
        return z, sbar, phi, f, st, 0
    scale = pp[9] / dt
    A = np.empty((4, 4))
    for it in range(MAX_ITER):
        rn = np.sqrt(R[0] ** 2 + R[1] ** 2 + R[2] ** 2 + R[3] ** 2)
        if (abs(R[0]) < 1e-13 and abs(R[1]) < 1e-13 and abs(R[2]) < 1e-13
                and abs(R[3]) * scale < 1e-10):
            return z, sbar, phi, f, 0, it
        for j in range(4):
            h = 1e-8 if j < 3 else 1e-8 * max(abs(z[3]), 1e-4)
            zp = z.copy()
            zp[j] += h
            Rp = _residual(zp, ell_tr, g, theta, J, rp, dt, mu, alpha, mp, pp, dev_only)[0]
            for i in range(4):
                A[i, j] = (Rp[i] - R[i]) / h
        dz = _solve4(A, -R)
        step = 1.0
        accepted = False
        for _ in range(12):
            zn = z + step * dz
            Rn, sb, ph, fn, st = _residual(zn, ell_tr, g, theta, J, rp, dt, mu, alpha, mp, pp, dev_only)
            rnn = np.sqrt(Rn[0] ** 2 + Rn[1] ** 2 + Rn[2] ** 2 + Rn[3] ** 2)
            if st == 0 and rnn <= rn * (1.0 - 1e-4 * step) or (st == 0 and rnn < 1e-14):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # stagnation at round-off level counts as converged
            if rn < 1e-12 and abs(R[3]) * scale < 1e-8:
                return z, sbar, phi, f, 0, it
            return z, sbar, phi, f, 4, it
        z = zn
        R = Rn
        sbar = sb
        phi = ph
        f = fn
    return z, sbar, phi, f, 4, MAX_ITER


@njit
def return_map_kernel(F, Fp_n, rp, theta, dt, g, mu, alpha, mp, pp, z0, warm):
    """Exponential return map at one point.

    Parameters
    ----------
    F, Fp_n : (3, 3) ndarray
        Current deformation gradient and previous plastic map.
    rp : float
        Dissipative resistance (already weighted by zeta).
    g : float
        Matrix degradation value.
    mp : (6,) ndarray
        ``(kappa, beta, eps, gamma, theta0, zeta)``.
    pp : (15,) ndarray
        Packed plastic parameters (see ``PlasticParams.array``).
    z0 : (4,) ndarray
        Warm-start values ``(ell, dgamma)`` used when ``warm`` is true.

    Returns
    -------
    ell : (3,) ndarray
        Final log elastic stretches.
    n : (3, 3) ndarray
        Spatial principal directions (columns).
    Fp : (3, 3) ndarray
    dgamma, sbar, phi, f : float
    status : int
    """
    ell = np.zeros(3)
    nvec = np.eye(3)
    Fp = Fp_n.copy()
    J = np.linalg.det(F)
    if not np.isfinite(J):
        return ell, nvec, Fp, 0.0, 0.0, 0.0, pp[11], 1
    if J <= 0.0:
        return ell, nvec, Fp, 0.0, 0.0, 0.0, pp[11], 2
    Fe = F @ np.linalg.inv(Fp_n)
    lam, nvec, Nvec = spectral_kernel(Fe)
    if lam[2] <= 0.0:
        return ell, nvec, Fp, 0.0, 0.0, 0.0, pp[11], 2
    ell_tr = np.log(lam)
    Jp_n = J / (lam[0] * lam[1] * lam[2])
    f_tr = void_fraction(Jp_n, pp[11], pp[12])
    if pp[14] == 0.0:
        return ell_tr, nvec, Fp, 0.0, 0.0, 0.0, f_tr, 0
    sig = _principal_cauchy(ell_tr, g, theta, J, mu, alpha, mp)
    sbar, n_tr, st = principal_effective(sig, f_tr, pp[12], pp[13])
    if st != 0:
        return ell_tr, nvec, Fp, 0.0, sbar, 0.0, f_tr, st
    phi_tr = sbar - rp
    if phi_tr <= 0.0:
        return ell_tr, nvec, Fp, 0.0, sbar, phi_tr, f_tr, 0
    z = np.empty(4)
    if warm:
        z[:] = z0
    else:
        z[0:3] = ell_tr
        z[3] = 0.0
    z, sbar, phi, f, st, it = _newton(z, ell_tr, g, theta, J, rp, dt, mu, alpha, mp, pp, False)
    if st == 4 and warm:
        z[0:3] = ell_tr
        z[3] = 0.0
        z, sbar, phi, f, st, it = _newton(z, ell_tr, g, theta, J, rp, dt, mu, alpha, mp, pp, False)
    if st != 0:
        return ell_tr, nvec, Fp, 0.0, sbar, phi, f_tr, st
    Jp = J / np.exp(z[0] + z[1] + z[2])
    if Jp < Jp_n and Jp < 1.0:
        # no compaction below the reference void state: deviatoric flow only
        z[0:3] = ell_tr
        z[3] = 0.0
        z, sbar, phi, f, st, it = _newton(z, ell_tr, g, theta, J, rp, dt, mu, alpha, mp, pp, True)
        if st != 0:
            return ell_tr, nvec, Fp, 0.0, sbar, phi, f_tr, st
    ell = z[0:3].copy()
    dgam = z[3]
    if dgam < 0.0:
        dgam = 0.0
    # Fp = Fe^-1 F with Fe = sum exp(ell_a) n_a (x) N_a
    Finv = np.zeros((3, 3))
    for a in range(3):
        c = np.exp(-ell[a])
        for i in range(3):
            for j in range(3):
                Finv[i, j] += c * Nvec[i, a] * nvec[j, a]
    Fp = Finv @ F
    return ell, nvec, Fp, dgam, sbar, phi, f, 0


def effective_stress(tau_mat, J, f, p):
    """Effective GTN stress for a matrix Kirchhoff stress ``tau_mat``.

    Parameters
    ----------
    tau_mat : (3, 3) array_like
    J : float
    f : float
        Void fraction.
    p : PlasticParams
    """
    sig = np.asarray(tau_mat, float) / J
    pr = np.trace(sig) / 3.0
    dev = sig - pr * np.eye(3)
    seq = np.sqrt(1.5 * np.sum(dev * dev))
    sbar, _, st = effective_stress_kernel(seq, pr, f, p.q1, p.q2)
    if st != 0:
        raise YieldSurfaceDegenerate(f"q1 f = {p.q1 * f} >= 1")
    return float(sbar)


def yield_function(sigma_bar, rp):
    """Plastic yield function ``sigma_bar - rp``."""
    return sigma_bar - rp


def return_map(F_next, hist_n, rp_next, theta, dt, p, mat, s=0.0, a_g=0.001):
    """Exponential return map for one quadrature point.

    Parameters
    ----------
    F_next : (3, 3) array_like
    hist_n : PlasticHistory
    rp_next : float
        Dissipative resistance at the end of the step (MPa, zeta-weighted).
    theta, dt : float
    p : PlasticParams
    mat : MatrixParams
    s, a_g : float
        Matrix phase field and degradation parameter.

    Returns
    -------
    hist : PlasticHistory
        Updated plastic state (``alpha`` advanced by ``lambda_p dt/(1-f)``).
    ell : (3,) ndarray
        Log elastic principal stretches.
    n : (3, 3) ndarray
        Spatial principal directions.
    lambda_p : float
    phi : float
        Yield function value at the end of the step.
    """
    from .kinematics import degradation

    mu, alpha = mat.arrays()
    mp = np.array([mat.kappa, mat.beta, mat.eps, mat.gamma, mat.theta0, mat.zeta])
    F = np.asarray(F_next, float)
    ell, n, Fp, dgam, sbar, phi, f, st = return_map_kernel(
        F, np.asarray(hist_n.Fp, float), float(rp_next), float(theta), float(dt),
        float(degradation(s, a_g)), mu, alpha, mp, p.array(), np.zeros(4), False)
    raise_for_status(st, "return map")
    lam_p = dgam / dt
    alpha_new = hist_n.alpha + plastic_rate_terms(lam_p, None, f, rp_next)[1] * dt
    hist = PlasticHistory(Fp, float(np.linalg.det(Fp)), float(alpha_new), float(f), float(rp_next))
    return hist, ell, n, float(lam_p), float(phi)


def plastic_rate_terms(lambda_p, n_a, f, rp):
    """Plastic rate of deformation and equivalent plastic strain rate.

    ``n_a`` is either ``None`` or a pair ``(n_principal, directions)``; the
    rate of deformation is returned as a (3, 3) array when it is given.
    """
    alpha_dot = lambda_p / (1.0 - f)
    if n_a is None:
        return None, alpha_dot
    nv, dirs = n_a
    dp = lambda_p * (dirs * np.asarray(nv)) @ dirs.T
    return dp, alpha_dot


__all__ = ["PlasticParams", "PlasticHistory", "hardening", "effective_stress",
           "yield_function", "return_map", "plastic_rate_terms", "ReturnMapDiverged"]
