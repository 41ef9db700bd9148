"""Ogden-type thermoelastic polymer matrix.

The kernels work on logarithmic elastic principal stretches
``ell[a] = ln(lambda_e[a])``, which keeps the exponential return map and the
degradation ``lambda ** g`` (that is ``g * ell``) linear in the inputs.
"""
from dataclasses import dataclass

import numpy as np

from ._jit import njit
from .errors import InvertedElement
from .kinematics import degradation, degradation_slope


@dataclass(frozen=True)
class MatrixParams:
    """Matrix material constants (MPa, K, MPa/K)."""

    mu: tuple = (1630.4,)
    alpha: tuple = (2.0,)
    kappa: float = 6250.0
    beta: float = -2.0
    eps: float = 106e-6
    gamma: float = 1.0
    theta0: float = 293.0
    c_mat: float = 1.86
    zeta: float = 0.53

    def __post_init__(self):
        if len(self.mu) == 0 or len(self.mu) != len(self.alpha):
            raise ValueError("need matching, non-empty (mu_b, alpha_b) pairs")
        if self.kappa <= 0.0:
            raise ValueError("kappa must be positive")
        if not 0.0 <= self.zeta <= 1.0:
            raise ValueError("zeta must lie in [0, 1]")

    def arrays(self):
        return np.asarray(self.mu, dtype=float), np.asarray(self.alpha, dtype=float)


@njit
def _vol_energy(x, kappa, beta):
    # kappa/beta^2 (beta x + exp(-beta x) - 1), with the beta -> 0 limit
    if abs(beta) < 1e-12:
        return 0.5 * kappa * x * x
    return kappa / (beta * beta) * (beta * x + np.exp(-beta * x) - 1.0)


@njit
def _vol_slope(x, kappa, beta):
    if abs(beta) < 1e-12:
        return kappa * x
    return kappa / beta * (1.0 - np.exp(-beta * x))


@njit
def _expansion(x, gamma):
    # ((J~)^gamma - 1) / gamma with J~ = exp(x)
    if abs(gamma) < 1e-12:
        return x
    return (np.exp(gamma * x) - 1.0) / gamma


@njit
def matrix_kernel(ell, g, theta, mu, alpha, kappa, beta, eps, gamma, theta0):
    """Unweighted elastic matrix response in log-stretch variables.

    Parameters
    ----------
    ell : (3,) ndarray
        Logarithmic elastic principal stretches.
    g : float
        Degradation value g(s).

    Returns
    -------
    psi : float
        Elastic energy (isochoric + volumetric incl. thermal coupling).
    d_iso : (3,) ndarray
        d psi_iso / d ell_a (deviatoric, sums to zero).
    d_vol : float
        d psi_vol / d ell_a (same for every a).
    dpsi_dg : float
        Partial derivative of psi with respect to g.
    dpsi_dtheta : float
        Partial derivative of psi with respect to theta.
    """
    lnJ = ell[0] + ell[1] + ell[2]
    mean = lnJ / 3.0
    psi = 0.0
    dpsi_dg = 0.0
    d_iso = np.zeros(3)
    for b in range(mu.shape[0]):
        ssum = 0.0
        e = np.empty(3)
        for a in range(3):
            lb = ell[a] - mean
            e[a] = np.exp(alpha[b] * g * lb)
            psi += mu[b] / alpha[b] * (e[a] - 1.0)
            dpsi_dg += mu[b] * lb * e[a]
            ssum += e[a]
        for a in range(3):
            d_iso[a] += g * mu[b] * (e[a] - ssum / 3.0)
    tension = lnJ > 0.0
    gv = g if tension else 1.0
    x = gv * lnJ
    dth = theta - theta0
    psi += _vol_energy(x, kappa, beta) - 3.0 * eps * kappa * dth * _expansion(x, gamma)
    slope = _vol_slope(x, kappa, beta) - 3.0 * eps * kappa * dth * np.exp(gamma * x)
    d_vol = gv * slope
    if tension:
        dpsi_dg += lnJ * slope
    dpsi_dtheta = -3.0 * eps * kappa * _expansion(x, gamma)
    return psi, d_iso, d_vol, dpsi_dg, dpsi_dtheta


@njit
def thermal_energy(theta, theta0, c):
    return c * (theta - theta0 - theta * np.log(theta / theta0))


def _log_stretches(split):
    if split.JeTilde <= 0.0 or split.Je <= 0.0:
        raise InvertedElement("non-positive elastic Jacobian")
    return np.log(split.lambdaE)


def _eval(split, theta, p):
    mu, alpha = p.arrays()
    g = float(degradation(split.s, split.a_g))
    return matrix_kernel(_log_stretches(split), g, float(theta), mu, alpha,
                         p.kappa, p.beta, p.eps, p.gamma, p.theta0)


def matrix_energy(split, theta, p):
    """Elastic plus thermal matrix energy density (not weighted by zeta)."""
    psi = _eval(split, theta, p)[0]
    return float(psi + thermal_energy(theta, p.theta0, p.c_mat))


def matrix_kirchhoff_stress(split, theta, p):
    """Deviatoric and volumetric matrix Kirchhoff stress (weighted by zeta).

    Returns
    -------
    tau_dev, tau_vol : (3, 3) ndarray
    """
    _, d_iso, d_vol, _, _ = _eval(split, theta, p)
    n = split.n
    tau_dev = p.zeta * (n * d_iso) @ n.T
    tau_vol = p.zeta * d_vol * (n @ n.T)
    return tau_dev, tau_vol


def matrix_entropy(split, theta, p):
    """Matrix entropy density ``-zeta d(psi_e + psi_theta)/d theta``."""
    dpsi_dtheta = _eval(split, theta, p)[4]
    return float(-p.zeta * (dpsi_dtheta - p.c_mat * np.log(theta / p.theta0)))


def matrix_driving_force(split, theta, p, a_g=None):
    """Crack driving force ``-zeta d psi_e / d s`` clamped at zero."""
    a_g = split.a_g if a_g is None else a_g
    dpsi_dg = _eval(split, theta, p)[3]
    H = -p.zeta * degradation_slope(split.s, a_g) * dpsi_dg
    return float(max(H, 0.0))
