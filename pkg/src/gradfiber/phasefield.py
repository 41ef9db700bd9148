"""Crack phase fields: densities, critical energies and the gated viscous update."""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

# nodes at or above this value are treated as fully broken and pinned to 1
PIN_THRESHOLD = 0.99


@dataclass(frozen=True)
class FractureParams:
    """Fracture constants (N/mm, mm, MPa s)."""

    gce: float = 500.0
    gcp: float = 50.0
    om_f: float = 3.0
    gcL: float = 500.0
    gcM: float = 500.0
    lf: float = 3.1
    lfL: float = 3.1
    lfM: float = 3.1
    eta_f: float = 1e-7
    eta_fL: float = 1e-7
    eta_fM: float = 1e-7
    a_g: float = 0.001
    a_gL: float = 0.001
    a_gM: float = 0.001
    nu_pmat: float = 0.9
    nu_fmat: float = 0.9
    nu_ffib: float = 0.9
    healing: bool = False
    enabled: bool = True

    def __post_init__(self):
        for name in ("lf", "lfL", "lfM"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        for name in ("eta_f", "eta_fL", "eta_fM"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")


def crack_density(s, grad_s, lf):
    """Regularized crack surface density ``(s^2 + lf^2 |grad s|^2) / (2 lf)``."""
    g = np.asarray(grad_s, float)
    return (np.asarray(s, float) ** 2 + lf * lf * np.sum(g * g, axis=-1)) / (2.0 * lf)


def gc_matrix(alpha, fp):
    """Critical energy of the matrix, softened by plastic strain."""
    return fp.gcp + fp.gce * np.exp(-fp.om_f * np.asarray(alpha, float))


def threshold_switch(H, r_f):
    """1 where the crack threshold ``H - r_f`` is positive, else 0."""
    return (np.asarray(H, float) - np.asarray(r_f, float) > 0.0).astype(float)


def solve_gated(M, K, fH, s_n, dt, eta, pinned=None, healing=False, max_sweeps=30):
    """Viscous phase-field update with a nodal activity switch.

    Solves ``eta M (s - s_n)/dt = fH - K s`` on the active node set and keeps
    ``s = s_n`` elsewhere.  A node is active when its discrete threshold
    ``fH - K s`` is positive.  The active set is then updated with a
    primal-dual rule on the full residual until it no longer changes.  Values are clamped to [0, 1] afterwards and nodes reaching the
    pin threshold are reported as broken.

    Parameters
    ----------
    M, K : sparse matrix
        Mass matrix (unscaled) and crack-resistance matrix.
    fH : ndarray
        Assembled driving force ``int R^A H``.
    s_n : ndarray
        Committed nodal values.
    pinned : ndarray of bool, optional
        Nodes fixed at 1.

    Returns
    -------
    s : ndarray
    residual : float
        Max-norm of the discrete equation on the active set.
    sweeps : int
    """
    n = s_n.size
    pinned = np.zeros(n, bool) if pinned is None else pinned
    A = (eta / dt) * M + K
    A = sp.csr_matrix(A)
    rhs_full = (eta / dt) * (M @ s_n) + fH
    free = ~pinned
    if healing:
        active = free.copy()
        sweeps_max = 1
    else:
        active = free & (fH - K @ s_n > 0.0)
        sweeps_max = max_sweeps
    diag = A.diagonal()
    s = s_n.copy()
    s[pinned] = 1.0
    sweeps = 0
    for sweeps in range(1, sweeps_max + 1):
        s = s_n.copy()
        s[pinned] = 1.0
        idx = np.flatnonzero(active)
        if idx.size:
            fixed = np.flatnonzero(~active)
            rhs = rhs_full[idx] - A[idx][:, fixed] @ s[fixed]
            s[idx] = spla.spsolve(sp.csc_matrix(A[idx][:, idx]), rhs) if idx.size > 1 else rhs / A[idx[0], idx[0]]
        if healing:
            break
        # primal-dual active set: grow where the residual pushes up, stop where s falls below s_n
        r = rhs_full - A @ s
        new = free & ((s - s_n) + r / diag > 1e-14)
        if np.array_equal(new, active):
            break
        active = new
    res_vec = A @ s - rhs_full
    idx = np.flatnonzero(active)
    residual = float(np.max(np.abs(res_vec[idx]))) if idx.size else 0.0
    if not healing:
        s = np.maximum(s, s_n)
    s = np.clip(s, 0.0, 1.0)
    return s, residual, sweeps


def stationary_0d(H, lf, weight, gc):
    """Homogeneous stationary value ``H lf / (weight gc)`` (weight = zeta or (1-zeta)/2)."""
    return H * lf / (weight * gc)
