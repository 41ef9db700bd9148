"""Element kernels and sparse scatter for the mechanical and scalar blocks."""
import numpy as np
import scipy.sparse as sp

from .._jit import ENABLED, njit, prange


class SparsePattern:
    """Fixed CSR pattern of a block with ``ncomp`` unknowns per basis function.

    The element-to-CSR map is built once; each assembly is then a single
    ``bincount`` over the element matrices.
    """

    def __init__(self, conn, ncomp, n_basis):
        conn = np.asarray(conn, np.int64)
        ne, nb = conn.shape
        self.n = n_basis * ncomp
        self.edofs = (conn[:, :, None] * ncomp + np.arange(ncomp)).reshape(ne, nb * ncomp)
        nl = nb * ncomp
        rows = np.repeat(self.edofs, nl, axis=1).ravel()
        cols = np.tile(self.edofs, (1, nl)).ravel()
        key = rows * self.n + cols
        uniq, self._inv = np.unique(key, return_inverse=True)
        self.indices = (uniq % self.n).astype(np.int32)
        counts = np.bincount(uniq // self.n, minlength=self.n)
        self.indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int32)
        self.nnz = uniq.size

    def matrix(self, Ke):
        data = np.bincount(self._inv, weights=np.asarray(Ke).ravel(), minlength=self.nnz)
        return sp.csr_matrix((data, self.indices.copy(), self.indptr.copy()), shape=(self.n, self.n))

    def vector(self, fe):
        return np.bincount(self.edofs.ravel(), weights=np.asarray(fe).ravel(), minlength=self.n)


def fiber_coefficients(dR, d2R, L, M):
    """Projections ``(dR.L, dR.M, L.d2R.L, M.d2R.M)`` with shape (4, ne, nq, nb)."""
    return np.stack([dR @ L, dR @ M,
                     np.einsum("eqaij,i,j->eqa", d2R, L, L),
                     np.einsum("eqaij,i,j->eqa", d2R, M, M)])


@njit(parallel=True)
def _mech_kernel(dR, c, wdet, P, gfib, D, Hf, want_K):
    ne, nq, nb, _ = dR.shape
    nl = 3 * nb
    fe = np.zeros((ne, nl))
    Ke = np.zeros((ne if want_K else 1, nl, nl))
    for e in prange(ne):
        T = np.zeros((nb, 3, 3, 3))
        U = np.zeros((nb, 3, 4, 3))
        for q in range(nq):
            w = wdet[e, q]
            for a in range(nb):
                for i in range(3):
                    v = 0.0
                    for J in range(3):
                        v += P[e, q, i, J] * dR[e, q, a, J]
                    v += gfib[e, q, 6 + i] * c[2, e, q, a] + gfib[e, q, 9 + i] * c[3, e, q, a]
                    fe[e, 3 * a + i] += w * v
            if not want_K:
                continue
            for a in range(nb):
                for i in range(3):
                    for k in range(3):
                        for Lc in range(3):
                            v = 0.0
                            for J in range(3):
                                v += dR[e, q, a, J] * D[e, q, 3 * i + J, 3 * k + Lc]
                            T[a, i, k, Lc] = w * v
                        for r in range(4):
                            v = 0.0
                            for p in range(4):
                                v += c[p, e, q, a] * Hf[e, q, 3 * p + i, 3 * r + k]
                            U[a, i, r, k] = w * v
            for a in range(nb):
                for b in range(nb):
                    for i in range(3):
                        for k in range(3):
                            v = 0.0
                            for Lc in range(3):
                                v += T[a, i, k, Lc] * dR[e, q, b, Lc]
                            for r in range(4):
                                v += U[a, i, r, k] * c[r, e, q, b]
                            Ke[e, 3 * a + i, 3 * b + k] += v
    return fe, Ke


def _mech_numpy(dR, c, wdet, P, gfib, D, Hf, want_K):
    ne, nq, nb, _ = dR.shape
    gb = gfib[..., 6:].reshape(ne, nq, 2, 3)
    fe = (np.einsum("eq,eqiJ,eqaJ->eai", wdet, P, dR)
          + np.einsum("eq,eqpi,peqa->eai", wdet, gb, c[2:])).reshape(ne, 3 * nb)
    if not want_K:
        return fe, np.zeros((1, 3 * nb, 3 * nb))
    D4 = D.reshape(ne, nq, 3, 3, 3, 3)
    H4 = Hf.reshape(ne, nq, 4, 3, 4, 3)
    T = np.einsum("eq,eqaJ,eqiJkL->eqaikL", wdet, dR, D4)
    Ke = np.einsum("eqaikL,eqbL->eaibk", T, dR)
    U = np.einsum("eq,peqa,eqpirk->eqairk", wdet, c, H4)
    Ke += np.einsum("eqairk,reqb->eaibk", U, c)
    return fe, Ke.reshape(ne, 3 * nb, 3 * nb)


def mechanical_element_arrays(dR, c, wdet, P, gfib, D, Hf, want_K=True):
    """Element residuals ``(ne, 3 nb)`` and tangents ``(ne, 3 nb, 3 nb)``.

    ``P`` is the first Piola stress, ``gfib[..., 6:]`` the fiber higher-order
    stress components, ``D`` the 9x9 first-gradient tangent and ``Hf`` the
    12x12 fiber Hessian; ``c`` comes from :func:`fiber_coefficients`.
    """
    if ENABLED:
        return _mech_kernel(dR, c, wdet, P, gfib, D, Hf, want_K)
    return _mech_numpy(dR, c, wdet, P, gfib, D, Hf, want_K)


def gather_kinematics(u, conn, dR, d2R):
    """Deformation gradient and its material gradient at all quadrature points."""
    ue = u[conn]  # (ne, nb, 3)
    F = np.einsum("eai,eqaJ->eqiJ", ue, dR) + np.eye(3)
    G = np.einsum("eai,eqaJK->eqiJK", ue, d2R)
    return F, G


def scalar_element_matrices(R, dR, wdet, c_mass, c_stiff):
    """``int c_mass R R + dR . c_stiff dR`` per element.

    ``c_stiff`` is either (ne, nq) (isotropic) or (ne, nq, 3, 3).
    """
    Ke = np.einsum("eq,eqa,eqb->eab", wdet * c_mass, R, R)
    if c_stiff.ndim == 2:
        Ke += np.einsum("eq,eqai,eqbi->eab", wdet * c_stiff, dR, dR)
    else:
        Ke += np.einsum("eq,eqai,eqij,eqbj->eab", wdet, dR, c_stiff, dR)
    return Ke
