"""Single-patch trivariate NURBS geometry, quadrature and the companion mesh.

Control points are indexed ``A = a + n1 * (b + n2 * c)`` and elements
``e = i + ne1 * (j + ne2 * k)``.
"""
from dataclasses import dataclass
from itertools import product

import numpy as np

from ..errors import DegenerateGeometry
from .basis import basis_derivatives, find_span, greville, open_uniform_knots

FACES = {"x0": (0, 0), "x1": (0, 1), "y0": (1, 0), "y1": (1, 1), "z0": (2, 0), "z1": (2, 1)}


def _tensor(d1, d2, d3):
    """Tensor-product values, gradients and Hessians from 1D derivative rows.

    ``dk`` has shape ``(..., 3, nk)`` (value, first, second derivative).
    """
    n1, n2, n3 = d1.shape[-1], d2.shape[-1], d3.shape[-1]
    lead = np.broadcast_shapes(d1.shape[:-2], d2.shape[:-2], d3.shape[:-2])

    def prod(i, j, k):
        out = np.einsum("...a,...b,...c->...cba", d1[..., i, :], d2[..., j, :], d3[..., k, :])
        return out.reshape(lead + (n1 * n2 * n3,))

    N = prod(0, 0, 0)
    dN = np.stack([prod(1, 0, 0), prod(0, 1, 0), prod(0, 0, 1)], axis=-1)
    d2N = np.empty(lead + (n1 * n2 * n3, 3, 3))
    d2N[..., 0, 0] = prod(2, 0, 0)
    d2N[..., 1, 1] = prod(0, 2, 0)
    d2N[..., 2, 2] = prod(0, 0, 2)
    d2N[..., 0, 1] = d2N[..., 1, 0] = prod(1, 1, 0)
    d2N[..., 0, 2] = d2N[..., 2, 0] = prod(1, 0, 1)
    d2N[..., 1, 2] = d2N[..., 2, 1] = prod(0, 1, 1)
    return N, dN, d2N


def rational_physical(N, dN, d2N, w, P):
    """Rational basis with physical first and second derivatives.

    Parameters
    ----------
    N, dN, d2N : ndarray
        Polynomial basis in parametric coordinates, shapes ``(..., nb)``,
        ``(..., nb, 3)``, ``(..., nb, 3, 3)``.
    w : (nb,) ndarray
        Weights of the active control points.
    P : (nb, 3) ndarray
        Active control points.

    Returns
    -------
    R, dR, d2R, X, detJ
    """
    Nw = N * w
    W = Nw.sum(-1)
    dNw = dN * w[:, None]
    d2Nw = d2N * w[:, None, None]
    dW = dNw.sum(-2)
    d2W = d2Nw.sum(-3)
    R = Nw / W[..., None]
    Rd = (dNw - R[..., None] * dW[..., None, :]) / W[..., None, None]
    Rdd = (d2Nw
           - np.einsum("...ai,...j->...aij", Rd, dW)
           - np.einsum("...aj,...i->...aij", Rd, dW)
           - R[..., None, None] * d2W[..., None, :, :]) / W[..., None, None, None]
    X = R @ P
    Pb = np.broadcast_to(P, Rd.shape)
    Jg = np.einsum("...ai,...aj->...ij", Pb, Rd)
    detJ = np.linalg.det(Jg)
    if np.any(detJ <= 1e-14 * np.abs(Jg).max() ** 3):
        raise DegenerateGeometry("singular geometry Jacobian")
    Ji = np.linalg.inv(Jg)
    dR = np.einsum("...aj,...jm->...am", Rd, Ji)
    HX = np.einsum("...ai,...ajk->...ijk", Pb, Rdd)
    corr = Rdd - np.einsum("...am,...mjk->...ajk", dR, HX)
    d2R = np.einsum("...jm,...ajk,...kn->...amn", Ji, corr, Ji)
    return R, dR, d2R, X, detJ


@dataclass
class Quadrature:
    """Precomputed element quadrature data."""

    conn: np.ndarray      # (ne, nb) control point indices
    R: np.ndarray         # (ne, nq, nb)
    dR: np.ndarray        # (ne, nq, nb, 3)
    d2R: np.ndarray       # (ne, nq, nb, 3, 3)
    wdet: np.ndarray      # (ne, nq) weight * |J|
    X: np.ndarray         # (ne, nq, 3)
    xi: np.ndarray        # (ne, nq, 3)
    local: np.ndarray     # (nq, 3) local coordinates in [0, 1]^3

    @property
    def n_el(self):
        return self.conn.shape[0]

    @property
    def n_qp(self):
        return self.R.shape[1]


@dataclass
class FaceQuadrature:
    """Quadrature on one boundary face of the patch."""

    conn: np.ndarray      # (nf, nb)
    R: np.ndarray         # (nf, nq, nb)
    dR: np.ndarray        # (nf, nq, nb, 3)
    wdA: np.ndarray       # (nf, nq)
    X: np.ndarray         # (nf, nq, 3)
    normal: np.ndarray    # (nf, nq, 3) reference outward unit normal


@dataclass
class LinearCompanionMesh:
    """Trilinear mesh on the element-corner lattice carrying alpha and r^p."""

    nodes: np.ndarray     # (nn, 3)
    conn: np.ndarray      # (ne, 8)
    elem_map: np.ndarray  # (ne,) owning NURBS element
    shape: tuple          # lattice dimensions
    params: np.ndarray | None = None  # (nn, 3) parametric node coordinates

    @property
    def n_nodes(self):
        return self.nodes.shape[0]


def _trilinear(local):
    """Trilinear values and parametric gradients at local points in [0,1]^3."""
    u, v, w = local[:, 0], local[:, 1], local[:, 2]
    N = np.empty((local.shape[0], 8))
    dN = np.empty((local.shape[0], 8, 3))
    for c, (a, b, d) in enumerate(product((0, 1), repeat=3)):
        # ordering a fastest: node (a, b, d) -> a + 2 b + 4 d
        idx = a + 2 * b + 4 * d
        fa = u if a else 1 - u
        fb = v if b else 1 - v
        fd = w if d else 1 - w
        N[:, idx] = fa * fb * fd
        dN[:, idx, 0] = (1 if a else -1) * fb * fd
        dN[:, idx, 1] = fa * (1 if b else -1) * fd
        dN[:, idx, 2] = fa * fb * (1 if d else -1)
    return N, dN


@dataclass
class NurbsPatch:
    """Trivariate NURBS patch.

    Parameters
    ----------
    degrees : tuple of int
    knots : tuple of ndarray
        Open knot vectors.
    control_points : (n1, n2, n3, 3) ndarray
    weights : (n1, n2, n3) ndarray
    """

    degrees: tuple
    knots: tuple
    control_points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.degrees = tuple(int(p) for p in self.degrees)
        self.knots = tuple(np.asarray(k, float) for k in self.knots)
        self.control_points = np.asarray(self.control_points, float)
        self.weights = np.asarray(self.weights, float)
        for d in range(3):
            k, p = self.knots[d], self.degrees[d]
            if np.any(np.diff(k) < 0):
                raise ValueError("knot vectors must be non-decreasing")
            if not (np.all(k[:p + 1] == k[0]) and np.all(k[-p - 1:] == k[-1])):
                raise ValueError("knot vectors must be open")
            if k.size - p - 1 != self.control_points.shape[d]:
                raise ValueError("control lattice does not match knots")
        if np.any(self.weights <= 0.0):
            raise ValueError("weights must be positive")
        self._spans = []
        for d in range(3):
            k, p = self.knots[d], self.degrees[d]
            self._spans.append([i for i in range(p, k.size - p - 1) if k[i + 1] > k[i]])

    @classmethod
    def box(cls, lengths, n_el, degrees=(2, 2, 2), origin=(0.0, 0.0, 0.0)):
        """Affinely parametrized box ``[0, Lx] x [0, Ly] x [0, Lz]``."""
        knots = tuple(open_uniform_knots(n, p) for n, p in zip(n_el, degrees))
        g = [greville(k, p) for k, p in zip(knots, degrees)]
        cp = np.empty((g[0].size, g[1].size, g[2].size, 3))
        cp[..., 0] = origin[0] + lengths[0] * g[0][:, None, None]
        cp[..., 1] = origin[1] + lengths[1] * g[1][None, :, None]
        cp[..., 2] = origin[2] + lengths[2] * g[2][None, None, :]
        return cls(degrees, knots, cp, np.ones(cp.shape[:3]))

    # ------------------------------------------------------------------ sizes
    @property
    def shape(self):
        return self.control_points.shape[:3]

    @property
    def n_cp(self):
        n1, n2, n3 = self.shape
        return n1 * n2 * n3

    @property
    def n_el_dir(self):
        return tuple(len(s) for s in self._spans)

    @property
    def n_el(self):
        a, b, c = self.n_el_dir
        return a * b * c

    @property
    def flat_points(self):
        return self.control_points.transpose(2, 1, 0, 3).reshape(-1, 3)

    @property
    def flat_weights(self):
        return self.weights.transpose(2, 1, 0).reshape(-1)

    def cp_index(self, a, b, c):
        n1, n2, _ = self.shape
        return a + n1 * (b + n2 * c)

    def element_spans(self, e):
        ne1, ne2, _ = self.n_el_dir
        i = e % ne1
        j = (e // ne1) % ne2
        k = e // (ne1 * ne2)
        return self._spans[0][i], self._spans[1][j], self._spans[2][k]

    def element_bounds(self, e):
        s = self.element_spans(e)
        return np.array([[self.knots[d][s[d]], self.knots[d][s[d] + 1]] for d in range(3)])

    def connectivity(self, spans):
        p = self.degrees
        n1, n2, _ = self.shape
        a = np.arange(spans[0] - p[0], spans[0] + 1)
        b = np.arange(spans[1] - p[1], spans[1] + 1)
        c = np.arange(spans[2] - p[2], spans[2] + 1)
        return (a[None, None, :] + n1 * (b[None, :, None] + n2 * c[:, None, None])).reshape(-1)

    # ------------------------------------------------------------- evaluation
    def _ders_1d(self, d, span, xi):
        p = self.degrees[d]
        xi = np.atleast_1d(np.asarray(xi, float))
        out = np.zeros(xi.shape + (3, p + 1))
        nd = min(2, p)
        for q, x in enumerate(xi):
            out[q, :nd + 1] = basis_derivatives(self.knots[d], p, span, float(x), nd)
        return out

    def evaluate(self, xi, spans=None):
        """Shape functions at one parametric point.

        Returns ``(idx, R, dR, d2R, X)`` with physical derivatives.
        """
        xi = np.asarray(xi, float)
        if spans is None:
            spans = tuple(int(find_span(self.knots[d], self.degrees[d], float(xi[d]))) for d in range(3))
        d = [self._ders_1d(k, spans[k], xi[k])[0] for k in range(3)]
        N, dN, d2N = _tensor(d[0], d[1], d[2])
        idx = self.connectivity(spans)
        R, dR, d2R, X, _ = rational_physical(N, dN, d2N, self.flat_weights[idx], self.flat_points[idx])
        return idx, R, dR, d2R, X

    def geometry(self, xi):
        return self.evaluate(xi)[4]

    def locate(self, X, tol=1e-12):
        """Parametric coordinates of a physical point (Newton inversion)."""
        X = np.asarray(X, float)
        lo = np.array([k[0] for k in self.knots])
        hi = np.array([k[-1] for k in self.knots])
        pts = self.flat_points
        pmin, pmax = pts.min(0), pts.max(0)
        xi = lo + (hi - lo) * (X - pmin) / np.where(pmax > pmin, pmax - pmin, 1.0)
        for _ in range(50):
            xi = np.clip(xi, lo, hi)
            idx, R, dR, _, x = self.evaluate(xi)
            # parametric Jacobian from the physical gradient of the identity
            spans = tuple(int(find_span(self.knots[d], self.degrees[d], float(xi[d]))) for d in range(3))
            dd = [self._ders_1d(k, spans[k], xi[k])[0] for k in range(3)]
            N, dN, _ = _tensor(dd[0], dd[1], dd[2])
            w = self.flat_weights[idx]
            Nw = N * w
            W = Nw.sum()
            Rd = (dN * w[:, None] - (Nw / W)[:, None] * (dN * w[:, None]).sum(0)) / W
            Jg = self.flat_points[idx].T @ Rd
            r = X - x
            if np.linalg.norm(r) < tol * max(1.0, np.abs(pmax - pmin).max()):
                return np.clip(xi, lo, hi)
            xi = xi + np.linalg.solve(Jg, r)
        raise DegenerateGeometry("point inversion did not converge")

    # ------------------------------------------------------------- quadrature
    def quadrature(self, n_gauss=None):
        """Gauss quadrature with ``(p + 1)`` points per direction per element."""
        ng = [p + 1 for p in self.degrees] if n_gauss is None else list(n_gauss)
        gp = [np.polynomial.legendre.leggauss(n) for n in ng]
        loc1 = [(0.5 * (g[0] + 1.0), 0.5 * g[1]) for g in gp]
        local = np.array([[loc1[0][0][a], loc1[1][0][b], loc1[2][0][c]]
                          for c in range(ng[2]) for b in range(ng[1]) for a in range(ng[0])])
        wloc = np.array([loc1[0][1][a] * loc1[1][1][b] * loc1[2][1][c]
                         for c in range(ng[2]) for b in range(ng[1]) for a in range(ng[0])])
        ne = self.n_el
        nb = int(np.prod([p + 1 for p in self.degrees]))
        nq = local.shape[0]
        conn = np.empty((ne, nb), dtype=np.int64)
        R = np.empty((ne, nq, nb))
        dR = np.empty((ne, nq, nb, 3))
        d2R = np.empty((ne, nq, nb, 3, 3))
        wdet = np.empty((ne, nq))
        X = np.empty((ne, nq, 3))
        XI = np.empty((ne, nq, 3))
        P = self.flat_points
        Wt = self.flat_weights
        for e in range(ne):
            spans = self.element_spans(e)
            bnd = self.element_bounds(e)
            h = bnd[:, 1] - bnd[:, 0]
            d = []
            for k in range(3):
                xk = bnd[k, 0] + h[k] * loc1[k][0]
                d.append(self._ders_1d(k, spans[k], xk))
            N1, dN1, d2N1 = _tensor(d[0][:, None, None], d[1][None, :, None], d[2][None, None, :])
            # reorder (a, b, c) grid to the local point order (a fastest)
            N1 = N1.transpose(2, 1, 0, 3).reshape(nq, nb)
            dN1 = dN1.transpose(2, 1, 0, 3, 4).reshape(nq, nb, 3)
            d2N1 = d2N1.transpose(2, 1, 0, 3, 4, 5).reshape(nq, nb, 3, 3)
            idx = self.connectivity(spans)
            r, dr, d2r, x, detJ = rational_physical(N1, dN1, d2N1, Wt[idx], P[idx])
            conn[e] = idx
            R[e], dR[e], d2R[e], X[e] = r, dr, d2r, x
            wdet[e] = wloc * np.prod(h) * detJ
            XI[e] = bnd[:, 0] + h * local
        return Quadrature(conn, R, dR, d2R, wdet, X, XI, local)

    def face_quadrature(self, face, n_gauss=None):
        """Quadrature on a boundary face ('x0', 'x1', 'y0', 'y1', 'z0', 'z1')."""
        d, side = FACES[face]
        ng = [p + 1 for p in self.degrees] if n_gauss is None else list(n_gauss)
        others = [k for k in range(3) if k != d]
        gp = {k: np.polynomial.legendre.leggauss(ng[k]) for k in others}
        elems = [e for e in range(self.n_el)
                 if (self.element_spans(e)[d] == (self._spans[d][0] if side == 0 else self._spans[d][-1]))]
        conns, Rs, dRs, ws, Xs, Ns = [], [], [], [], [], []
        P = self.flat_points
        Wt = self.flat_weights
        for e in elems:
            spans = self.element_spans(e)
            bnd = self.element_bounds(e)
            xs, wl = [], []
            for qb in range(ng[others[1]]):
                for qa in range(ng[others[0]]):
                    xi = np.empty(3)
                    xi[d] = bnd[d, side]
                    ga, gb = gp[others[0]], gp[others[1]]
                    ha = bnd[others[0], 1] - bnd[others[0], 0]
                    hb = bnd[others[1], 1] - bnd[others[1], 0]
                    xi[others[0]] = bnd[others[0], 0] + ha * 0.5 * (ga[0][qa] + 1)
                    xi[others[1]] = bnd[others[1], 0] + hb * 0.5 * (gb[0][qb] + 1)
                    xs.append(xi)
                    wl.append(0.25 * ga[1][qa] * gb[1][qb] * ha * hb)
            xs = np.array(xs)
            dd = [np.concatenate([self._ders_1d(k, spans[k], xs[q, k]) for q in range(len(xs))]) for k in range(3)]
            N, dN, d2N = _tensor(dd[0], dd[1], dd[2])
            idx = self.connectivity(spans)
            r, dr, _, x, detJ = rational_physical(N, dN, d2N, Wt[idx], P[idx])
            # parametric Jacobian for the area element and normal
            w = Wt[idx]
            Nw = N * w
            Wsum = Nw.sum(-1)
            Rd = (dN * w[:, None] - (Nw / Wsum[:, None])[..., None] * (dN * w[:, None]).sum(-2)[:, None, :]) / Wsum[:, None, None]
            Jg = np.einsum("ai,qaj->qij", P[idx], Rd)
            JiT = np.transpose(np.linalg.inv(Jg), (0, 2, 1))
            nvec = JiT[:, :, d] * (1.0 if side == 1 else -1.0)
            nn = np.linalg.norm(nvec, axis=1)
            conns.append(idx)
            Rs.append(r)
            dRs.append(dr)
            ws.append(np.array(wl) * detJ * nn)
            Xs.append(x)
            Ns.append(nvec / nn[:, None])
        return FaceQuadrature(np.array(conns), np.array(Rs), np.array(dRs), np.array(ws),
                              np.array(Xs), np.array(Ns))

    # ------------------------------------------------------- companion mesh
    def companion_mesh(self):
        """Trilinear mesh on the corner lattice of the Bezier elements."""
        ne = self.n_el_dir
        brk = [np.array([self.knots[d][s] for s in self._spans[d]] + [self.knots[d][self._spans[d][-1] + 1]])
               for d in range(3)]
        shape = (ne[0] + 1, ne[1] + 1, ne[2] + 1)
        nodes = np.empty((shape[0] * shape[1] * shape[2], 3))
        params = np.empty_like(nodes)
        for c in range(shape[2]):
            for b in range(shape[1]):
                for a in range(shape[0]):
                    xi = np.array([brk[0][a], brk[1][b], brk[2][c]])
                    params[a + shape[0] * (b + shape[1] * c)] = xi
                    nodes[a + shape[0] * (b + shape[1] * c)] = self.geometry(xi)
        conn = np.empty((self.n_el, 8), dtype=np.int64)
        for e in range(self.n_el):
            i = e % ne[0]
            j = (e // ne[0]) % ne[1]
            k = e // (ne[0] * ne[1])
            for a, b, d in product((0, 1), repeat=3):
                conn[e, a + 2 * b + 4 * d] = (i + a) + shape[0] * ((j + b) + shape[1] * (k + d))
        return LinearCompanionMesh(nodes, conn, np.arange(self.n_el), shape, params)

    def companion_quadrature(self, quad):
        """Trilinear values and physical gradients at the mechanics points.

        The trilinear functions live on the parametric cell of each element;
        physical gradients use the NURBS geometry map.
        """
        N, dNl = _trilinear(quad.local)
        ne, nq = quad.wdet.shape
        dN = np.empty((ne, nq, 8, 3))
        for e in range(ne):
            bnd = self.element_bounds(e)
            h = bnd[:, 1] - bnd[:, 0]
            spans = self.element_spans(e)
            idx = quad.conn[e]
            dd = [self._ders_1d(k, spans[k], quad.xi[e, :, k]) for k in range(3)]
            Np, dNp, _ = _tensor(dd[0], dd[1], dd[2])
            w = self.flat_weights[idx]
            Nw = Np * w
            Ws = Nw.sum(-1)
            Rd = (dNp * w[:, None] - (Nw / Ws[:, None])[..., None] * (dNp * w[:, None]).sum(-2)[:, None, :]) / Ws[:, None, None]
            Jg = np.einsum("ai,qaj->qij", self.flat_points[idx], Rd)
            Ji = np.linalg.inv(Jg)
            dxi = dNl / h
            dN[e] = np.einsum("qaj,qjm->qam", dxi, Ji)
        return np.broadcast_to(N, (ne, nq, 8)).copy(), dN
