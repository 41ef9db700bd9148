"""Staggered solution of the coupled mechanical, plastic, crack and thermal fields."""
import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import GradFiberError, StepFailed, raise_for_status
from ..gtn import hardening_field
from ..kinematics import degradation, degradation_slope
from ..material import Material, evaluate_points
from ..phasefield import PIN_THRESHOLD, gc_matrix, solve_gated
from ..thermal import internal_dissipation
from .assembly import (SparsePattern, fiber_coefficients, gather_kinematics,
                       mechanical_element_arrays, scalar_element_matrices)
from .layout import DofLayout

log = logging.getLogger(__name__)


@dataclass
class SolverOptions:
    """Tolerances and limits of the staggered scheme."""

    dt: float = 0.2
    rtol: float = 1e-8
    atol: float = 1e-9
    max_newton: int = 30
    max_cuts: int = 8
    passes: int = 1
    pair_rtol: float = 1e-7
    max_pair: int = 40
    thermal_rtol: float = 1e-12
    max_thermal: int = 20

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.passes < 1:
            raise ValueError("passes must be at least 1")


@dataclass
class FieldState:
    """Converged (committed) values of all fields at time ``t``."""

    t: float
    u: np.ndarray        # (n_cp, 3)
    theta: np.ndarray    # (n_cp,)
    s: np.ndarray
    sL: np.ndarray
    sM: np.ndarray
    alpha: np.ndarray    # (n_nodes,) companion mesh
    rp: np.ndarray
    Fp: np.ndarray       # (n_qp, 3, 3)
    f: np.ndarray        # (n_qp,)
    eta: np.ndarray      # (n_qp,) entropy density
    lam: np.ndarray      # point-constraint multipliers
    step: int = 0
    du_prev: np.ndarray | None = None
    dt_prev: float = 0.0

    def copy(self):
        return replace(self, **{k: (v.copy() if isinstance(v, np.ndarray) else v)
                                for k, v in self.__dict__.items()})


@dataclass
class StaggeredStep:
    """Record of one accepted step."""

    t_n: float
    t: float
    dt: float
    newton_iterations: list = field(default_factory=list)
    newton_residuals: list = field(default_factory=list)
    pair_iterations: int = 0
    phase_sweeps: dict = field(default_factory=dict)
    phase_residuals: dict = field(default_factory=dict)
    thermal_iterations: int = 0
    thermal_residual: float = 0.0
    pass_residuals: list = field(default_factory=list)
    reactions: dict = field(default_factory=dict)
    resultant: np.ndarray | None = None
    load_scale: float = 0.0
    dissipation: float = 0.0
    heat_rate: float = 0.0
    cuts: int = 0
    committed: bool = False


@dataclass
class Evaluation:
    """Quadrature-point response of one mechanical state (flat arrays)."""

    F: np.ndarray
    P: np.ndarray
    gfib: np.ndarray
    D: np.ndarray
    Hf: np.ndarray
    Fp: np.ndarray
    dgam: np.ndarray
    sbar: np.ndarray
    phi: np.ndarray
    f: np.ndarray
    H: np.ndarray
    HL: np.ndarray
    HM: np.ndarray
    psi: np.ndarray
    eta_mech: np.ndarray
    status: np.ndarray

    @property
    def J(self):
        return np.linalg.det(self.F)


class Simulation:
    """Quasi-static staggered solver on one NURBS patch.

    Parameters
    ----------
    patch : NurbsPatch
    material : Material
    layout : DofLayout
        Boundary data; its sizes must match the patch.
    options : SolverOptions, optional
    """

    def __init__(self, patch, material: Material, layout: DofLayout, options: SolverOptions | None = None):
        self.patch = patch
        self.mat = material
        self.layout = layout
        self.opt = options or SolverOptions()
        q = self.quad = patch.quadrature()
        self.ne, self.nq = q.wdet.shape
        self.nqp = self.ne * self.nq
        self.n_cp = patch.n_cp
        self.comp = patch.companion_mesh()
        if layout.n_cp != self.n_cp or layout.n_nodes != self.comp.n_nodes:
            raise ValueError("layout sizes do not match the patch")
        self.cN, self.cdN = patch.companion_quadrature(q)
        fibp = material.fiber
        self.cfib = fiber_coefficients(q.dR, q.d2R, np.asarray(fibp.L, float), np.asarray(fibp.M, float))
        self.packed = material.packed()
        self.mech = SparsePattern(q.conn, 3, self.n_cp)
        self.scal = SparsePattern(q.conn, 1, self.n_cp)
        self.cpat = SparsePattern(self.comp.conn, 1, self.comp.n_nodes)
        ones = np.ones_like(q.wdet)
        self.M_s = self.scal.matrix(scalar_element_matrices(q.R, q.dR, q.wdet, ones, 0.0 * ones))
        self.m_lump = self.cpat.vector(np.einsum("eq,eqa->ea", q.wdet, self.cN))
        self.K_grad = self.cpat.matrix(np.einsum("eq,eqai,eqbi->eab", q.wdet, self.cdN, self.cdN))
        self.volume = float(q.wdet.sum())
        self._setup_penalty()
        self._setup_tractions()
        self._setup_points()
        self._node_basis = self._basis_matrix(self.comp.params)

    # ------------------------------------------------------------------ setup
    def _basis_matrix(self, params):
        rows, cols, vals = [], [], []
        for k, xi in enumerate(params):
            idx, R, *_ = self.patch.evaluate(xi)
            rows.extend([k] * idx.size)
            cols.extend(idx.tolist())
            vals.extend(R.tolist())
        return sp.csr_matrix((vals, (rows, cols)), shape=(len(params), self.n_cp))

    def _setup_penalty(self):
        n = 3 * self.n_cp
        self.K_pen = sp.csr_matrix((n, n))
        self.b_pen = np.zeros(n)
        for bc in self.layout.gradient:
            fq = self.patch.face_quadrature(bc.face)
            dRN = np.einsum("fqbj,fqj->fqb", fq.dR, fq.normal)
            target = fq.normal if bc.target is None else np.asarray(bc.target(fq.X, fq.normal), float)
            pat = SparsePattern(fq.conn, 3, self.n_cp)
            Ke = bc.beta * np.einsum("fq,fqa,fqb,ik->faibk", fq.wdA, dRN, dRN, np.eye(3))
            nb = fq.conn.shape[1]
            self.K_pen = self.K_pen + pat.matrix(Ke.reshape(-1, 3 * nb, 3 * nb))
            fe = bc.beta * np.einsum("fq,fqa,fqi->fai", fq.wdA, dRN, fq.normal - target)
            self.b_pen += pat.vector(fe.reshape(-1, 3 * nb))

    def _setup_tractions(self):
        self._tractions = []
        for tr in self.layout.tractions:
            fq = self.patch.face_quadrature(tr.face)
            pat = SparsePattern(fq.conn, 1, self.n_cp)
            weights = pat.vector(np.einsum("fq,fqa->fa", fq.wdA, fq.R))
            self._tractions.append((tr, weights))

    def _setup_points(self):
        rows, cols, vals = [], [], []
        for k, pc in enumerate(self.layout.points):
            idx, R, *_ = self.patch.evaluate(self.patch.locate(pc.point))
            keep = np.abs(R) > 1e-15
            rows.extend([k] * int(keep.sum()))
            cols.extend((3 * idx[keep] + pc.component).tolist())
            vals.extend(R[keep].tolist())
        self.C = sp.csr_matrix((vals, (rows, cols)), shape=(len(self.layout.points), 3 * self.n_cp))

    # --------------------------------------------------------------- helpers
    def at_qp(self, nodal):
        """Interpolate a control-point field to the quadrature points (ne, nq)."""
        return np.einsum("eqa,ea->eq", self.quad.R, nodal[self.quad.conn])

    def grad_at_qp(self, nodal):
        return np.einsum("eqai,ea->eqi", self.quad.dR, nodal[self.quad.conn])

    def at_qp_companion(self, nodal):
        return np.einsum("eqa,ea->eq", self.cN, nodal[self.comp.conn])

    def project_companion(self, qp_values):
        """Lumped projection of quadrature-point values onto companion nodes."""
        return self.cpat.vector(np.einsum("eq,eqa->ea", self.quad.wdet * qp_values, self.cN)) / self.m_lump

    def integrate(self, qp_values):
        return float(np.sum(self.quad.wdet * np.asarray(qp_values).reshape(self.ne, self.nq)))

    def sample_nodes(self, nodal):
        """Evaluate a control-point field at the companion-mesh nodes."""
        return self._node_basis @ nodal

    def theta0(self):
        return self.mat.matrix.theta0

    # ------------------------------------------------------------ state init
    def initial_state(self, theta=None):
        tp = self.mat.thermal
        th = float(tp.theta_init if theta is None else theta)
        n, nn = self.n_cp, self.comp.n_nodes
        st = FieldState(
            t=0.0, u=np.zeros((n, 3)), theta=np.full(n, th), s=np.zeros(n), sL=np.zeros(n),
            sM=np.zeros(n), alpha=np.zeros(nn), rp=np.zeros(nn),
            Fp=np.tile(np.eye(3), (self.nqp, 1, 1)), f=np.full(self.nqp, self.mat.plastic.f0),
            eta=np.zeros(self.nqp), lam=np.zeros(len(self.layout.points)))
        st.rp = self._resistance(st.alpha, st.theta)
        ev = self.evaluate(st.u, st, st.rp, st.theta, (st.s, st.sL, st.sM), self.opt.dt, False)
        raise_for_status(int(ev.status.max(initial=0)), "initial state")
        st.eta = self._entropy(ev, st.theta)
        return st

    def _entropy(self, ev, theta_nodes):
        th = self.at_qp(theta_nodes).ravel()
        return ev.eta_mech + self.mat.heat_capacity() * np.log(th / self.theta0())

    def _resistance(self, alpha, theta_nodes):
        """Dissipative resistance from the plastic pair with lumped mass."""
        pp = self.mat.plastic
        zeta = self.mat.zeta
        y = hardening_field(self.at_qp_companion(alpha), self.at_qp(theta_nodes), pp)
        rhs = self.cpat.vector(np.einsum("eq,eqa->ea", self.quad.wdet * zeta * y, self.cN))
        rhs += zeta * pp.y0 * pp.l_p ** 2 * (self.K_grad @ alpha)
        return rhs / self.m_lump

    # ------------------------------------------------------------ mechanics
    def evaluate(self, u, st_n, rp_nodes, theta_nodes, s3, dt, want_tangent):
        q = self.quad
        fr = self.mat.fracture
        F, G = gather_kinematics(np.asarray(u).reshape(-1, 3), q.conn, q.dR, q.d2R)
        sq = [np.clip(self.at_qp(s).ravel(), 0.0, 1.0) for s in s3]
        ag = (fr.a_g, fr.a_gL, fr.a_gM)
        g = [degradation(x, a) for x, a in zip(sq, ag)]
        dg = [degradation_slope(x, a) for x, a in zip(sq, ag)]
        rp_q = self.at_qp_companion(rp_nodes).ravel()
        th_q = self.at_qp(theta_nodes).ravel()
        out = evaluate_points(F.reshape(-1, 3, 3), G.reshape(-1, 3, 3, 3), st_n.Fp, rp_q, th_q,
                              g[0], g[1], g[2], dg[0], dg[1], dg[2], float(dt), *self.packed,
                              bool(want_tangent))
        return Evaluation(F.reshape(-1, 3, 3), *out)

    def mechanical_residual(self, ev, u, t, want_K):
        """Residual ``f_int - f_ext + penalty`` over all mechanical dofs (and tangent)."""
        ne, nq = self.ne, self.nq
        q = self.quad
        D = ev.D.reshape(ne, nq, 9, 9) if want_K else ev.D.reshape(1, 1, 9, 9)
        Hf = ev.Hf.reshape(ne, nq, 12, 12) if want_K else ev.Hf.reshape(1, 1, 12, 12)
        fe, Ke = mechanical_element_arrays(q.dR, self.cfib, q.wdet, ev.P.reshape(ne, nq, 3, 3),
                                           ev.gfib.reshape(ne, nq, 12), D, Hf, want_K)
        fint = self.mech.vector(fe)
        fext = self.external_force(t)
        r = fint - fext + self.K_pen @ np.ravel(u) + self.b_pen
        K = self.mech.matrix(Ke) + self.K_pen if want_K else None
        return r, K, fint, fext

    def external_force(self, t):
        f = np.zeros(3 * self.n_cp)
        for tr, weights in self._tractions:
            T = np.asarray(tr.value(t), float)
            for i in range(3):
                f[i::3] += weights * T[i]
        return f

    def _constraint_values(self, t):
        return np.array([pc.value(t) for pc in self.layout.points], float)

    def solve_mechanics(self, st_n, t, dt, rp_nodes, theta_nodes, s3, u0, lam0):
        """Newton solve of the displacement block with the return map inside."""
        opt = self.opt
        fixed, vals = self.layout.mech_dirichlet(t)
        mask = np.ones(3 * self.n_cp, bool)
        mask[fixed] = False
        free = np.flatnonzero(mask)
        u = np.asarray(u0, float).ravel().copy()
        u[fixed] = vals
        lam = lam0.copy()
        C = self.C
        Cf = C[:, free]
        gval = self._constraint_values(t)
        history = []
        ev = None
        for it in range(opt.max_newton + 1):
            ev = self.evaluate(u, st_n, rp_nodes, theta_nodes, s3, dt, False)
            raise_for_status(int(ev.status.max(initial=0)), "mechanics")
            r, _, fint, fext = self.mechanical_residual(ev, u, t, False)
            rr = r + C.T @ lam if C.shape[0] else r
            res = float(np.max(np.abs(rr[free]), initial=0.0))
            cres = float(np.max(np.abs(C @ u - gval), initial=0.0))
            scale = max(np.max(np.abs(fint), initial=0.0), np.max(np.abs(fext), initial=0.0),
                        np.max(np.abs(C.T @ lam), initial=0.0) if C.shape[0] else 0.0)
            history.append(res)
            if res <= opt.atol + opt.rtol * scale and cres <= 1e-10 * (1.0 + np.max(np.abs(gval), initial=0.0)):
                return u, lam, ev, r, fint, fext, history, scale
            if it == opt.max_newton:
                break
            ev = self.evaluate(u, st_n, rp_nodes, theta_nodes, s3, dt, True)
            raise_for_status(int(ev.status.max(initial=0)), "mechanics tangent")
            _, K, _, _ = self.mechanical_residual(ev, u, t, True)
            Kff = K[free][:, free]
            nc = C.shape[0]
            if nc:
                A = sp.bmat([[Kff, Cf.T], [Cf, None]], format="csc")
                rhs = np.concatenate([-rr[free], gval - C @ u])
            else:
                A = Kff.tocsc()
                rhs = -rr[free]
            sol = spla.spsolve(A, rhs)
            if not np.all(np.isfinite(sol)):
                raise StepFailed("singular mechanical tangent")
            du = sol[:free.size]
            step = 1.0
            for _ in range(5):
                trial = u.copy()
                trial[free] += step * du
                if self._admissible(trial):
                    break
                step *= 0.5
            else:
                raise StepFailed("no admissible Newton update")
            u = trial
            if nc:
                lam = lam + step * sol[free.size:]
        raise StepFailed(f"mechanics did not converge (residual {history[-1]:.3e})")

    def _admissible(self, u):
        F, _ = gather_kinematics(u.reshape(-1, 3), self.quad.conn, self.quad.dR, self.quad.d2R)
        return bool(np.all(np.linalg.det(F) > 0.0))

    # -------------------------------------------------------- plastic pair
    def plastic_pair(self, ev, st_n, theta_nodes):
        """Nodal ``alpha`` and ``r^p`` at the end of the step (lumped mass)."""
        if not self.mat.plastic.enabled:
            return st_n.alpha.copy(), st_n.rp.copy()
        inc = ev.dgam / (ev.J * (1.0 - ev.f))
        alpha = st_n.alpha + self.project_companion(inc.reshape(self.ne, self.nq))
        return alpha, self._resistance(alpha, theta_nodes)

    # --------------------------------------------------------- phase fields
    def phase_fields(self, ev, st_n, alpha, dt):
        """Gated viscous updates of the matrix and the two fiber phase fields."""
        fr = self.mat.fracture
        out = [st_n.s.copy(), st_n.sL.copy(), st_n.sM.copy()]
        sweeps, residuals = {}, {}
        if not fr.enabled:
            return out, sweeps, residuals
        q = self.quad
        wL, wM, _, _ = self.mat.fiber.weights()
        ones = np.ones((self.ne, self.nq))
        gc_q = gc_matrix(self.at_qp_companion(alpha), fr)
        blocks = [
            ("s", ev.H, st_n.s, self.mat.zeta * gc_q, fr.lf, fr.eta_f),
            ("sL", ev.HL, st_n.sL, wL * fr.gcL * ones, fr.lfL, fr.eta_fL),
            ("sM", ev.HM, st_n.sM, wM * fr.gcM * ones, fr.lfM, fr.eta_fM),
        ]
        for k, (name, H, s_n, gcw, lf, eta) in enumerate(blocks):
            if not np.any(gcw > 0.0):
                continue
            fH = self.scal.vector(np.einsum("eq,eqa->ea", q.wdet * H.reshape(self.ne, self.nq), q.R))
            K = self.scal.matrix(scalar_element_matrices(q.R, q.dR, q.wdet, gcw / lf, gcw * lf))
            pinned = s_n >= PIN_THRESHOLD
            s, res, nsw = solve_gated(self.M_s, K, fH, s_n, dt, eta, pinned, fr.healing)
            out[k] = s
            sweeps[name] = nsw
            residuals[name] = res
        return out, sweeps, residuals

    # -------------------------------------------------------------- thermal
    def dissipation_density(self, ev, st_n, alpha, rp, s3, dt):
        rates = [self.at_qp(s - s0).ravel() / dt for s, s0 in zip(s3, (st_n.s, st_n.sL, st_n.sM))]
        a_rate = self.at_qp_companion(alpha - st_n.alpha).ravel() / dt
        rp_q = self.at_qp_companion(rp).ravel()
        return internal_dissipation(ev.J, ev.f, rp_q, a_rate, ev.H, ev.HL, ev.HM,
                                    rates[0], rates[1], rates[2], self.mat.fracture)

    def solve_thermal(self, ev, st_n, t, dt, Dq, s_new, theta0_guess):
        """Newton solve of the discrete entropy balance for nodal temperatures."""
        tp = self.mat.thermal
        q = self.quad
        ne, nq = self.ne, self.nq
        Ccap = self.mat.heat_capacity()
        th0 = self.theta0()
        k_iso = tp.conductivity(self.mat.zeta)
        sq = np.clip(self.at_qp(s_new), 0.0, 1.0)
        kq = k_iso * (1.0 - sq) + tp.K_conv * sq
        Finv = np.linalg.inv(ev.F).reshape(ne, nq, 3, 3)
        Kq = kq[..., None, None] * np.einsum("eqij,eqkj->eqik", Finv, Finv)
        eta_n = st_n.eta.reshape(ne, nq)
        eta_m = ev.eta_mech.reshape(ne, nq)
        Dq = Dq.reshape(ne, nq)
        fixed, vals = self.layout.thermal_dirichlet(t)
        mask = np.ones(self.n_cp, bool)
        mask[fixed] = False
        free = np.flatnonzero(mask)
        th = theta0_guess.copy()
        th[fixed] = vals
        res = 0.0
        for it in range(self.opt.max_thermal + 1):
            thq = self.at_qp(th)
            if np.any(thq <= 0.0):
                raise StepFailed("non-positive temperature")
            gth = self.grad_at_qp(th)
            etaq = eta_m + Ccap * np.log(thq / th0)
            src = thq * (etaq - eta_n) / dt - Dq
            fe = (np.einsum("eq,eqa->ea", q.wdet * src, q.R)
                  + np.einsum("eq,eqai,eqij,eqj->ea", q.wdet, q.dR, Kq, gth))
            r = self.scal.vector(fe)
            scale = np.max(np.abs(self.scal.vector(np.einsum("eq,eqa->ea", q.wdet * Ccap * thq / dt, q.R))))
            res = float(np.max(np.abs(r[free]), initial=0.0))
            if res <= 1e-14 + self.opt.thermal_rtol * scale:
                return th, it, res
            if it == self.opt.max_thermal:
                break
            Ke = scalar_element_matrices(q.R, q.dR, q.wdet, (etaq - eta_n) / dt + Ccap / dt, Kq)
            K = self.scal.matrix(Ke)
            th[free] += spla.spsolve(K[free][:, free].tocsc(), -r[free])
        raise StepFailed(f"thermal block did not converge (residual {res:.3e})")

    # ------------------------------------------------------------- stepping
    def _attempt(self, st_n, t, dt):
        rec = StaggeredStep(t_n=st_n.t, t=t, dt=dt)
        if st_n.du_prev is not None and st_n.dt_prev > 0.0:
            u0 = st_n.u.ravel() + st_n.du_prev * (dt / st_n.dt_prev)
            if not self._admissible(u0):
                u0 = st_n.u.ravel()
        else:
            u0 = st_n.u.ravel()
        lam = st_n.lam
        s3 = (st_n.s, st_n.sL, st_n.sM)
        theta = st_n.theta.copy()
        rp = st_n.rp.copy()
        alpha = st_n.alpha
        prev_pass = None
        for p in range(self.opt.passes):
            for k in range(self.opt.max_pair):
                u, lam, ev, r, fint, fext, hist, scale = self.solve_mechanics(
                    st_n, t, dt, rp, theta, s3, u0, lam)
                rec.newton_iterations.append(len(hist) - 1)
                rec.newton_residuals.append(hist)
                u0 = u
                alpha, rp_new = self.plastic_pair(ev, st_n, theta)
                change = np.max(np.abs(rp_new - rp))
                rp = rp_new
                if change <= self.opt.pair_rtol * max(1.0, np.max(np.abs(rp))):
                    break
            else:
                raise StepFailed("plastic pair fixed point did not converge")
            rec.pair_iterations += k + 1
            # a new resistance changes the stresses only marginally; refresh once
            if k > 0:
                u, lam, ev, r, fint, fext, hist, scale = self.solve_mechanics(
                    st_n, t, dt, rp, theta, s3, u, lam)
                rec.newton_iterations.append(len(hist) - 1)
            pass_res = rec.newton_residuals[-1][0] / max(scale, 1e-300) if p > 0 else np.inf
            if p > 0:
                rec.pass_residuals.append(pass_res)
                if prev_pass is not None and pass_res > 1.01 * prev_pass:
                    log.warning("staggered pass %d increased the residual; keeping previous pass", p)
                    break
                prev_pass = pass_res
            s_new, sweeps, pres = self.phase_fields(ev, st_n, alpha, dt)
            rec.phase_sweeps, rec.phase_residuals = sweeps, pres
            Dq = self.dissipation_density(ev, st_n, alpha, rp, s_new, dt)
            if not self.mat.thermal.isothermal:
                theta, nit, tres = self.solve_thermal(ev, st_n, t, dt, Dq, s_new[0], theta)
                rec.thermal_iterations, rec.thermal_residual = nit, tres
            s3 = tuple(s_new)
        new = FieldState(t=t, u=u.reshape(-1, 3), theta=theta, s=s3[0], sL=s3[1], sM=s3[2],
                         alpha=alpha, rp=rp, Fp=ev.Fp.copy(), f=ev.f.copy(),
                         eta=self._entropy(ev, theta), lam=lam, step=st_n.step + 1,
                         du_prev=u - st_n.u.ravel(), dt_prev=dt)
        self._record(rec, ev, r, fint, fext, lam, t, Dq, new, st_n)
        return rec, new

    def _record(self, rec, ev, r, fint, fext, lam, t, Dq, new, st_n):
        fixed, _ = self.layout.mech_dirichlet(t)
        # support forces: Dirichlet reactions on fixed dofs, multipliers and
        # penalty forces elsewhere
        react = -(self.K_pen @ new.u.ravel() + self.b_pen)
        if self.C.shape[0]:
            react -= self.C.T @ lam
        react[fixed] = (fint - fext)[fixed]
        rec.resultant = (fext + react).reshape(-1, 3).sum(0)
        rec.load_scale = float(max(np.abs(react).reshape(-1, 3).sum(0).max(), np.abs(fext).sum(), 1e-300))
        for bc in self.layout.dirichlet:
            if bc.group:
                rec.reactions[bc.group] = rec.reactions.get(bc.group, 0.0) + float(
                    r[3 * bc.cps + bc.component].sum())
        for k, pc in enumerate(self.layout.points):
            if pc.group:
                rec.reactions[pc.group] = rec.reactions.get(pc.group, 0.0) - float(lam[k])
        rec.dissipation = self.integrate(Dq) * rec.dt
        thq = self.at_qp(new.theta).ravel()
        rec.heat_rate = self.integrate(thq * (new.eta - st_n.eta)) / rec.dt

    def advance(self, state, t_target, callback=None):
        """Advance from ``state`` to ``t_target`` with automatic step cuts.

        ``callback(record, state)`` is called after every accepted step.
        Returns the list of accepted step records and the new state.
        """
        records = []
        dt = t_target - state.t
        cuts = 0
        while state.t < t_target - 1e-12 * max(1.0, abs(t_target)):
            dt_try = min(dt, t_target - state.t)
            try:
                rec, new = self._attempt(state, state.t + dt_try, dt_try)
            except GradFiberError as exc:
                cuts += 1
                if cuts > self.opt.max_cuts:
                    raise StepFailed(f"step to t={t_target:.6g} failed after {self.opt.max_cuts} cuts: {exc}") from exc
                log.info("cutting step at t=%.6g (dt=%.3g): %s", state.t, dt_try, exc)
                dt = 0.5 * dt_try
                continue
            if rec.committed:
                raise RuntimeError("history committed twice")
            rec.committed = True
            rec.cuts = cuts
            records.append(rec)
            state = new
            if callback is not None:
                callback(rec, state)
        return records, state
