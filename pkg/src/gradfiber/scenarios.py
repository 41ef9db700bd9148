"""Benchmark problem generators: bending verification and tension tests."""
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .iga import NurbsPatch
from .material import Material
from .solver import (DirichletBC, DofLayout, GradientDirichlet, PointConstraint,
                     SolverOptions)

TENSION_SIZE = (125.0, 25.0, 2.0)
TENSION_MESH = (16, 4, 1)
TENSION_MESH_FINE = (76, 16, 2)
FOUR_POINT_SIZE = (125.0, 25.0, 0.5)
FOUR_POINT_MESH = (25, 5, 2)
FOUR_POINT_SUPPORTS = (10.0, 115.0)
FOUR_POINT_LOADS = (45.0, 80.0)
IN_PLANE_SIZE = (10.0, 1.0, 0.5)
IN_PLANE_MESH = (8, 2, 1)
E_FIB = 79000.0


@dataclass
class Scenario:
    """A ready-to-run problem.

    ``displacement(t)`` is the control quantity reported in the trace and
    ``load_group`` names the reaction resultant reported as the force.  A run
    stops early once a rupture was logged and the force has dropped below
    ``stop_fraction`` of its peak.
    """

    name: str
    patch: NurbsPatch
    material: Material
    layout: DofLayout
    displacement: Callable
    load_group: str
    load_sign: float
    t_end: float
    options: SolverOptions
    imposed: Callable | None = None
    stop_fraction: float | None = None


def fiber_directions(angle_deg):
    """In-plane fiber directions ``L``, ``M`` rotated by ``angle_deg`` from x."""
    a = np.deg2rad(angle_deg)
    c, s = np.cos(a), np.sin(a)
    # exact zeros keep axis-aligned layups free of round-off shear
    c, s = (0.0 if abs(c) < 1e-15 else c), (0.0 if abs(s) < 1e-15 else s)
    return (c, s, 0.0), (-s, c, 0.0)


def _layout(patch):
    return DofLayout(patch.n_cp, patch.companion_mesh().n_nodes)


def tension(material=None, angle=0.0, bidirectional=False, mesh=TENSION_MESH, size=TENSION_SIZE,
            grip=20.0, rate=0.5, u_max=60.0, dt=None, options=None, theta=None):
    """Flat tension specimen with clamped grips.

    All three displacement components are prescribed on the control points
    whose Greville abscissa lies within ``grip`` of either end; the left grip
    is fixed and the right grip moves at ``rate`` along x.
    """
    material = material or Material()
    L, M = fiber_directions(angle)
    weights = None if bidirectional else (1.0 - material.zeta, 0.0)
    fiber = replace(material.fiber, L=L, M=M, family_weights=weights)
    thermal = material.thermal if theta is None else replace(material.thermal, theta_init=float(theta))
    material = replace(material, fiber=fiber, thermal=thermal)
    patch = NurbsPatch.box(size, mesh)
    X = patch.flat_points
    left = np.flatnonzero(X[:, 0] <= grip + 1e-9)
    right = np.flatnonzero(X[:, 0] >= size[0] - grip - 1e-9)
    if left.size == 0 or right.size == 0:
        raise ValueError("mesh too coarse to resolve the grips")
    lay = _layout(patch)
    for comp in range(3):
        lay.dirichlet.append(DirichletBC(left, comp, 0.0, "fixed" if comp == 0 else ""))
    lay.dirichlet.append(DirichletBC(right, 0, lambda t: rate * t, "grip"))
    lay.dirichlet.append(DirichletBC(right, 1, 0.0))
    lay.dirichlet.append(DirichletBC(right, 2, 0.0))
    opts = options or SolverOptions()
    step = dt if dt is not None else min(opts.dt, 0.1 / rate)
    opts = replace(opts, dt=step)
    name = "tension_bi" if bidirectional else "tension_uni"
    return Scenario(name, patch, material, lay, lambda t: rate * t, "grip", 1.0, u_max / rate, opts,
                    stop_fraction=0.05)


def four_point_bending(variant="A", material=None, mesh=FOUR_POINT_MESH, size=FOUR_POINT_SIZE,
                       deflection=2.0, steps=10, options=None):
    """Elastic four point bending of a thin bidirectional plate.

    Variant ``A`` carries the bending stiffness through the fiber tensile
    stiffness (``a = E_fib``, ``c_perp = 0``), variant ``B`` through the
    curvature term alone (``a = 0``, ``c_perp = E_fib H^2 / 12``).  Supports and
    loading lines are enforced with Lagrange multipliers at the Greville
    points across the width; the left support also holds x (and y at one
    point), the other lines may slide.
    """
    material = material or Material()
    H = size[2]
    if variant == "A":
        fiber = replace(material.fiber, a=E_FIB, c_perp=0.0, c_par=0.0)
    elif variant == "B":
        fiber = replace(material.fiber, a=0.0, c_perp=E_FIB * H * H / 12.0, c_par=0.0)
    else:
        raise ValueError("variant must be 'A' or 'B'")
    fiber = replace(fiber, L=(1.0, 0.0, 0.0), M=(0.0, 1.0, 0.0), family_weights=None)
    material = replace(material, fiber=fiber,
                       plastic=replace(material.plastic, enabled=False),
                       fracture=replace(material.fracture, enabled=False),
                       thermal=replace(material.thermal, isothermal=True))
    patch = NurbsPatch.box(size, mesh)
    lay = _layout(patch)
    ys = np.unique(patch.flat_points[:, 1])
    for x in FOUR_POINT_SUPPORTS:
        for y in ys:
            lay.points.append(PointConstraint((x, y, 0.0), 2, 0.0, "support"))
    for y in ys:
        lay.points.append(PointConstraint((FOUR_POINT_SUPPORTS[0], y, 0.0), 0, 0.0))
    lay.points.append(PointConstraint((FOUR_POINT_SUPPORTS[0], ys[ys.size // 2], 0.0), 1, 0.0))
    rate = deflection
    for x in FOUR_POINT_LOADS:
        for y in ys:
            lay.points.append(PointConstraint((x, y, H), 2, lambda t: -rate * t, "load"))
    opts = replace(options or SolverOptions(), dt=1.0 / steps)
    return Scenario("four_point_bending", patch, material, lay, lambda t: rate * t, "load", -1.0, 1.0, opts)


def arc_map(X, kappa):
    """Translated circular arc: every x-line becomes an arc of curvature ``kappa``."""
    X = np.asarray(X, float)
    rho = 1.0 / kappa
    out = np.empty_like(X)
    out[..., 0] = rho * np.sin(kappa * X[..., 0])
    out[..., 1] = rho * (1.0 - np.cos(kappa * X[..., 0])) + X[..., 1]
    out[..., 2] = X[..., 2]
    return out


def in_plane_bending(material=None, mesh=IN_PLANE_MESH, size=IN_PLANE_SIZE, curvature=0.1,
                     beta_pen=1e6, steps=1, options=None):
    """Plate bent in its plane by an imposed circular arc.

    A single unidirectional fiber bundle (no matrix) with ``c_# = E I / A``.
    The arc is imposed on every control point through its least-squares fit in
    the spline space; the left edge is clamped, including its normal gradient.
    The translated arc has ``det F = cos(kappa X)``, so ``kappa L`` must stay
    below pi/2.
    """
    if not 0.0 < curvature * size[0] < 0.5 * np.pi:
        raise ValueError("curvature * length must lie in (0, pi/2)")
    material = material or Material()
    W, H = size[1], size[2]
    A = W * H
    I = H * W ** 3 / 12.0
    fiber = replace(material.fiber, a=E_FIB, c_par=E_FIB * I / A, c_perp=E_FIB * H * H / 12.0,
                    L=(1.0, 0.0, 0.0), M=(0.0, 1.0, 0.0), family_weights=(1.0, 0.0), zeta=0.0)
    mat = replace(material.matrix, zeta=0.0)
    material = Material(mat, fiber, replace(material.plastic, enabled=False),
                        replace(material.fracture, enabled=False),
                        replace(material.thermal, isothermal=True))
    patch = NurbsPatch.box(size, mesh)
    target = fit_map(patch, lambda X: arc_map(X, curvature))
    disp = target - patch.flat_points
    lay = _layout(patch)
    every = np.arange(patch.n_cp)
    for comp in range(3):
        lay.dirichlet.append(DirichletBC(every, comp, (lambda c: (lambda t: disp[:, c] * t))(comp)))
    lay.gradient.append(GradientDirichlet("x0", beta_pen))
    opts = replace(options or SolverOptions(), dt=1.0 / steps)
    return Scenario("in_plane_bending", patch, material, lay, lambda t: curvature * t, "", 1.0, 1.0,
                    opts, imposed=lambda t: disp * t)


def fit_map(patch, func, n_gauss=None):
    """Control points of the L2 projection of ``func`` onto the spline space."""
    import scipy.sparse as sp
    import scipy.sparse.linalg as spla

    from .solver.assembly import SparsePattern

    q = patch.quadrature(n_gauss or tuple(p + 3 for p in patch.degrees))
    pat = SparsePattern(q.conn, 1, patch.n_cp)
    Mm = pat.matrix(np.einsum("eq,eqa,eqb->eab", q.wdet, q.R, q.R))
    vals = func(q.X)
    rhs = np.stack([pat.vector(np.einsum("eq,eqa->ea", q.wdet * vals[..., i], q.R)) for i in range(3)], 1)
    return spla.spsolve(sp.csc_matrix(Mm), rhs)


def beam_energy(curvature, size=IN_PLANE_SIZE, E=E_FIB):
    """Euler-Bernoulli bending energy ``E I kappa^2 L / 2`` about the thickness axis."""
    L, W, H = size
    return 0.5 * E * (H * W ** 3 / 12.0) * curvature ** 2 * L


def build_scenario(cfg, steps=None, dt=None, fine=False):
    """Scenario described by a :class:`~gradfiber.config.SimulationConfig`.

    ``fine`` replaces the tension mesh by the 76x16x2 (2432 element) resolution.
    """
    kind = cfg.scenario
    material = cfg.material()
    v = cfg.values
    geo, load, sol = v["geometry"], v["loading"], v["solver"]
    opts = SolverOptions(dt=dt or sol["dt"], rtol=sol["rtol"], atol=sol["atol"],
                         max_newton=sol["max_newton"], max_cuts=sol["max_cuts"], passes=sol["passes"])

    def size(default):
        vals = (geo["length"], geo["width"], geo["thickness"])
        return default if any(x is None for x in vals) else vals

    def mesh(default):
        return geo["elements"] or default

    if kind in ("tension_uni", "tension_bi", "custom"):
        sc = tension(material, v["scenario"]["angle"], kind == "tension_bi",
                     TENSION_MESH_FINE if fine else mesh(TENSION_MESH),
                     size(TENSION_SIZE), geo["grip"], load["rate"], load["u_max"], opts.dt, opts)
    elif kind == "four_point_bending":
        sc = four_point_bending(v["scenario"]["variant"], material, mesh(FOUR_POINT_MESH),
                                size(FOUR_POINT_SIZE), load["deflection"], steps or 10, opts)
    else:
        sc = in_plane_bending(material, mesh(IN_PLANE_MESH), size(IN_PLANE_SIZE), load["curvature"],
                              sol["beta_pen"], steps or 1, opts)
    if kind == "custom":
        sc = replace(sc, name="custom")
    if steps:
        sc = replace(sc, options=replace(sc.options, dt=sc.t_end / steps))
    return sc
