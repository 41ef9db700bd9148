"""Degree-of-freedom layout and boundary-condition containers."""
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

FIELDS = ("u", "theta", "s", "sL", "sM", "alpha", "rp")


def _as_ramp(value):
    if callable(value):
        return value
    v = float(value)
    return lambda t: v


@dataclass
class DirichletBC:
    """Prescribed displacement component on a set of control points.

    ``value`` is a constant or a function of time returning a scalar or one
    value per control point (in sorted ``cps`` order); ``group`` names the
    reaction resultant the constraint contributes to.
    """

    cps: np.ndarray
    component: int
    value: Callable | float = 0.0
    group: str = ""

    def __post_init__(self):
        self.cps = np.unique(np.asarray(self.cps, np.int64))
        if self.component not in (0, 1, 2):
            raise ValueError("component must be 0, 1 or 2")
        self.value = _as_ramp(self.value)


@dataclass
class PointConstraint:
    """Displacement component prescribed at a physical point (Lagrange multiplier)."""

    point: np.ndarray
    component: int
    value: Callable | float = 0.0
    group: str = ""

    def __post_init__(self):
        self.point = np.asarray(self.point, float)
        self.value = _as_ramp(self.value)


@dataclass
class GradientDirichlet:
    """Penalty enforcement of ``grad(phi) N = target`` on a boundary face.

    ``target`` maps face points ``(nf, nq, 3)`` and normals to the prescribed
    vector; by default the undeformed normal (clamped cross-section).
    """

    face: str
    beta: float
    target: Callable | None = None


@dataclass
class Traction:
    """Dead traction (force per reference area) on a boundary face."""

    face: str
    value: Callable
    group: str = ""


@dataclass
class ThermalBC:
    """Prescribed temperature on control points."""

    cps: np.ndarray
    value: Callable | float

    def __post_init__(self):
        self.cps = np.unique(np.asarray(self.cps, np.int64))
        self.value = _as_ramp(self.value)


@dataclass
class DofLayout:
    """Equation numbering of all fields and the boundary data attached to them.

    Every field owns a contiguous, disjoint equation range; the mechanical
    block has three components per control point, the plastic pair lives on
    the nodes of the companion mesh.
    """

    n_cp: int
    n_nodes: int
    dirichlet: list = field(default_factory=list)
    points: list = field(default_factory=list)
    gradient: list = field(default_factory=list)
    tractions: list = field(default_factory=list)
    thermal: list = field(default_factory=list)

    @property
    def sizes(self):
        n, m = self.n_cp, self.n_nodes
        return {"u": 3 * n, "theta": n, "s": n, "sL": n, "sM": n, "alpha": m, "rp": m}

    @property
    def ranges(self):
        out, start = {}, 0
        for name in FIELDS:
            size = self.sizes[name]
            out[name] = (start, start + size)
            start += size
        return out

    def mech_dirichlet(self, t):
        """Constrained mechanical dofs and their values at time ``t``."""
        if not self.dirichlet:
            return np.zeros(0, np.int64), np.zeros(0)
        dofs = np.concatenate([3 * bc.cps + bc.component for bc in self.dirichlet])
        vals = np.concatenate([np.broadcast_to(np.asarray(bc.value(t), float), bc.cps.shape)
                               for bc in self.dirichlet])
        uniq, first, inv = np.unique(dofs, return_index=True, return_inverse=True)
        bad = np.abs(vals - vals[first][inv]) > 1e-14 * np.maximum(1.0, np.abs(vals))
        if bad.any():
            raise ValueError(f"conflicting Dirichlet values on dof {dofs[bad][0]}")
        return uniq, vals[first]

    def mech_free(self, t=0.0):
        fixed = self.mech_dirichlet(t)[0]
        mask = np.ones(3 * self.n_cp, bool)
        mask[fixed] = False
        return np.flatnonzero(mask)

    def thermal_dirichlet(self, t):
        if not self.thermal:
            return np.zeros(0, np.int64), np.zeros(0)
        dofs = np.concatenate([bc.cps for bc in self.thermal])
        vals = np.concatenate([np.full(bc.cps.size, bc.value(t), float) for bc in self.thermal])
        uniq, first = np.unique(dofs, return_index=True)
        return uniq, vals[first]

    def groups(self):
        names = {bc.group for bc in self.dirichlet} | {pc.group for pc in self.points}
        names |= {tr.group for tr in self.tractions}
        return sorted(n for n in names if n)
