"""Heat conduction, internal dissipation and heat capacity."""
from dataclasses import dataclass

import numpy as np

from .errors import InvertedElement


@dataclass(frozen=True)
class ThermalParams:
    """Conductivities in N/(s K) (numerically equal to W/(m K))."""

    K_mat: float = 0.25
    K_fib: float = 0.25
    K_conv: float = 0.0
    theta_ref: float = 293.0
    isothermal: bool = True
    theta_init: float = 293.0

    def __post_init__(self):
        if min(self.K_mat, self.K_fib, self.K_conv) < 0.0:
            raise ValueError("conductivities must be non-negative")

    def conductivity(self, zeta):
        """Composite conductivity ``zeta K_mat + (1 - zeta) K_fib``."""
        return zeta * self.K_mat + (1.0 - zeta) * self.K_fib


def conductivity_tensor(F, s, tp, zeta):
    """Crack-degraded conductivity pulled back with ``F^-1 F^-T``."""
    F = np.asarray(F, float)
    if np.linalg.det(F) <= 0.0:
        raise InvertedElement("det F <= 0 in heat flux")
    Fi = np.linalg.inv(F)
    k = tp.conductivity(zeta) * (1.0 - s) + tp.K_conv * s
    return k * Fi @ Fi.T


def heat_flux(F, grad_theta, s, tp, zeta):
    """Referential heat flux ``Q = -K(F, s) grad theta``."""
    return -conductivity_tensor(F, s, tp, zeta) @ np.asarray(grad_theta, float)


def internal_dissipation(J, f, rp, alpha_rate, H, HL, HM, s_rate, sL_rate, sM_rate, fp):
    """Practical dissipation density transferred into heat.

    The plastic part uses ``tau : d^p ~ J (1 - f) r^p alpha_dot``.  All inputs
    may be arrays of quadrature-point values.
    """
    return (fp.nu_pmat * J * (1.0 - f) * rp * alpha_rate
            + fp.nu_fmat * H * s_rate
            + fp.nu_ffib * (HL * sL_rate + HM * sM_rate))


def heat_capacity(zeta, c_mat, c_fib, fiber_thermal_weight):
    """Volumetric heat capacity ``zeta c_mat + (w_L + w_M) c_fib``."""
    return zeta * c_mat + fiber_thermal_weight * c_fib
