"""Isogeometric discretization: B-spline/NURBS bases, quadrature, companion mesh."""
from .basis import basis_derivatives, bspline_basis, find_span, greville, open_uniform_knots
from .patch import (FACES, FaceQuadrature, LinearCompanionMesh, NurbsPatch, Quadrature,
                    rational_physical)

__all__ = ["basis_derivatives", "bspline_basis", "find_span", "greville", "open_uniform_knots",
           "FACES", "FaceQuadrature", "LinearCompanionMesh", "NurbsPatch", "Quadrature",
           "rational_physical"]
