"""Assembly, boundary conditions and the staggered time integrator."""
from .assembly import SparsePattern, mechanical_element_arrays
from .layout import (DirichletBC, DofLayout, GradientDirichlet, PointConstraint,
                     ThermalBC, Traction)
from .staggered import (Evaluation, FieldState, Simulation, SolverOptions,
                        StaggeredStep)

__all__ = ["SparsePattern", "mechanical_element_arrays", "DirichletBC", "DofLayout",
           "GradientDirichlet", "PointConstraint", "ThermalBC", "Traction", "Evaluation",
           "FieldState", "Simulation", "SolverOptions", "StaggeredStep"]
