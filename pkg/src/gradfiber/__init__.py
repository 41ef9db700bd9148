"""Thermo-porous-plastic fracture of fiber reinforced polymers.

Second-gradient fiber continuum on a C1 NURBS discretization with GTN
viscoplasticity of the matrix, three crack phase fields and heat conduction.
"""
from .errors import GradFiberError
from .fiber import FiberParams
from .gtn import PlasticParams
from .material import Material
from .matrix import MatrixParams
from .phasefield import FractureParams
from .thermal import ThermalParams

__version__ = "0.1.0"

__all__ = ["GradFiberError", "FiberParams", "PlasticParams", "Material", "MatrixParams",
           "FractureParams", "ThermalParams", "__version__"]
