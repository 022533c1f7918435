"""Spectra, spectral triangles and Riesz-basis diagnostics for Hill operators
``L y = -y'' + v y`` with complex pi-periodic trigonometric potentials."""

__version__ = "0.1.0"

from .opmatrix import BC, BoundaryCondition, ConfigurationError, build_operator
from .potential import PotentialSpec, WeightSpec
from .spectra import EigenError, StructureError, eigenvalues

__all__ = [
    "BC",
    "BoundaryCondition",
    "ConfigurationError",
    "EigenError",
    "PotentialSpec",
    "StructureError",
    "WeightSpec",
    "build_operator",
    "eigenvalues",
]
