"""Polygonal scatterers: forward Helmholtz solves, propagation of smallness,
and stability experiments for inverse obstacle scattering."""
__version__ = "0.1.0"

from .errors import (DomainError, FitError, GenerationError, ParameterError, PolyscatError, RoutingError,
                     SolverError, ValidationError)
from .scene import Scatterer2D

__all__ = ["__version__", "Scatterer2D", "PolyscatError", "ValidationError", "ParameterError", "DomainError",
           "SolverError", "RoutingError", "GenerationError", "FitError"]
