"""Exterior Helmholtz scattering by polygons: Nystrom solver, oracles, metrics."""
from .config import PlaneWave, ScatterConfig, incident_field, load_config
from .fields import (EmptyField, FarFieldPattern, NearBoundaryWarning, WaveField, eval_grad, evaluate,
                     far_field)
from .metrics import (OpticalDefect, SupError, annulus_error, far_field_error, near_field_error,
                      optical_theorem_defect, relative_far_field_error)
from .nystrom import NystromField, solve
from .oracles import DiscSeriesField, MFSField, disc_series, mfs_solve

__all__ = [
    "PlaneWave", "ScatterConfig", "incident_field", "load_config", "EmptyField", "FarFieldPattern",
    "NearBoundaryWarning", "WaveField", "eval_grad", "evaluate", "far_field", "OpticalDefect",
    "SupError", "annulus_error", "far_field_error", "near_field_error", "optical_theorem_defect",
    "relative_far_field_error", "NystromField", "solve", "DiscSeriesField", "MFSField",
    "disc_series", "mfs_solve",
]
