"""Regular chains, three-spheres propagation, reflections and stability moduli."""
from .chains import (DEFAULT_CONSTANTS, BallChain, Obstacle, Regularity, build_chain,
                     chain_is_regular, tail_ratio)
from .reflection import ReflectedField, flatness_indicator, flatness_samples, reflect_field
from .smallness import (ExponentLedger, eta, eta1, eta_from_log, ledger, log_eta_from_log,
                        log_propagate_smallness, propagate_smallness, stability_bound)
from .three_spheres import (FleetCalibration, PlaneWaveSum, ThreeSpheresResult, ball_norms,
                            calibrate_fleet, fit_beta, synthetic_fleet, three_spheres_check,
                            unit_disk_samples)

__all__ = [
    "DEFAULT_CONSTANTS", "BallChain", "Obstacle", "Regularity", "build_chain", "chain_is_regular",
    "tail_ratio", "ReflectedField", "flatness_indicator", "flatness_samples", "reflect_field",
    "ExponentLedger", "eta", "eta1", "eta_from_log", "ledger", "log_eta_from_log",
    "log_propagate_smallness", "propagate_smallness", "stability_bound", "FleetCalibration",
    "PlaneWaveSum", "ThreeSpheresResult", "ball_norms", "calibrate_fleet", "fit_beta",
    "synthetic_fleet", "three_spheres_check", "unit_disk_samples",
]
