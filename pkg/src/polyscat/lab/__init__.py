"""Stability experiments: scatterer pairs, sweeps, modulus fits, audits, reports."""
from .experiments import StabilityRecord, run_pair, solve_all, sweep
from .fitting import DistanceAudit, ModulusFit, audit_distances, fit_modulus
from .report import SCHEMA, dumps, load_report, make_manifest, records_csv, report
from .symmetry import SymmetryReport, symmetry_experiment

__all__ = [
    "StabilityRecord", "run_pair", "solve_all", "sweep", "DistanceAudit", "ModulusFit",
    "audit_distances", "fit_modulus", "SCHEMA", "dumps", "load_report",
    "make_manifest", "records_csv", "report", "SymmetryReport", "symmetry_experiment",
]
