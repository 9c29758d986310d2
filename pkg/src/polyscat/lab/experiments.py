"""Scatterer pairs, their near/far discrepancies, and perturbation sweeps."""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import ParameterError, PolyscatError
from ..helmholtz import annulus_error, far_field_error, near_field_error, optical_theorem_defect, solve
from ..propagation import flatness_indicator
from ..scene import distance_triple, nominal_class, perturb, symmetry_lines


@dataclass
class StabilityRecord:
    """One scatterer pair: distances, per-direction errors, flatness values, diagnostics.

    ``eps``, ``eps1`` and ``eps0`` hold one entry per incident direction:
    the sup error on the probe ball, on the probe annulus, and the L2 far-field
    error.  ``A`` holds, per direction, ``{"line", "A"}`` entries for the
    symmetry lines of the base scatterer parallel to that direction.
    """
    pair_id: str
    mode: str = "pair"
    magnitude: float = 0.0
    seed: int = 0
    d: float = math.nan
    dhat: float = math.nan
    dtilde: float = math.nan
    eps: list = field(default_factory=list)
    eps1: list = field(default_factory=list)
    eps0: list = field(default_factory=list)
    A: list = field(default_factory=list)
    h: float = math.nan
    failed: bool = False
    reason: str = ""
    diagnostics: dict = field(default_factory=dict)
    polygons: list = field(default_factory=list)

    @property
    def eps_max(self):
        return max(self.eps) if self.eps else math.nan

    def check(self):
        """Invariants of a successful record: finite, nonnegative, ``eps <= eps1``."""
        if self.failed:
            return True
        vals = [self.d, self.dhat, self.dtilde, *self.eps, *self.eps1, *self.eps0]
        if not all(math.isfinite(v) and v >= 0 for v in vals):
            return False
        return all(a <= b for a, b in zip(self.eps, self.eps1))

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown record field(s): {sorted(unknown)}")
        data = dict(data)
        for key in ("magnitude", "d", "dhat", "dtilde", "h"):
            if key in data and data[key] is None:
                data[key] = math.nan
        return cls(**data)


def solve_all(s, cfg):
    """One solved field per configured incident direction."""
    return [solve(s, cfg, j) for j in range(len(cfg.directions))]


def _field_diagnostics(fields):
    out = []
    for u in fields:
        od = optical_theorem_defect(u)
        out.append({"cond": float(getattr(u, "cond", 1.0)), "optical_defect": od.value,
                    "optical_degenerate": od.degenerate})
    return out


def _flatness(s, fields, cfg):
    out = []
    for j, u in enumerate(fields):
        entries = []
        for line in symmetry_lines(s, cfg.direction(j)):
            try:
                a = flatness_indicator(u, line, cfg)
            except PolyscatError:
                continue
            entries.append({"line": line.to_dict(), "A": a})
        out.append(entries)
    return out


def run_pair(s, s2, cfg, pair_id="pair", mode="pair", magnitude=0.0, seed=0, base_fields=None,
             resolution=1e-3):
    """Solve both scatterers for every direction and collect all discrepancies.

    Any package error (invalid scatterer, solver failure, probe inside a
    scatterer) yields a record with ``failed=True`` and the reason.
    """
    rec = StabilityRecord(pair_id=pair_id, mode=mode, magnitude=float(magnitude), seed=int(seed),
                          polygons=[np.asarray(p).tolist() for p in s2.polygons])
    try:
        rec.h = float(nominal_class(s).h)
        fields = base_fields if base_fields is not None else solve_all(s, cfg)
        fields2 = fields if s2 == s else solve_all(s2, cfg)
        dt = distance_triple(s, s2, resolution)
        rec.d, rec.dhat, rec.dtilde = dt.d, dt.dhat, dt.dtilde
        for u, v in zip(fields, fields2):
            rec.eps.append(near_field_error(u, v, cfg.x0, cfg.rho_tilde).value)
            rec.eps1.append(annulus_error(u, v, cfg).value)
            rec.eps0.append(far_field_error(u.far_field(), v.far_field()))
        rec.A = _flatness(s, fields, cfg)
        rec.diagnostics = {"base": _field_diagnostics(fields), "perturbed": _field_diagnostics(fields2),
                           "d_sampling_error": dt.d_sampling_error}
    except (PolyscatError, np.linalg.LinAlgError) as exc:
        rec.failed = True
        rec.reason = f"{type(exc).__name__}: {exc}"
    return rec


def sweep(base, magnitudes, mode, seeds, cfg, threads=1, on_record=None):
    """One record per ``(magnitude, seed)`` in input order; deterministic for fixed seeds.

    The base scatterer is solved once.  ``on_record`` is called with each
    record as soon as it is complete (completion order under threads).
    """
    magnitudes = [float(m) for m in magnitudes]
    if any(m <= 0 for m in magnitudes):
        raise ParameterError("magnitudes must be positive")
    if any(b >= a for a, b in zip(magnitudes, magnitudes[1:])):
        raise ParameterError("magnitudes must be strictly decreasing")
    seeds = [int(x) for x in seeds]
    if not magnitudes or not seeds:
        return []
    base_fields = solve_all(base, cfg)
    jobs = [(i, m, sd) for i, m in enumerate(magnitudes) for sd in seeds]

    def work(job):
        i, m, sd = job
        pid = f"{mode}-m{i}-s{sd}"
        try:
            s2 = perturb(base, m, mode=mode, seed=sd)
        except PolyscatError as exc:
            rec = StabilityRecord(pair_id=pid, mode=mode, magnitude=m, seed=sd, failed=True,
                                  reason=f"{type(exc).__name__}: {exc}")
        else:
            rec = run_pair(base, s2, cfg, pair_id=pid, mode=mode, magnitude=m, seed=sd,
                           base_fields=base_fields)
        if on_record is not None:
            on_record(rec)
        return rec

    if threads <= 1:
        return [work(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=int(threads)) as pool:
        return list(pool.map(work, jobs))
