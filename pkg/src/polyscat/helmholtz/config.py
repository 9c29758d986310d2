"""Scattering configuration and incident plane waves."""
import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import ParameterError, ValidationError

DEFAULT_TOLERANCES = {
    "solver": 1e-6,        # target accuracy of converged solves (field units)
    "bc": 1e-3,            # boundary-condition residual, relative to field scale
    "cond": 1e8,           # condition number above which a solve is rejected
    "helmholtz": 1e-4,     # finite-difference Helmholtz residual on probes
}


@dataclass
class ScatterConfig:
    """Wavenumber, incident directions and the probe geometry around the scatterer.

    Radii follow the conventions ``R + 1 + rho_tilde <= R1``,
    ``R + 1 + rho_tilde <= |x0| <= R1`` and ``R2 >= max(2 R1, 4 R)``.
    """
    k: float = 1.0
    directions: list = field(default_factory=lambda: [(1.0, 0.0)])
    R: float = 1.0
    R1: float = 2.5
    rho_tilde: float = 0.5
    x0: tuple = (2.5, 0.0)
    R2: float = 5.0
    quad_order: int = 512
    grading: int = 4
    n_far: int = 256
    k_low: float = 1e-2
    k_high: float = 50.0
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        dirs = np.atleast_2d(np.asarray(self.directions, dtype=float))
        if dirs.shape[1] != 2 or len(dirs) == 0:
            raise ValidationError("directions must be a non-empty list of 2D vectors", field="directions")
        norms = np.linalg.norm(dirs, axis=1)
        if np.any(norms == 0):
            raise ValidationError("directions must be nonzero", field="directions")
        self.directions = [tuple(d) for d in dirs / norms[:, None]]
        self.x0 = tuple(float(c) for c in self.x0)
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(self.tolerances or {})
        self.tolerances = tol
        self.check()

    def check(self):
        if not self.k > 0:
            raise ValidationError(f"k must be positive, got {self.k}", field="k")
        if not self.k_low > 0 or not (self.k_low <= self.k <= self.k_high):
            raise ValidationError(f"k={self.k} outside [{self.k_low}, {self.k_high}]", field="k")
        if self.R + 1 + self.rho_tilde > self.R1 + 1e-12:
            raise ValidationError("need R + 1 + rho_tilde <= R1", field="R1")
        nx0 = float(np.hypot(*self.x0))
        if not (self.R + 1 + self.rho_tilde - 1e-12 <= nx0 <= self.R1 + 1e-12):
            raise ValidationError("need R + 1 + rho_tilde <= |x0| <= R1", field="x0")
        if self.R2 < max(2 * self.R1, 4 * self.R) - 1e-12:
            raise ValidationError("need R2 >= max(2 R1, 4 R)", field="R2")
        if self.quad_order < 64:
            raise ValidationError("quad_order must be at least 64", field="quad_order")
        if not 1 <= self.grading <= 6:
            # larger exponents push the first nodes onto the corners in double precision
            raise ValidationError("grading exponent must be in [1, 6]", field="grading")
        if self.n_far < 64:
            raise ValidationError("n_far must be at least 64", field="n_far")

    def direction(self, j):
        try:
            return np.array(self.directions[j])
        except (IndexError, TypeError) as exc:
            raise ParameterError(f"direction index {j} out of range") from exc

    def replace(self, **kw):
        d = self.to_dict()
        d.update(kw)
        return ScatterConfig.from_dict(d)

    def to_dict(self):
        return {
            "k": self.k, "directions": [list(d) for d in self.directions], "R": self.R,
            "R1": self.R1, "rho_tilde": self.rho_tilde, "x0": list(self.x0), "R2": self.R2,
            "quad_order": self.quad_order, "grading": self.grading, "n_far": self.n_far,
            "k_low": self.k_low, "k_high": self.k_high, "tolerances": dict(self.tolerances),
        }

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ValidationError("config must be a JSON object", field="<root>")
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config field(s): {sorted(unknown)}", field=sorted(unknown)[0])
        kw = {}
        for key, val in data.items():
            if key in ("directions", "x0", "tolerances"):
                kw[key] = val
                continue
            try:
                kw[key] = int(val) if key in ("quad_order", "grading", "n_far") else float(val)
            except (TypeError, ValueError) as exc:
                raise ValidationError(f"config field {key!r} must be numeric", field=key) from exc
        try:
            return cls(**kw)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"bad config: {exc}", field="<root>") from exc


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed JSON: {exc}", field="<json>") from exc
    return ScatterConfig.from_dict(data)


class PlaneWave:
    """``exp(i k x . v)`` with its gradient."""

    def __init__(self, k, direction):
        self.k = float(k)
        self.direction = np.asarray(direction, dtype=float)

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.exp(1j * self.k * (x @ self.direction))

    def grad(self, x):
        return 1j * self.k * self(x)[:, None] * self.direction[None, :]


def incident_field(cfg, j):
    return PlaneWave(cfg.k, cfg.direction(j))
