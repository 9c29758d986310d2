"""Wave fields: common evaluation front end, far-field patterns, diagnostics."""
import csv
import io
import warnings
from dataclasses import dataclass

import numpy as np

from .._io import atomic_write_text
from ..errors import DomainError, ParameterError, ValidationError
from .config import incident_field


class NearBoundaryWarning(UserWarning):
    """Evaluation point closer to the boundary than one quadrature panel."""


@dataclass(frozen=True)
class FarFieldPattern:
    """Far-field amplitude on a uniform grid ``theta_m = 2 pi m / n``."""
    theta: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=float)
        n = len(th)
        if n == 0 or not np.allclose(th, 2 * np.pi * np.arange(n) / n, atol=1e-12):
            raise ParameterError("far-field grid must be uniform on [0, 2pi) starting at 0")
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))

    @property
    def n(self):
        return len(self.theta)

    def l2_norm(self):
        return float(np.sqrt(2 * np.pi / self.n * np.sum(np.abs(self.values) ** 2)))

    def to_csv(self, path):
        rows = [(repr(float(t)), repr(float(v.real)), repr(float(v.imag)))
                for t, v in zip(self.theta, self.values)]
        _atomic_write_rows(path, ["theta", "re", "im"], rows)

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != ["theta", "re", "im"]:
                raise ValidationError("far-field CSV must have columns theta,re,im", field="header")
            th, vals = [], []
            for row in reader:
                th.append(float(row["theta"]))
                vals.append(complex(float(row["re"]), float(row["im"])))
        return cls(np.array(th), np.array(vals))


def _atomic_write_rows(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    atomic_write_text(path, buf.getvalue())


def uniform_directions(n):
    theta = 2 * np.pi * np.arange(n) / n
    return theta, np.column_stack([np.cos(theta), np.sin(theta)])


class WaveField:
    """Total field ``u = u_i + u_s`` for one scatterer and incident direction.

    Subclasses supply ``_scattered``, ``_scattered_grad`` and ``_far``.
    Instances are immutable after construction.
    """

    def __init__(self, scatterer, config, j):
        self.scatterer = scatterer
        self.config = config
        self.j = j
        self.k = config.k
        self.incident = incident_field(config, j)
        self.direction = config.direction(j)

    # subclass hooks
    def _scattered(self, x):
        raise NotImplementedError

    def _scattered_grad(self, x):
        raise NotImplementedError

    def _far(self, xhat):
        raise NotImplementedError

    def panel_size(self):
        return 0.0

    # front end
    def _points(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        if x.shape[1] != 2:
            raise ParameterError("points must have shape (2,) or (n, 2)")
        if self.scatterer is not None and not self.scatterer.is_empty:
            inside = self.scatterer.contains(x)
            if np.any(inside):
                raise DomainError(f"point {x[np.argmax(inside)].tolist()} lies inside the scatterer")
        return x, single

    def near_boundary(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.scatterer is None or self.scatterer.is_empty:
            return np.zeros(len(x), dtype=bool)
        return self.scatterer.distance_to_set(x) < self.panel_size()

    def _finish(self, vals, x, single, flags):
        near = self.near_boundary(x)
        if flags:
            return (vals[0] if single else vals), (bool(near[0]) if single else near)
        if np.any(near):
            warnings.warn(f"{int(near.sum())} evaluation point(s) within one panel of the boundary",
                          NearBoundaryWarning, stacklevel=3)
        return vals[0] if single else vals

    def eval(self, x, flags=False):
        x, single = self._points(x)
        return self._finish(self.incident(x) + self._scattered(x), x, single, flags)

    def eval_scattered(self, x, flags=False):
        x, single = self._points(x)
        return self._finish(self._scattered(x), x, single, flags)

    def eval_grad(self, x, flags=False):
        x, single = self._points(x)
        return self._finish(self.incident.grad(x) + self._scattered_grad(x), x, single, flags)

    __call__ = eval

    def far_field_at(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        xhat = np.column_stack([np.cos(theta), np.sin(theta)])
        return self._far(xhat)

    def far_field(self, n_dirs=None):
        n = self.config.n_far if n_dirs is None else int(n_dirs)
        if n < 64:
            raise ParameterError("far field needs at least 64 directions")
        theta, xhat = uniform_directions(n)
        return FarFieldPattern(theta, self._far(xhat))

    # diagnostics
    def helmholtz_residual(self, x, h=1e-3):
        """Five-point ``|Lap u + k^2 u|`` at exterior probes."""
        x, _ = self._points(x)
        ex, ey = np.array([h, 0.0]), np.array([0.0, h])
        c = self._scattered(x)
        lap = (self._scattered(x + ex) + self._scattered(x - ex) + self._scattered(x + ey)
               + self._scattered(x - ey) - 4 * c) / h ** 2
        return np.abs(lap + self.k ** 2 * c)

    def decay_profile(self, radii=None, n_theta=256):
        """``max |u_s(x)| |x|^(1/2)`` on circles ``|x| = r`` in ``[R+2, 8R]``."""
        R = self.config.R
        if radii is None:
            radii = np.linspace(R + 2, max(8 * R, R + 2), 8)
        theta = 2 * np.pi * np.arange(n_theta) / n_theta
        out = []
        for r in radii:
            pts = r * np.column_stack([np.cos(theta), np.sin(theta)])
            out.append(float(np.max(np.abs(self._scattered(pts))) * np.sqrt(r)))
        return np.asarray(radii, dtype=float), np.array(out)

    def probe_grid(self, n=48):
        """Exterior points of ``[-R1, R1]^2`` at least one panel from the boundary."""
        R1 = self.config.R1
        g = np.linspace(-R1, R1, n)
        P = np.array(np.meshgrid(g, g)).reshape(2, -1).T
        if self.scatterer is not None and not self.scatterer.is_empty:
            keep = ~self.scatterer.contains(P)
            P = P[keep]
            P = P[self.scatterer.distance_to_set(P) >= max(self.panel_size(), 1e-12)]
        return P

    def diagnostics(self):
        P = self.probe_grid()
        E = float(np.max(np.abs(self.incident(P) + self._scattered(P)))) if len(P) else 1.0
        _, prof = self.decay_profile()
        return {"E": E, "E1": float(np.max(prof))}


class EmptyField(WaveField):
    """No scatterer: ``u = u_i`` exactly."""

    def _scattered(self, x):
        return np.zeros(len(x), dtype=complex)

    def _scattered_grad(self, x):
        return np.zeros((len(x), 2), dtype=complex)

    def _far(self, xhat):
        return np.zeros(len(xhat), dtype=complex)

    def bc_residual(self):
        return 0.0


def evaluate(u, x, flags=False):
    return u.eval(x, flags=flags)


def eval_grad(u, x, flags=False):
    return u.eval_grad(x, flags=flags)


def far_field(u, n_dirs=None):
    return u.far_field(n_dirs)
