"""Even reflection of a field across a line and the flatness indicator."""
import numpy as np

from ..errors import DomainError, ParameterError
from ..scene import reflect


class ReflectedField:
    """``u1(x) = u(T x)`` with ``T`` the mirror in ``pi``; ``grad u1(x) = M grad u(T x)``."""

    def __init__(self, u, pi):
        self.u = u
        self.pi = pi
        nu = pi.normal
        self.matrix = np.eye(2) - 2.0 * np.outer(nu, nu)
        self.k = getattr(u, "k", None)

    def _mirror(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        P = reflect(np.atleast_2d(x), self.pi)
        s = getattr(self.u, "scatterer", None)
        if s is not None and not s.is_empty:
            inside = s.contains(P)
            if np.any(inside):
                bad = np.atleast_2d(x)[np.argmax(inside)]
                raise DomainError(f"point {bad.tolist()} lies inside the reflected scatterer")
        return (P[0] if single else P)

    def eval(self, x):
        return self.u.eval(self._mirror(x))

    __call__ = eval

    def eval_grad(self, x):
        g = self.u.eval_grad(self._mirror(x))
        return g @ self.matrix.T


def reflect_field(u, pi):
    return ReflectedField(u, pi)


def _annulus_chord(pi, r_in, r_out):
    """Parameter intervals of ``pi.point' + t dir`` with ``r_in <= |x| <= r_out``."""
    dvec = pi.direction
    foot = pi.point - (pi.point @ dvec) * dvec  # closest point of the line to the origin
    p = float(np.hypot(*foot))
    if p > r_out:
        return foot, dvec, []
    to = np.sqrt(r_out ** 2 - p ** 2)
    if p >= r_in:
        return foot, dvec, [(-to, to)]
    ti = np.sqrt(r_in ** 2 - p ** 2)
    return foot, dvec, [(-to, -ti), (ti, to)]


def flatness_samples(pi, cfg, n=256):
    """``n`` uniform samples (cell midpoints) of the line inside the outer annulus."""
    r_in, r_out = 2 * cfg.R2 + 2, 2 * cfg.R2 + 3
    foot, dvec, pieces = _annulus_chord(pi, r_in, r_out)
    if not pieces:
        raise ParameterError("line does not meet the annulus 2R2+2 <= |x| <= 2R2+3")
    total = sum(b - a for a, b in pieces)
    pts = []
    for a, b in pieces:
        m = max(1, int(round(n * (b - a) / total)))
        t = a + (np.arange(m) + 0.5) * (b - a) / m
        pts.append(foot + t[:, None] * dvec)
    return np.vstack(pts)


def flatness_indicator(u, pi, cfg, n=256, return_argmax=False):
    """``max |grad u . nu|`` over the line inside ``2R2+2 <= |x| <= 2R2+3``."""
    n = max(256, int(n))
    P = flatness_samples(pi, cfg, n)
    s = getattr(u, "scatterer", None)
    if s is not None and not s.is_empty and np.any(s.contains(P)):
        raise ParameterError("annulus segment of the line intersects the scatterer")
    g = u.eval_grad(P)
    vals = np.abs(g @ pi.normal)
    i = int(np.argmax(vals))
    if return_argmax:
        return float(vals[i]), P[i]
    return float(vals[i])

