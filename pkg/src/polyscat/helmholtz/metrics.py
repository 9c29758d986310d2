"""Discrepancies between two wave fields and solver self-checks."""
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, ParameterError
from .fields import FarFieldPattern


@dataclass(frozen=True)
class SupError:
    """Sampled sup-norm discrepancy with the sampling pitch used."""
    value: float
    pitch: float
    n_points: int

    def __float__(self):
        return self.value


def ball_samples(center, radius, n=48):
    """Points of an ``n x n`` lattice inside the closed ball, plus its boundary circle.

    At least ``n^2 pi / 4`` interior points, so ``n = 48`` gives more than 32^2.
    """
    c = np.asarray(center, dtype=float)
    g = np.linspace(-radius, radius, n)
    P = np.array(np.meshgrid(g, g)).reshape(2, -1).T
    P = P[np.hypot(P[:, 0], P[:, 1]) <= radius * (1 + 1e-12)]
    th = 2 * np.pi * np.arange(4 * n) / (4 * n)
    ring = radius * np.column_stack([np.cos(th), np.sin(th)])
    return c + np.vstack([P, ring]), float(g[1] - g[0])


def annulus_samples(r_in, r_out, n_r=16, n_theta=512):
    r = np.linspace(r_in, r_out, n_r)
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    R, T = np.meshgrid(r, th)
    P = np.column_stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()])
    pitch = max(float(r[1] - r[0]) if n_r > 1 else 0.0, float(r_out * 2 * np.pi / n_theta))
    return P, pitch


def _check_clear(fields, points, what):
    for u in fields:
        s = u.scatterer
        if s is None or s.is_empty:
            continue
        if np.any(s.contains(points)) or np.min(s.distance(points)) <= 0:
            raise DomainError(f"{what} intersects a scatterer")


def _sup_diff(u, v, P):
    return float(np.max(np.abs(u.eval(P) - v.eval(P))))


def near_field_error(u, v, center, radius, n=48):
    """``max |u - v|`` over a lattice in the closed ball ``B_radius(center)``."""
    if radius <= 0:
        raise ParameterError("radius must be positive")
    P, pitch = ball_samples(center, radius, n)
    _check_clear((u, v), P, "probe ball")
    return SupError(_sup_diff(u, v, P), pitch, len(P))


def annulus_error(u, v, cfg, n=48, n_r=16, n_theta=512):
    """Sup of ``|u - v|`` over ``|x0| - rho <= |x| <= |x0| + rho``.

    The sample set contains the near-field ball samples, so the result is
    never below ``near_field_error(u, v, cfg.x0, cfg.rho_tilde)``.
    """
    r0 = float(np.hypot(*cfg.x0))
    P, pitch = annulus_samples(r0 - cfg.rho_tilde, r0 + cfg.rho_tilde, n_r, n_theta)
    B, _ = ball_samples(cfg.x0, cfg.rho_tilde, n)
    P = np.vstack([P, B])
    _check_clear((u, v), P, "annulus")
    return SupError(_sup_diff(u, v, P), pitch, len(P))


def far_field_error(f, g):
    """L2(S^1) norm of ``f - g`` by the trapezoid rule on their common grid."""
    if not isinstance(g, FarFieldPattern):
        g = FarFieldPattern(f.theta, np.broadcast_to(np.asarray(g, dtype=complex), f.values.shape))
    if f.n != g.n:
        raise ParameterError(f"far-field grids differ ({f.n} vs {g.n} directions)")
    return float(np.sqrt(2 * np.pi / f.n * np.sum(np.abs(f.values - g.values) ** 2)))


def relative_far_field_error(f, g):
    return far_field_error(f, g) / g.l2_norm()


OPTICAL_C = lambda k: np.sqrt(8 * np.pi / k)   # noqa: E731
OPTICAL_GAMMA = np.exp(-1j * np.pi / 4)


@dataclass(frozen=True)
class OpticalDefect:
    value: float
    degenerate: bool

    def __float__(self):
        return self.value


def optical_theorem_defect(u, n_dirs=512):
    """Relative defect of ``int |u_inf|^2 = sqrt(8 pi/k) Im(exp(-i pi/4) u_inf(v))``.

    The constants follow from ``u_inf`` being the coefficient of
    ``exp(ik|x|)/sqrt(|x|)``.  A zero far field returns 0 flagged degenerate.
    """
    f = u.far_field(n_dirs)
    power = 2 * np.pi / f.n * float(np.sum(np.abs(f.values) ** 2))
    if power == 0.0:
        return OpticalDefect(0.0, True)
    theta_v = np.arctan2(u.direction[1], u.direction[0])
    forward = u.far_field_at(theta_v)[0]
    extinct = OPTICAL_C(u.k) * float(np.imag(OPTICAL_GAMMA * forward))
    return OpticalDefect(abs(power - extinct) / power, False)
