"""Periodic boundary parametrizations for Nystrom quadrature.

A closed curve is sampled at ``t_j = (j + 1/2) 2 pi / N``.  Polygons are
parametrized edge by edge with a polynomial grading map that clusters nodes
at every vertex; vertices sit at cell edges, never on a node.
"""
from dataclasses import dataclass

import numpy as np


def _grading_v(s, p):
    c = (np.pi - s) / np.pi
    return (1.0 / p - 0.5) * c ** 3 + (1.0 / p) * (s - np.pi) / np.pi + 0.5


def _grading_dv(s, p):
    c = (np.pi - s) / np.pi
    return -(3.0 / np.pi) * (1.0 / p - 0.5) * c ** 2 + 1.0 / (p * np.pi)


def grading_map(sigma, p):
    """Map ``[0, 1] -> [0, 1]`` with ``p``-fold flattening at both ends.

    Returns the value and derivative.  ``p = 1`` is the identity.
    """
    sigma = np.asarray(sigma, dtype=float)
    if p == 1:
        return sigma.copy(), np.ones_like(sigma)
    s = 2 * np.pi * sigma
    a, b = _grading_v(s, p), _grading_v(2 * np.pi - s, p)
    da, db = _grading_dv(s, p), -_grading_dv(2 * np.pi - s, p)
    ap, bp = a ** p, b ** p
    den = ap + bp
    w = ap / den
    # d/ds of a^p / (a^p + b^p), then d/dsigma = 2 pi d/ds
    dap = p * a ** (p - 1) * da
    dbp = p * b ** (p - 1) * db
    dw = (dap * bp - ap * dbp) / den ** 2
    return w, 2 * np.pi * dw


def kress_log_weights(N):
    """Weights ``R_j`` integrating ``log(4 sin^2((t - tau)/2)) f(tau)`` exactly
    for trigonometric polynomials on ``N = 2n`` nodes; index is ``|i - j|``."""
    n = N // 2
    j = np.arange(N)
    m = np.arange(1, n)
    R = -(2 * np.pi / n) * (np.cos(np.outer(j, m) * np.pi / n) @ (1.0 / m))
    R -= (np.pi / n ** 2) * (-1.0) ** j
    return R


def log_weight_matrix(N):
    R = kress_log_weights(N)
    idx = np.abs(np.subtract.outer(np.arange(N), np.arange(N)))
    return R[idx]


def diff_matrix(N):
    """Spectral differentiation for an even number of equispaced periodic nodes."""
    h = 2 * np.pi / N
    d = np.subtract.outer(np.arange(N), np.arange(N))
    with np.errstate(divide="ignore"):
        D = 0.5 * (-1.0) ** d / np.tan(d * h / 2)
    D[np.diag_indices(N)] = 0.0
    return D


def trig_resample(values, M):
    """Trigonometric interpolation from ``N`` to ``M >= N`` half-shifted periodic nodes."""
    values = np.asarray(values)
    N = len(values)
    if M < N:
        raise ValueError("trig_resample only upsamples")
    if M == N:
        return values.copy()
    c = np.fft.fft(values) / N
    c = c * np.exp(-1j * np.fft.fftfreq(N, d=1.0 / N) * np.pi / N)  # undo half-step offset
    out = np.zeros(M, dtype=complex)
    half = (N + 1) // 2
    out[:half] = c[:half]
    out[M - (N - half):] = c[half:]
    if N % 2 == 0:
        # split the Nyquist mode symmetrically
        out[M - N // 2] = c[N // 2] / 2
        out[N // 2] = c[N // 2] / 2
    out = out * np.exp(1j * np.fft.fftfreq(M, d=1.0 / M) * np.pi / M)
    res = np.fft.ifft(out) * M
    return res if np.iscomplexobj(values) else res.real


@dataclass(frozen=True)
class Curve:
    """Sampled closed curve: nodes, first derivative, outward normal."""
    t: np.ndarray
    x: np.ndarray
    dx: np.ndarray
    normal: np.ndarray
    speed: np.ndarray
    curv: np.ndarray          # nu . x'' at each node
    edge_index: np.ndarray    # owning edge per node (-1 for smooth curves)
    sampler: object = None    # callable M -> Curve at M nodes

    @property
    def n(self):
        return len(self.t)

    @property
    def weights(self):
        return (2 * np.pi / self.n) * self.speed

    def refined(self, M):
        return self.sampler(M)


def _edge_counts(lengths, N, minimum=4):
    share = N * lengths / lengths.sum()
    counts = np.maximum(minimum, np.floor(share).astype(int))
    while counts.sum() < N:
        counts[np.argmax(share - counts)] += 1
    while counts.sum() > N:
        cand = np.where(counts > minimum)[0]
        counts[cand[np.argmin((share - counts)[cand])]] -= 1
    return counts


def polygon_curve(vertices, N, p=3):
    """Graded parametrization of a counter-clockwise polygon with ``N`` nodes."""
    V = np.asarray(vertices, dtype=float)
    A, B = V, np.roll(V, -1, axis=0)
    lengths = np.linalg.norm(B - A, axis=1)
    if N % 2:
        N += 1
    N = max(N, len(V) + len(V) % 2)
    counts = _edge_counts(lengths, N, minimum=max(1, min(4, N // len(V))))
    T = np.concatenate([[0.0], np.cumsum(counts)]) * 2 * np.pi / N
    edge_dir = (B - A) / lengths[:, None]
    normals = np.column_stack([edge_dir[:, 1], -edge_dir[:, 0]])

    def sample(M):
        t = (np.arange(M) + 0.5) * 2 * np.pi / M
        e = np.searchsorted(T, t, side="right") - 1
        e = np.clip(e, 0, len(V) - 1)
        span = T[e + 1] - T[e]
        sigma = (t - T[e]) / span
        g, dg = grading_map(sigma, p)
        x = A[e] + g[:, None] * (B[e] - A[e])
        dx = (B[e] - A[e]) * (dg / span)[:, None]
        return Curve(t=t, x=x, dx=dx, normal=normals[e], speed=np.linalg.norm(dx, axis=1),
                     curv=np.zeros(M), edge_index=e, sampler=None)

    base = sample(N)

    return Curve(t=base.t, x=base.x, dx=base.dx, normal=base.normal, speed=base.speed,
                 curv=base.curv, edge_index=base.edge_index, sampler=sample)


def circle_curve(radius, N, center=(0.0, 0.0)):
    """Smooth circle; used to check the operators against separable solutions."""
    c = np.asarray(center, dtype=float)

    def sample(M):
        t = (np.arange(M) + 0.5) * 2 * np.pi / M
        u = np.column_stack([np.cos(t), np.sin(t)])
        dx = radius * np.column_stack([-np.sin(t), np.cos(t)])
        return Curve(t=t, x=c + radius * u, dx=dx, normal=u, speed=np.full(M, float(radius)),
                     curv=np.full(M, -float(radius)), edge_index=np.full(M, -1), sampler=sample)

    return sample(N)
