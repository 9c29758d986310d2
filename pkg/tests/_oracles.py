"""Independent reference computations used by the tests.

Nothing here imports polyscat geometry: distances are plain numpy and
point-in-polygon tests go through shapely.
"""
import itertools
import math

import numpy as np
import shapely


def segments(polys):
    A = np.vstack([np.asarray(p, float) for p in polys])
    B = np.vstack([np.roll(np.asarray(p, float), -1, axis=0) for p in polys])
    return A, B


def dist_to_segments(P, A, B, chunk=200_000):
    P = np.atleast_2d(np.asarray(P, float))
    out = np.empty(len(P))
    d = B - A
    dd = np.maximum(np.einsum("ij,ij->i", d, d), 1e-300)
    for i in range(0, len(P), chunk):
        Q = P[i:i + chunk, None, :]
        t = np.clip(np.einsum("nmk,mk->nm", Q - A[None], d) / dd, 0, 1)
        X = A[None] + t[..., None] * d[None]
        out[i:i + chunk] = np.sqrt(np.min(np.sum((Q - X) ** 2, axis=-1), axis=1))
    return out


def inside(P, polys):
    g = shapely.union_all([shapely.Polygon(p) for p in polys])
    P = np.atleast_2d(P)
    return shapely.contains_xy(g, P[:, 0], P[:, 1])


def dist_to_set(P, polys):
    A, B = segments(polys)
    return np.where(inside(P, polys), 0.0, dist_to_segments(P, A, B))


def signed_dist(P, polys):
    """Distance to the boundary, negative inside the set."""
    A, B = segments(polys)
    d = dist_to_segments(P, A, B)
    return np.where(inside(P, polys), -d, d)


def boundary_samples(polys, pitch):
    pts = []
    for a, b in zip(*segments(polys)):
        n = max(2, int(math.ceil(np.hypot(*(b - a)) / pitch)) + 1)
        t = np.linspace(0, 1, n)
        pts.append(a + t[:, None] * (b - a))
    return np.vstack(pts)


def dense_dhat(p1, p2, pitch):
    """Hausdorff distance of the boundaries from boundary samples of given pitch."""
    A1, B1 = segments(p1)
    A2, B2 = segments(p2)
    return max(dist_to_segments(boundary_samples(p1, pitch), A2, B2).max(),
               dist_to_segments(boundary_samples(p2, pitch), A1, B1).max())


def dense_d(p1, p2, pitch):
    """Largest distance to the other boundary from boundary points outside the other set."""
    best = 0.0
    for a, b in ((p1, p2), (p2, p1)):
        X = boundary_samples(a, pitch)
        X = X[~inside(X, b)]
        if len(X):
            A, B = segments(b)
            best = max(best, dist_to_segments(X, A, B).max())
    return best


def _region_sup(p1, p2, pitch):
    """sup over the closed set p1 of the distance to the set p2.

    Quadtree refinement down to cells of size ``pitch``; a cell is discarded
    only when the 1-Lipschitz bound on the signed distance proves it cannot
    beat the current best (cells deep inside p2 are worth exactly 0).
    Boundary samples of p1 cover the part of the set the cell centres miss.
    """
    best = float(dist_to_set(boundary_samples(p1, pitch), p2).max())
    allp = np.vstack(p1)
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    size = float(max(hi - lo))
    C = ((lo + hi) / 2)[None, :]
    h = size / 2
    while True:
        r = h * math.sqrt(2)
        s1 = signed_dist(C, p1)
        s2 = signed_dist(C, p2)
        ins = s1 <= 0
        if ins.any():
            best = max(best, float(np.maximum(s2[ins], 0).max()))
        keep = (s1 <= r) & (np.maximum(s2 + r, 0) > best)
        C = C[keep]
        if h <= pitch or not len(C):
            return best
        h /= 2
        off = np.array(list(itertools.product((-h, h), repeat=2)))
        C = (C[:, None, :] + off[None]).reshape(-1, 2)


def dense_dtilde(p1, p2, pitch):
    return max(_region_sup(p1, p2, pitch), _region_sup(p2, p1, pitch))


def random_star_polygon(rng, n=None, center=(0.0, 0.0), r_lo=0.6, r_hi=1.0):
    """Star-shaped polygon with well separated angles (simple by construction)."""
    n = int(rng.integers(5, 10)) if n is None else n
    base = 2 * np.pi * np.arange(n) / n
    th = base + rng.uniform(-0.25, 0.25, n) * 2 * np.pi / n
    r = rng.uniform(r_lo, r_hi, n)
    return np.column_stack([center[0] + r * np.cos(th), center[1] + r * np.sin(th)])


def hankel1_mp(n, x):
    import mpmath
    return complex(mpmath.hankel1(n, x))
