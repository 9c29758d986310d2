"""Vectorized planar geometry kernels used by the scene and propagation code.

Segments are passed as a pair of ``(m, 2)`` arrays ``(A, B)``.  Everything
here is plain numpy; nothing knows about scatterers.
"""
from itertools import combinations

import numpy as np

_CHUNK = 1 << 20


def as_points(p):
    p = np.asarray(p, dtype=float)
    if p.ndim == 1:
        p = p[None, :]
    return p


def signed_area(vertices):
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def point_segment_distance(P, A, B):
    """Pairwise distances, shape ``(len(P), len(A))``."""
    P = as_points(P)
    AB = B - A
    L2 = np.einsum("ij,ij->i", AB, AB)
    L2 = np.where(L2 == 0.0, 1.0, L2)
    AP = P[:, None, :] - A[None, :, :]
    t = np.clip(np.einsum("nmj,mj->nm", AP, AB) / L2, 0.0, 1.0)
    D = AP - t[..., None] * AB[None, :, :]
    return np.hypot(D[..., 0], D[..., 1])


def min_distance_to_segments(P, A, B):
    """Distance from each point in ``P`` to the union of the segments."""
    P = as_points(P)
    if len(A) == 0:
        return np.full(len(P), np.inf)
    out = np.empty(len(P))
    step = max(1, _CHUNK // max(1, len(A)))
    for i in range(0, len(P), step):
        out[i:i + step] = point_segment_distance(P[i:i + step], A, B).min(axis=1)
    return out


def nearest_on_segments(P, A, B):
    """Nearest boundary point and segment index for each point of ``P``."""
    P = as_points(P)
    AB = B - A
    L2 = np.einsum("ij,ij->i", AB, AB)
    AP = P[:, None, :] - A[None, :, :]
    t = np.clip(np.einsum("nmj,mj->nm", AP, AB) / L2, 0.0, 1.0)
    Q = A[None, :, :] + t[..., None] * AB[None, :, :]
    dist = np.linalg.norm(P[:, None, :] - Q, axis=-1)
    idx = np.argmin(dist, axis=1)
    rows = np.arange(len(P))
    return Q[rows, idx], idx, dist[rows, idx]


def points_in_polygon(P, vertices):
    """Even-odd containment test; boundary points are unspecified."""
    P = as_points(P)
    V = np.asarray(vertices, dtype=float)
    x, y = P[:, 0], P[:, 1]
    inside = np.zeros(len(P), dtype=bool)
    xj, yj = V[-1]
    for xi, yi in V:
        cond = (yi > y) != (yj > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xcross = (xj - xi) * (y - yi) / (yj - yi) + xi
        inside ^= cond & (x < xcross)
        xj, yj = xi, yi
    return inside


def points_in_polygons(P, polygons):
    P = as_points(P)
    inside = np.zeros(len(P), dtype=bool)
    for poly in polygons:
        inside |= points_in_polygon(P, poly)
    return inside


def _orient(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def segments_intersect(p1, p2, q1, q2, eps=0.0):
    """True when closed segments ``p1p2`` and ``q1q2`` share a point."""
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and \
            ((d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)):
        return True
    return segment_segment_distance(p1, p2, q1, q2) <= eps


def segment_segment_distance(p1, p2, q1, q2):
    p1, p2, q1, q2 = (np.asarray(v, dtype=float) for v in (p1, p2, q1, q2))
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
        return 0.0
    A = np.array([q1, q1])
    B = np.array([q2, q2])
    a = point_segment_distance(np.array([p1, p2]), A[:1], B[:1]).ravel()
    b = point_segment_distance(np.array([q1, q2]), np.array([p1]), np.array([p2])).ravel()
    return float(min(a.min(), b.min()))


def segments_to_segments_distance(P1, P2, A, B):
    """For each query segment ``P1[i]P2[i]``, the distance to the union of ``AB``."""
    P1, P2 = as_points(P1), as_points(P2)
    if len(A) == 0:
        return np.full(len(P1), np.inf)
    out = np.empty(len(P1))
    step = max(1, _CHUNK // (4 * len(A)))
    for i in range(0, len(P1), step):
        p, q = P1[i:i + step], P2[i:i + step]
        d = np.minimum(point_segment_distance(p, A, B), point_segment_distance(q, A, B))
        d = np.minimum(d, point_segment_distance(A, p, q).T)
        d = np.minimum(d, point_segment_distance(B, p, q).T)
        # proper crossings
        r = q - p
        sAB = B - A
        cross = lambda u, v: u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
        o1 = cross(r[:, None, :], A[None, :, :] - p[:, None, :])
        o2 = cross(r[:, None, :], B[None, :, :] - p[:, None, :])
        o3 = cross(sAB[None, :, :], p[:, None, :] - A[None, :, :])
        o4 = cross(sAB[None, :, :], q[:, None, :] - A[None, :, :])
        hit = (o1 * o2 < 0) & (o3 * o4 < 0)
        d[hit] = 0.0
        out[i:i + step] = d.min(axis=1)
    return out


# --- exact suprema of distance functions --------------------------------------
#
# dist(x, S) for a finite segment set S is the lower envelope of convex
# functions.  Its maximum over a segment sits at an endpoint or where two
# pieces (vertex or supporting line) are equidistant; over a polygonal
# region it may also sit where three pieces are equidistant.


def _pieces(A, B):
    V = np.unique(np.vstack([A, B]), axis=0)
    d = B - A
    n = np.stack([d[:, 1], -d[:, 0]], axis=1)
    n /= np.linalg.norm(n, axis=1)[:, None]
    c = np.einsum("ij,ij->i", n, A)
    return V, n, c


def _real_roots_quadratic(a, b, c):
    """Roots of a*t^2 + 2*b*t + c, elementwise; returns two arrays (nan if none)."""
    a, b, c = np.broadcast_arrays(a, b, c)
    r1 = np.full(a.shape, np.nan)
    r2 = np.full(a.shape, np.nan)
    lin = np.abs(a) <= 1e-14 * (np.abs(b) + np.abs(c) + 1e-300)
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(lin & (np.abs(b) > 0), -c / (2 * b), r1)
        disc = b * b - a * c
        ok = (~lin) & (disc >= 0)
        s = np.sqrt(np.where(ok, disc, 0.0))
        r1 = np.where(ok, (-b - s) / a, r1)
        r2 = np.where(ok, (-b + s) / a, r2)
    return r1, r2


def _segment_tie_parameters(a, b, V, n, c):
    """Parameters t in [0, 1] along a->b where two pieces are equidistant."""
    w = b - a
    ts = [np.array([0.0, 1.0])]
    with np.errstate(divide="ignore", invalid="ignore"):
        if len(V) >= 2:
            i, j = np.triu_indices(len(V), 1)
            p, q = V[i], V[j]
            qp = q - p
            num = np.einsum("ij,ij->i", q, q) - np.einsum("ij,ij->i", p, p) - 2 * qp @ a
            den = 2 * qp @ w
            ts.append(num / den)
        alpha = n @ a - c
        beta = n @ w
        ap = a[None, :] - V
        for k in range(len(n)):
            qa = w @ w - beta[k] ** 2
            qb = ap @ w - alpha[k] * beta[k]
            qc = np.einsum("ij,ij->i", ap, ap) - alpha[k] ** 2
            r1, r2 = _real_roots_quadratic(qa, qb, qc)
            ts.extend([r1, r2])
        if len(n) >= 2:
            i, j = np.triu_indices(len(n), 1)
            for sgn in (1.0, -1.0):
                ts.append((sgn * alpha[j] - alpha[i]) / (beta[i] - sgn * beta[j]))
    t = np.concatenate(ts)
    t = t[np.isfinite(t)]
    return np.unique(np.clip(t, 0.0, 1.0))


def sup_distance_along_segments(XA, XB, A, B, zero_inside=None):
    """Exact ``max_{x in union[XA, XB]} dist(x, S)`` with ``S = union[A, B]``.

    ``zero_inside`` is an optional list of polygons; points inside them count
    as distance zero (distance to a filled set rather than to its boundary).
    Returns ``(value, argmax point)``.
    """
    V, n, c = _pieces(A, B)
    best, arg = -np.inf, None
    for a, b in zip(XA, XB):
        t = _segment_tie_parameters(a, b, V, n, c)
        pts = a[None, :] + t[:, None] * (b - a)[None, :]
        vals = min_distance_to_segments(pts, A, B)
        if zero_inside:
            vals = np.where(points_in_polygons(pts, zero_inside), 0.0, vals)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, arg = float(vals[k]), pts[k]
    return best, arg


def _triple_tie_points(V, n, c):
    """Points equidistant from three pieces (vertices or supporting lines)."""
    out = []
    nv, nl = len(V), len(n)
    # three vertices: circumcentres
    for i, j, k in combinations(range(nv), 3):
        M = 2 * np.array([V[j] - V[i], V[k] - V[i]])
        if abs(np.linalg.det(M)) < 1e-14:
            continue
        rhs = np.array([V[j] @ V[j] - V[i] @ V[i], V[k] @ V[k] - V[i] @ V[i]])
        out.append(np.linalg.solve(M, rhs))
    # two vertices + one line: along the perpendicular bisector
    for i, j in combinations(range(nv), 2):
        d = V[j] - V[i]
        nd = np.hypot(*d)
        if nd == 0:
            continue
        u = np.array([-d[1], d[0]]) / nd
        m = 0.5 * (V[i] + V[j])
        mp = m - V[i]
        alpha = n @ m - c
        beta = n @ u
        r1, r2 = _real_roots_quadratic(1.0 - beta ** 2, mp @ u - alpha * beta, mp @ mp - alpha ** 2)
        for r in (r1, r2):
            r = r[np.isfinite(r)]
            out.extend(m[None, :] + r[:, None] * u[None, :])
    # one vertex + two lines
    for i, j in combinations(range(nl), 2):
        Mn = np.array([n[i], n[j]])
        det = np.linalg.det(Mn)
        if abs(det) < 1e-12:
            # parallel supporting lines: equidistant set is the midline
            sigma = 1.0 if n[i] @ n[j] > 0 else -1.0
            nn = n[i]
            cm = 0.5 * (c[i] + sigma * c[j])
            r = 0.5 * abs(c[i] - sigma * c[j])
            if r == 0:
                continue
            tdir = np.array([-nn[1], nn[0]])
            base = nn * cm
            bp = base[None, :] - V
            qb = bp @ tdir
            qc = np.einsum("ij,ij->i", bp, bp) - r * r
            disc = qb * qb - qc
            ok = disc >= 0
            s = np.sqrt(disc[ok])
            for sg in (-1.0, 1.0):
                tt = -qb[ok] + sg * s
                out.extend(base[None, :] + tt[:, None] * tdir[None, :])
            continue
        Minv = np.linalg.inv(Mn)
        for s1 in (1.0, -1.0):
            for s2 in (1.0, -1.0):
                x0 = Minv @ np.array([c[i], c[j]])
                e = Minv @ np.array([s1, s2])
                xp = x0[None, :] - V
                r1, r2 = _real_roots_quadratic(e @ e - 1.0, xp @ e, np.einsum("ij,ij->i", xp, xp))
                for r in (r1, r2):
                    r = r[np.isfinite(r) & (r > 0)]
                    out.extend(x0[None, :] + r[:, None] * e[None, :])
    # three lines: incentre / excentre systems
    for i, j, k in combinations(range(nl), 3):
        for signs in ((1, 1, 1), (1, 1, -1), (1, -1, 1), (-1, 1, 1)):
            M = np.array([[n[i][0], n[i][1], -signs[0]],
                          [n[j][0], n[j][1], -signs[1]],
                          [n[k][0], n[k][1], -signs[2]]], dtype=float)
            if abs(np.linalg.det(M)) < 1e-12:
                continue
            sol = np.linalg.solve(M, np.array([c[i], c[j], c[k]]))
            out.append(sol[:2])
    if not out:
        return np.zeros((0, 2))
    return np.asarray(out, dtype=float).reshape(-1, 2)


def sup_distance_over_region(region_polys, target_polys):
    """Exact ``max_{x in region} dist(x, target)`` for filled polygon sets."""
    RA, RB = polygon_segments(region_polys)
    TA, TB = polygon_segments(target_polys)
    if len(RA) == 0:
        return 0.0, None
    if len(TA) == 0:
        return np.inf, None
    best, arg = sup_distance_along_segments(RA, RB, TA, TB, zero_inside=target_polys)
    V, n, c = _pieces(TA, TB)
    cand = _triple_tie_points(V, n, c)
    if len(cand):
        keep = points_in_polygons(cand, region_polys) & ~points_in_polygons(cand, target_polys)
        cand = cand[keep]
    if len(cand):
        vals = min_distance_to_segments(cand, TA, TB)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, arg = float(vals[k]), cand[k]
    return best, arg


def polygon_segments(polygons):
    if not polygons:
        return np.zeros((0, 2)), np.zeros((0, 2))
    A = np.vstack([np.asarray(p, dtype=float) for p in polygons])
    B = np.vstack([np.roll(np.asarray(p, dtype=float), -1, axis=0) for p in polygons])
    return A, B


def sample_polyline(A, B, pitch):
    """Points along each segment with spacing at most ``pitch`` (endpoints included)."""
    pts = []
    for a, b in zip(A, B):
        L = np.hypot(*(b - a))
        m = max(1, int(np.ceil(L / pitch)))
        t = np.linspace(0.0, 1.0, m + 1)
        pts.append(a[None, :] + t[:, None] * (b - a)[None, :])
    if not pts:
        return np.zeros((0, 2))
    return np.vstack(pts)
