"""Regular chains of balls in the exterior of a polygonal scatterer.

A chain ``B_{rho_i}(z_i)`` is regular with constants ``a1 < a2 < a3 < 1 < a4``
when every ``B_{a4 rho_i}(z_i)`` misses the obstacle, radii never increase,
and each shrunken ball ``B_{a1 rho_i}(z_i)`` sits inside ``B_{a2 rho_{i-1}}``
of its predecessor and inside ``B_{a3 rho_{i+1}}`` of its successor.
"""
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import shortest_path
from shapely.geometry import Polygon
from shapely.ops import unary_union

from .. import _geometry as geo
from .._io import atomic_write_text
from ..errors import ParameterError, RoutingError

DEFAULT_CONSTANTS = (0.2, 0.5, 0.8, 8.0)
ROUTE_MARGIN = 1.1        # clearance margin at the corridor's end points
CORRIDOR_FLOOR = 64.0      # narrowest corridor radius, as a fraction of the preferred one


def _check_constants(a):
    a = tuple(float(x) for x in a)
    if len(a) != 4 or not (0 < a[0] < a[1] < a[2] < 1 < a[3]):
        raise ParameterError(f"chain constants must satisfy 0 < a1 < a2 < a3 < 1 < a4, got {a}")
    return a


@dataclass
class BallChain:
    centers: np.ndarray
    radii: np.ndarray
    constants: tuple = DEFAULT_CONSTANTS
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        self.radii = np.atleast_1d(np.asarray(self.radii, dtype=float))
        self.constants = _check_constants(self.constants)
        if len(self.centers) != len(self.radii):
            raise ParameterError("centers and radii differ in length")

    def __len__(self):
        return len(self.radii)

    @property
    def n0(self):
        """Index of the last ball (number of steps)."""
        return len(self) - 1

    def to_list(self):
        return [{"z": [float(z[0]), float(z[1])], "rho": float(r)} for z, r in zip(self.centers, self.radii)]

    def dump(self, path):
        atomic_write_text(path, json.dumps(self.to_list(), indent=1))

    @classmethod
    def from_list(cls, items, constants=DEFAULT_CONSTANTS):
        try:
            z = [item["z"] for item in items]
            r = [item["rho"] for item in items]
        except (KeyError, TypeError) as exc:
            raise ParameterError("chain entries need 'z' and 'rho'") from exc
        return cls(np.array(z, dtype=float), np.array(r, dtype=float), constants)

    @classmethod
    def load(cls, path, constants=DEFAULT_CONSTANTS):
        with open(path, encoding="utf-8") as fh:
            return cls.from_list(json.load(fh), constants)


# -- obstacle bookkeeping --------------------------------------------------

class Obstacle:
    """Scatterer polygons plus optional extra barrier polygons."""

    def __init__(self, s, barriers=()):
        polys = [np.asarray(p, dtype=float) for p in (s.polygons if s is not None else ())]
        polys += [np.asarray(p, dtype=float) for p in barriers]
        self.polygons = polys
        self.A, self.B = geo.polygon_segments(polys) if polys else (np.zeros((0, 2)), np.zeros((0, 2)))

    @property
    def empty(self):
        return len(self.polygons) == 0

    def clearance(self, P):
        P = geo.as_points(P)
        if self.empty:
            return np.full(len(P), np.inf)
        d = geo.min_distance_to_segments(P, self.A, self.B)
        return np.where(geo.points_in_polygons(P, self.polygons), 0.0, d)

    def segment_clearance(self, P, Q):
        if self.empty:
            return np.full(len(geo.as_points(P)), np.inf)
        d = geo.segments_to_segments_distance(P, Q, self.A, self.B)
        inside = geo.points_in_polygons(geo.as_points(P), self.polygons)
        return np.where(inside, 0.0, d)

    def nearest(self, x):
        q, _, dist = geo.nearest_on_segments(geo.as_points(x), self.A, self.B)
        return q[0], float(dist[0])


# -- regularity ------------------------------------------------------------

@dataclass(frozen=True)
class Regularity:
    regular: bool
    index: int = -1
    clause: str = ""
    detail: str = ""

    def __bool__(self):
        return self.regular


def chain_is_regular(c, s, barriers=(), rtol=1e-12):
    """Exact check of both regularity clauses; reports the first violation.

    Clause ``(i)`` compares the distance from each center to the obstacle
    with ``a4 rho``; clause ``(ii)`` checks radii monotonicity and the two
    ball inclusions via ``|z_i - z_j| + a1 rho_i <= a rho_j``.
    """
    if len(c) == 0:
        raise ParameterError("chain is empty")
    a1, a2, a3, a4 = c.constants
    obs = Obstacle(s, barriers)
    z, r = c.centers, c.radii
    clear = obs.clearance(z)
    scale = max(1.0, float(np.max(np.abs(z))))
    tol = rtol * scale
    for i in range(len(c)):
        if r[i] <= 0:
            return Regularity(False, i, "i", "nonpositive radius")
        if clear[i] < a4 * r[i] - tol:
            return Regularity(False, i, "i", f"clearance {clear[i]:.6g} < a4*rho = {a4 * r[i]:.6g}")
        if i >= 1:
            if r[i] > r[i - 1] * (1 + rtol):
                return Regularity(False, i, "ii", f"radius {r[i]:.6g} exceeds predecessor {r[i - 1]:.6g}")
            gap = np.hypot(*(z[i] - z[i - 1]))
            if gap + a1 * r[i] > a2 * r[i - 1] + tol:
                return Regularity(False, i, "ii", "B(a1 rho_i) not inside B(a2 rho_{i-1})")
        if i + 1 < len(c):
            gap = np.hypot(*(z[i] - z[i + 1]))
            if gap + a1 * r[i] > a3 * r[i + 1] + tol:
                return Regularity(False, i, "ii", "B(a1 rho_i) not inside B(a3 rho_{i+1})")
    return Regularity(True)


# -- routing ---------------------------------------------------------------

def _route(obs, start, goal, clearance):
    """Shortest polyline from ``start`` to ``goal`` keeping ``clearance``.

    Nodes are vertices of the obstacle buffered slightly beyond the
    clearance; every visibility edge is validated by exact segment distance.
    """
    start, goal = np.asarray(start, float), np.asarray(goal, float)
    for name, p in (("start", start), ("goal", goal)):
        if obs.clearance(p)[0] < clearance * (1 - 1e-12):
            raise RoutingError(f"{name} point has clearance below {clearance:.4g}", pinch_point=tuple(p))
    if obs.empty or obs.segment_clearance(start[None], goal[None])[0] >= clearance:
        return np.array([start, goal])
    shape = unary_union([Polygon(p) for p in obs.polygons]).buffer(clearance * 1.03, quad_segs=8)
    geoms = getattr(shape, "geoms", [shape])
    nodes = [start, goal]
    for g in geoms:
        for ring in [g.exterior, *g.interiors]:
            nodes.extend(np.asarray(ring.coords)[:-1])
    nodes = np.array(nodes)
    keep = obs.clearance(nodes) >= clearance
    keep[:2] = True
    nodes = nodes[keep]
    n = len(nodes)
    I, J = np.triu_indices(n, 1)
    ok = obs.segment_clearance(nodes[I], nodes[J]) >= clearance
    W = np.zeros((n, n))
    L = np.hypot(*(nodes[J[ok]] - nodes[I[ok]]).T)
    W[I[ok], J[ok]] = L
    W[J[ok], I[ok]] = L
    dist, pred = shortest_path(W, directed=False, indices=0, return_predecessors=True)
    if not np.isfinite(dist[1]):
        # the narrowest spot on the straight line is the most useful hint
        P = start + np.linspace(0, 1, 512)[:, None] * (goal - start)
        pinch = P[np.argmin(obs.clearance(P))]
        raise RoutingError(f"no exterior path with clearance {clearance:.4g}; pinched near "
                           f"({pinch[0]:.4g}, {pinch[1]:.4g})", pinch_point=tuple(pinch))
    path = [1]
    while path[-1] != 0:
        path.append(pred[path[-1]])
    return nodes[path[::-1]]


def _discretize(path, step):
    pts = [path[0]]
    for p, q in zip(path[:-1], path[1:]):
        m = max(1, math.ceil(np.hypot(*(q - p)) / step * (1 + 1e-12)))
        t = np.arange(1, m + 1) / m
        pts.extend(p + t[:, None] * (q - p))
    return np.array(pts)


def _shrink_radii(r_from, r_to, ratio):
    """Co-centred radii from ``r_from`` down to ``r_to`` with step ratio >= ``ratio``."""
    out = []
    r = r_from
    while r > r_to * (1 + 1e-12):
        r = max(r * ratio, r_to)
        out.append(r)
    return out


def tail_ratio(c, constants):
    """Smallest admissible ratio ``b`` for a cone tail with ``rho = c t``."""
    a1, a2, a3, _ = constants
    return max((1 - a2 * c) / (1 - a1 * c), (1 + a1 * c) / (1 + a3 * c))


def build_chain(s, x0, x1, d=None, constants=DEFAULT_CONSTANTS, rho0=None, barriers=(), R=None,
                grid_ratio=1.01):
    """Regular chain from ``x0`` (radius ``rho0``) to ``x1`` near the obstacle.

    The route is a constant-radius corridor with step ``rho/4`` along the
    shortest exterior path, then co-centred shrinking, then a cone tail
    ``z = y1 + t e``, ``rho = c t`` with ``t`` decreasing geometrically toward
    the foot point ``y1`` of ``x1``.  The last ball is centred at ``x1`` with
    radius ``s0 d``.  ``barriers`` are extra polygons that the balls must
    also avoid.
    """
    a = _check_constants(constants)
    a1, a2, a3, a4 = a
    obs = Obstacle(s, barriers)
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    clear0 = float(obs.clearance(x0)[0])
    if obs.empty:
        rho0 = 1.0 if rho0 is None else float(rho0)
        if not rho0 > 0:
            raise ParameterError(f"rho0 must be positive, got {rho0}")
        path = np.array([x0, x1])
        z = _discretize(path, rho0 / 4)
        r = np.full(len(z), rho0)
        d = float(d) if d is not None else float("nan")
        info = {"n_corridor": len(z), "n_shrink": 0, "n_tail": 0, "b": None, "c": None,
                "s0": rho0 / d if d and d > 0 else None, "kappa": 0.0, "kappa_prime": float(len(z) - 1)}
        return BallChain(z, r, a, info)
    y1, dist1 = obs.nearest(x1)
    if obs.clearance(x1)[0] <= 0:
        raise ParameterError("x1 lies on or inside the obstacle")
    if d is None:
        d = dist1
    elif abs(d - dist1) > 1e-9 * max(1.0, dist1):
        raise ParameterError(f"d={d} does not match dist(x1, obstacle)={dist1}")
    if clear0 <= 0:
        raise ParameterError("x0 lies on or inside the obstacle")
    if rho0 is None:
        rho0 = clear0 / 16
    rho0 = float(rho0)
    if not rho0 > 0:
        raise ParameterError(f"rho0 must be positive, got {rho0}")
    if clear0 < 16 * rho0 * (1 - 1e-12):
        raise ParameterError(f"need dist(x0, obstacle) >= 16 rho0 ({clear0:.4g} < {16 * rho0:.4g})")
    if R is None:
        R = s.class_params.R if getattr(s, "class_params", None) is not None else max(s.radius, 1.0)
    e = (x1 - y1) / d

    # tail start: first point on the ray with corridor clearance, scanning outward
    t_max = d + np.hypot(*(x0 - x1)) + 4 * R
    m = max(2, int(math.ceil(math.log(t_max / d) / math.log(grid_ratio))) + 1)
    T = d * grid_ratio ** np.arange(m)
    H = obs.clearance(y1[None, :] + T[:, None] * e[None, :])
    q = H / T
    # the tail start keeps a margin over the corridor clearance so routes can leave it
    good = np.nonzero(H >= ROUTE_MARGIN * a4 * rho0)[0]
    blocked = np.nonzero(q < 1e-3)[0]
    stop = blocked[0] if len(blocked) else m
    if len(good) and good[0] < stop:
        i0 = int(good[0])
        rho_c = rho0
    else:
        i0 = int(np.argmax(H[:stop]))
        rho_c = min(rho0, H[i0] / (ROUTE_MARGIN * a4))
    t0 = float(T[i0])
    # rigorous lower bound of dist/t between grid points (dist is 1-Lipschitz)
    qs = q[:i0 + 1]
    q_lb = float(np.min((qs - (grid_ratio - 1)) / grid_ratio)) if i0 > 0 else float(q[0])
    q_lb = min(q_lb, float(np.min(qs)))
    if q_lb <= 0:
        raise RoutingError("cone toward x1 has no clearance", pinch_point=tuple(y1 + t0 * e))
    p_t0 = y1 + t0 * e

    if np.any(p_t0 != x0):
        # constant radius while clearance permits; narrow passages halve it, down to a floor
        rho_floor = rho_c / CORRIDOR_FLOOR
        while True:
            try:
                path = _route(obs, x0, p_t0, a4 * rho_c)
                break
            except RoutingError:
                if rho_c / 2 < rho_floor * (1 - 1e-12):
                    raise
                rho_c /= 2
        corridor = _discretize(path, rho_c / 4)
    else:
        corridor = x0[None]
    c = min(q_lb, 1.0) / a4 * 0.999
    last = None
    for _attempt in range(30):
        shrink0 = _shrink_radii(rho0, rho_c, a1 / a3 * (1 + 1e-9))
        z = [x0] * (1 + len(shrink0))
        r = [rho0] + shrink0
        z.extend(corridor[1:])
        r.extend([rho_c] * (len(corridor) - 1))
        n_nontail = len(z)
        b = tail_ratio(c, a)
        if t0 > d * (1 + 1e-12):
            rt = min(c * t0, rho_c)
            sh = _shrink_radii(rho_c, rt, a1 / a3 * (1 + 1e-9))
            z.extend([p_t0] * len(sh))
            r.extend(sh)
            n_nontail = len(z)
            n_tail = max(1, math.ceil(math.log(t0 / d) / math.log(1 / b) - 1e-12))
            bb = (d / t0) ** (1.0 / n_tail)
            ts = t0 * bb ** np.arange(1, n_tail + 1)
            ts[-1] = d
            z.extend(y1 + ts[:, None] * e[None, :])
            r.extend(c * ts)
        else:
            sh = _shrink_radii(rho_c, min(c * d, rho_c), a1 / a3 * (1 + 1e-9))
            z.extend([x1] * len(sh))
            r.extend(sh)
            n_tail = 0
        chain = BallChain(np.array(z), np.array(r), a)
        chain.centers[-1] = x1
        reg = chain_is_regular(chain, s, barriers)
        if reg:
            kappa = 1.0 / math.log(1.0 / b)
            kappa_p = (len(chain) - 1 - n_tail) + 1 + kappa * max(0.0, math.log(t0 / (2 * math.e * R)))
            chain.info = {"n_corridor": len(corridor), "n_shrink": n_nontail - len(corridor),
                          "n_tail": n_tail, "b": b, "c": c, "s0": float(chain.radii[-1] / d),
                          "t0": t0, "rho_corridor": rho_c, "kappa": kappa, "kappa_prime": kappa_p,
                          "foot": [float(y1[0]), float(y1[1])]}
            return chain
        last = reg
        c *= 0.5
    raise RoutingError(f"could not build a regular chain ({last.clause} at ball {last.index}: {last.detail})",
                       pinch_point=tuple(chain.centers[max(last.index, 0)]))
