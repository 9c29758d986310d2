"""Polygonal scatterers: representation, class checks, metrics and reflections."""
import json
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy import ndimage

from . import _geometry as geo
from ._io import atomic_write_text
from .errors import GenerationError, ParameterError, ValidationError

BOUNDARY_CONDITIONS = ("hard", "soft")
_DEGENERATE_TURN = 1e-9


@dataclass(frozen=True)
class ClassParams:
    h: float
    L: float
    R: float


@dataclass(frozen=True)
class Cell:
    """One flat boundary piece (a polygon edge) with its outward normal."""
    a: np.ndarray
    b: np.ndarray
    normal: np.ndarray
    polygon: int
    index: int

    @property
    def length(self):
        return float(np.hypot(*(self.b - self.a)))

    @property
    def midpoint(self):
        return 0.5 * (self.a + self.b)


class Scatterer2D:
    """Finite union of disjoint simple polygons, stored counterclockwise.

    ``polygons`` is a sequence of vertex loops; the closing edge is implicit.
    ``bc`` is ``"hard"`` (Neumann) or ``"soft"`` (Dirichlet).
    """

    def __init__(self, polygons=(), bc="hard", class_params=None, label=None):
        if bc not in BOUNDARY_CONDITIONS:
            raise ValidationError(f"unknown boundary condition {bc!r}", field="bc")
        polys = []
        for k, p in enumerate(polygons):
            v = np.array(p, dtype=float)
            if v.ndim != 2 or v.shape[1] != 2:
                raise ValidationError(f"polygon {k} is not a list of 2D points", field=f"polygons[{k}]")
            if not np.all(np.isfinite(v)):
                raise ValidationError(f"polygon {k} has non-finite coordinates", field=f"polygons[{k}]")
            if len(v) >= 3 and geo.signed_area(v) < 0:
                v = np.vstack([v[:1], v[:0:-1]])
            v.setflags(write=False)
            polys.append(v)
        self.polygons = tuple(polys)
        self.bc = bc
        self.class_params = class_params
        self.label = label

    # -- derived geometry --------------------------------------------------
    @property
    def is_empty(self):
        return len(self.polygons) == 0

    @property
    def vertices(self):
        if self.is_empty:
            return np.zeros((0, 2))
        return np.vstack(self.polygons)

    def segments(self):
        return geo.polygon_segments(list(self.polygons))

    @property
    def cells(self):
        out = []
        for k, p in enumerate(self.polygons):
            for i in range(len(p)):
                a, b = p[i], p[(i + 1) % len(p)]
                d = b - a
                nrm = np.hypot(*d)
                nu = np.array([d[1], -d[0]]) / nrm if nrm > 0 else np.zeros(2)
                out.append(Cell(a, b, nu, k, i))
        return out

    def distance(self, points):
        """Distance from points to the boundary."""
        A, B = self.segments()
        return geo.min_distance_to_segments(points, A, B)

    def contains(self, points):
        return geo.points_in_polygons(points, list(self.polygons))

    def distance_to_set(self, points):
        """Distance to the filled scatterer (zero inside)."""
        d = self.distance(points)
        return np.where(self.contains(points), 0.0, d)

    @property
    def radius(self):
        if self.is_empty:
            return 0.0
        return float(np.max(np.linalg.norm(self.vertices, axis=1)))

    @property
    def h(self):
        if self.class_params is not None:
            return self.class_params.h
        return min(c.length for c in self.cells) if not self.is_empty else math.inf

    def with_polygons(self, polygons):
        return Scatterer2D(polygons, bc=self.bc, class_params=self.class_params, label=self.label)

    def transformed(self, matrix=None, offset=(0.0, 0.0)):
        M = np.eye(2) if matrix is None else np.asarray(matrix, dtype=float)
        off = np.asarray(offset, dtype=float)
        return self.with_polygons([p @ M.T + off for p in self.polygons])

    def __eq__(self, other):
        if not isinstance(other, Scatterer2D):
            return NotImplemented
        return (self.bc == other.bc and len(self.polygons) == len(other.polygons)
                and all(p.shape == q.shape and np.array_equal(p, q)
                        for p, q in zip(self.polygons, other.polygons)))

    def __hash__(self):
        return hash((self.bc, tuple(p.tobytes() for p in self.polygons)))

    def __repr__(self):
        sizes = ",".join(str(len(p)) for p in self.polygons)
        return f"Scatterer2D(bc={self.bc!r}, polygons=[{sizes}])"


# -- scene files ---------------------------------------------------------------

def scene_from_dict(data):
    if not isinstance(data, dict):
        raise ValidationError("scene must be a JSON object", field="<root>")
    if "polygons" not in data:
        raise ValidationError("missing field 'polygons'", field="polygons")
    polys = data["polygons"]
    if not isinstance(polys, list):
        raise ValidationError("'polygons' must be a list", field="polygons")
    for k, p in enumerate(polys):
        if not isinstance(p, list) or not all(
                isinstance(q, (list, tuple)) and len(q) == 2
                and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in q) for q in p):
            raise ValidationError(f"polygon {k} must be a list of [x, y] pairs", field=f"polygons[{k}]")
    bc = data.get("bc", "hard")
    if bc not in BOUNDARY_CONDITIONS:
        raise ValidationError(f"'bc' must be 'hard' or 'soft', got {bc!r}", field="bc")
    cls = data.get("class")
    params = None
    if cls is not None:
        if not isinstance(cls, dict):
            raise ValidationError("'class' must be an object", field="class")
        try:
            params = ClassParams(float(cls["h"]), float(cls["L"]), float(cls["R"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"'class' needs numeric h, L, R ({exc})", field="class") from exc
    return Scatterer2D(polys, bc=bc, class_params=params)


def scene_to_dict(s):
    out = {"polygons": [p.tolist() for p in s.polygons], "bc": s.bc}
    if s.class_params is not None:
        cp = s.class_params
        out["class"] = {"h": cp.h, "L": cp.L, "R": cp.R}
    return out


def load_scene(path):
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed JSON: {exc}", field="<json>") from exc
    return scene_from_dict(data)


def dump_scene(s, path):
    atomic_write_text(path, json.dumps(scene_to_dict(s), indent=1))


# -- class validation -----------------------------------------------------------

@dataclass
class ClassReport:
    passed: bool
    violations: list = field(default_factory=list)
    h_actual: float = math.inf
    L_actual: float = 0.0
    R_actual: float = 0.0

    def conditions(self):
        return sorted({v[0] for v in self.violations})

    def raise_if_failed(self):
        if not self.passed:
            msg = "; ".join(f"{c}: {d}" for c, d in self.violations)
            raise ValidationError(f"scatterer not admissible: {msg}", report=self)


def vertex_turns(vertices):
    """Signed turning angle at each vertex of a closed loop."""
    v = np.asarray(vertices, dtype=float)
    e_in = v - np.roll(v, 1, axis=0)
    e_out = np.roll(v, -1, axis=0) - v
    cross = e_in[:, 0] * e_out[:, 1] - e_in[:, 1] * e_out[:, 0]
    dot = np.einsum("ij,ij->i", e_in, e_out)
    return np.arctan2(cross, dot)


def validate_scatterer(s, h, L, R):
    """Check membership of ``s`` in the polygonal class with constants (h, L, R)."""
    viol = []
    if s.is_empty:
        viol.append(("nonempty", "scatterer has no polygons"))
        return ClassReport(False, viol)
    h_act, L_act = math.inf, 0.0
    for k, p in enumerate(s.polygons):
        if len(p) < 3:
            viol.append(("vertex_count", f"polygon {k} has {len(p)} vertices"))
            continue
        edges = np.roll(p, -1, axis=0) - p
        lengths = np.hypot(edges[:, 0], edges[:, 1])
        for i in np.flatnonzero(lengths <= 1e-12):
            viol.append(("degenerate_vertex", f"polygon {k} vertex {i} repeated"))
        h_act = min(h_act, float(lengths.min()))
        turns = vertex_turns(p)
        for i in np.flatnonzero(np.abs(turns) <= _DEGENERATE_TURN):
            if lengths[i] > 1e-12 and lengths[i - 1] > 1e-12:
                viol.append(("degenerate_vertex", f"polygon {k} vertex {i} is collinear with its neighbours"))
        with np.errstate(over="ignore"):
            slopes = np.tan(np.abs(turns) / 2.0)
        L_act = max(L_act, float(np.max(slopes)))
        n = len(p)
        for i, j in combinations(range(n), 2):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if geo.segments_intersect(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n]):
                viol.append(("simple", f"polygon {k} edges {i} and {j} intersect"))
    for (k1, p1), (k2, p2) in combinations(enumerate(s.polygons), 2):
        A1, B1 = geo.polygon_segments([p1])
        A2, B2 = geo.polygon_segments([p2])
        gap = min(geo.segment_segment_distance(a, b, c, d)
                  for a, b in zip(A1, B1) for c, d in zip(A2, B2))
        if gap <= 0.0:
            viol.append(("disjoint", f"polygons {k1} and {k2} intersect"))
        elif geo.points_in_polygon(p1[:1], p2)[0] or geo.points_in_polygon(p2[:1], p1)[0]:
            viol.append(("exterior_connected", f"polygons {k1} and {k2} are nested"))
    if h_act < h:
        viol.append(("edge_length", f"shortest edge {h_act:.6g} < h={h:.6g}"))
    if L_act > L:
        viol.append(("lipschitz", f"max boundary slope {L_act:.6g} > L={L:.6g}"))
    R_act = s.radius
    if R_act > R:
        viol.append(("radius", f"vertex at distance {R_act:.6g} > R={R:.6g}"))
    return ClassReport(not viol, viol, h_act, L_act, R_act)


# -- metrics --------------------------------------------------------------------

@dataclass(frozen=True)
class DistanceTriple:
    """``d`` one-sided boundary distance, ``dhat``/``dtilde`` Hausdorff of boundaries/sets."""
    d: float
    dhat: float
    dtilde: float
    d_sampling_error: float = 0.0


def _one_sided_d(s1, s2, pitch):
    A, B = s1.segments()
    pts = geo.sample_polyline(A, B, pitch)
    vals = s2.distance_to_set(pts)
    return float(vals.max()) if len(vals) else 0.0


def boundary_hausdorff(s1, s2):
    """Exact Hausdorff distance between the two boundaries."""
    A1, B1 = s1.segments()
    A2, B2 = s2.segments()
    return max(geo.sup_distance_along_segments(A1, B1, A2, B2)[0],
               geo.sup_distance_along_segments(A2, B2, A1, B1)[0])


def distance_triple(s1, s2, resolution=1e-3):
    """Distances between two scatterers.

    ``dhat`` and ``dtilde`` are exact for polygons.  ``d`` is the largest
    distance from a boundary point of one scatterer lying outside the other
    to that other's boundary, evaluated on samples of pitch ``resolution``;
    the true value exceeds the returned one by at most ``d_sampling_error``.
    """
    if not resolution > 0:
        raise ParameterError(f"resolution must be positive, got {resolution}")
    if s1.is_empty or s2.is_empty:
        raise ParameterError("distance_triple needs two non-empty scatterers")
    P1, P2 = list(s1.polygons), list(s2.polygons)
    A1, B1 = s1.segments()
    A2, B2 = s2.segments()
    dh12, _ = geo.sup_distance_along_segments(A1, B1, A2, B2)
    dh21, _ = geo.sup_distance_along_segments(A2, B2, A1, B1)
    dt12, _ = geo.sup_distance_over_region(P1, P2)
    dt21, _ = geo.sup_distance_over_region(P2, P1)
    d = max(_one_sided_d(s1, s2, resolution), _one_sided_d(s2, s1, resolution))
    return DistanceTriple(d, max(dh12, dh21), max(dt12, dt21), 0.5 * resolution)


# -- reflections --------------------------------------------------------------

class HyperplaneLine:
    """The line ``{x : normal . (x - point) = 0}`` with unit normal."""

    def __init__(self, point, normal):
        nu = np.asarray(normal, dtype=float)
        n = np.hypot(*nu)
        if n == 0:
            raise ParameterError("line normal must be nonzero")
        self.normal = nu / n
        self.point = np.asarray(point, dtype=float)

    @classmethod
    def through(cls, p, q):
        p, q = np.asarray(p, float), np.asarray(q, float)
        d = q - p
        return cls(p, (-d[1], d[0]))

    @property
    def offset(self):
        return float(self.normal @ self.point)

    @property
    def direction(self):
        return np.array([-self.normal[1], self.normal[0]])

    def signed_distance(self, x):
        return (geo.as_points(x) - self.point) @ self.normal

    def rotated(self, angle, about=None):
        c, s = math.cos(angle), math.sin(angle)
        nu = np.array([c * self.normal[0] - s * self.normal[1], s * self.normal[0] + c * self.normal[1]])
        return HyperplaneLine(self.point if about is None else about, nu)

    def to_dict(self):
        return {"point": self.point.tolist(), "normal": self.normal.tolist()}

    def __repr__(self):
        return f"HyperplaneLine(normal={self.normal.tolist()}, offset={self.offset:.6g})"


def _reflect_points(x, pi):
    x = np.asarray(x, dtype=float)
    d = (x - pi.point) @ pi.normal
    return x - 2.0 * d[..., None] * pi.normal if x.ndim > 1 else x - 2.0 * d * pi.normal


def reflect(g, pi):
    """Mirror a point, point array, polygon or scatterer across ``pi``.

    Polygon vertex order is reversed after the mirror so orientation stays
    counterclockwise; vertex 0 maps to the image of vertex 0.
    """
    if isinstance(g, Scatterer2D):
        return g.with_polygons([reflect_polygon(p, pi) for p in g.polygons])
    return _reflect_points(g, pi)


def reflect_polygon(vertices, pi):
    m = _reflect_points(np.asarray(vertices, dtype=float), pi)
    return np.vstack([m[:1], m[:0:-1]])


def symmetry_lines(s, v, tol=1e-9):
    """Lines parallel to ``v`` (normal orthogonal to ``v``) that map ``s`` to itself."""
    v = np.asarray(v, dtype=float)
    if abs(np.hypot(*v) - 1.0) > 1e-9:
        raise ParameterError("v must be a unit vector")
    if s.is_empty:
        return []
    nu = np.array([-v[1], v[0]])
    V = s.vertices
    proj = V @ nu
    along = V @ v
    cands = list(proj)
    for i, j in combinations(range(len(V)), 2):
        if abs(along[i] - along[j]) <= 2 * tol + 1e-12:
            cands.append(0.5 * (proj[i] + proj[j]))
    cands.extend(c.midpoint @ nu for c in s.cells)
    cands = np.sort(np.asarray(cands))
    uniq = [cands[0]]
    for c in cands[1:]:
        if c - uniq[-1] > 1e-12:
            uniq.append(c)
    A, B = s.segments()
    found = []
    for c in uniq:
        line = HyperplaneLine(c * nu, nu)
        # cheap necessary test on vertices before the exact check
        mv = _reflect_points(V, line)
        if geo.min_distance_to_segments(mv, A, B).max() > tol + 1e-12:
            continue
        mirrored = reflect(s, line)
        MA, MB = mirrored.segments()
        dist = max(geo.sup_distance_along_segments(A, B, MA, MB)[0],
                   geo.sup_distance_along_segments(MA, MB, A, B)[0])
        if dist <= tol:
            if found and abs(found[-1][0].offset - c) <= tol:
                if dist < found[-1][1]:
                    found[-1] = (line, dist)
                continue
            found.append((line, dist))
    return [f[0] for f in found]


# -- exterior connectedness ---------------------------------------------------

@dataclass(frozen=True)
class ConnectednessSample:
    t: float
    delta: float
    pitch: float


@dataclass
class ConnectednessProfile:
    samples: list

    @property
    def t(self):
        return np.array([s.t for s in self.samples])

    @property
    def delta(self):
        return np.array([s.delta for s in self.samples])


def exterior_connectedness(s, t, span, pitch=None):
    """Grid estimate of the corridor width that keeps t-deep exterior points connected."""
    if not t > 0:
        raise ParameterError("t must be positive")
    if t > span:
        raise ParameterError(f"t={t} exceeds the span radius {span}")
    pitch = t / 64.0 if pitch is None else min(pitch, t / 64.0)
    if s.is_empty:
        return ConnectednessSample(t, t, pitch)
    n = int(math.ceil(2 * span / pitch)) + 1
    xs = np.linspace(-span, span, n)
    pitch = float(xs[1] - xs[0])
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    disc = (X ** 2 + Y ** 2 <= span ** 2).ravel()
    dist = np.zeros(len(pts))
    inside = s.contains(pts[disc])
    dd = s.distance(pts[disc])
    dist[disc] = np.where(inside, 0.0, dd)
    dist = dist.reshape(n, n)
    disc = disc.reshape(n, n)
    target = disc & (dist >= t)
    if not target.any():
        return ConnectednessSample(t, t, pitch)

    def connected(width):
        lab, _ = ndimage.label(disc & (dist >= width))
        ids = np.unique(lab[target])
        return len(ids) == 1 and ids[0] != 0

    lo, hi = 0, int(math.floor(t / pitch))
    if connected(hi * pitch):
        return ConnectednessSample(t, min(t, hi * pitch), pitch)
    if not connected(0.0):
        return ConnectednessSample(t, 0.0, pitch)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if connected(mid * pitch):
            lo = mid
        else:
            hi = mid
    return ConnectednessSample(t, lo * pitch, pitch)


def connectedness_profile(s, ts, span, pitch=None):
    return ConnectednessProfile([exterior_connectedness(s, t, span, pitch) for t in ts])


# -- perturbations --------------------------------------------------------------

PERTURBATION_MODES = ("vertex-jitter", "notch", "bump")


def _v_feature(poly, edge, center, half_width, depth, outward):
    p = np.asarray(poly, dtype=float)
    a, b = p[edge], p[(edge + 1) % len(p)]
    d = b - a
    ell = np.hypot(*d)
    u = d / ell
    nu = np.array([u[1], -u[0]])
    sgn = 1.0 if outward else -1.0
    P = a + (center - half_width) * u
    Q = a + center * u + sgn * depth * nu
    S = a + (center + half_width) * u
    return np.vstack([p[:edge + 1], P, Q, S, p[edge + 1:]])


def nominal_class(s):
    """The attached class, or a default one: half the shortest edge, measured slope, radius."""
    if s.class_params is not None:
        return s.class_params
    rep = validate_scatterer(s, 0.0, math.inf, math.inf)
    return ClassParams(rep.h_actual / 2, max(rep.L_actual, 1.0), s.radius)


def perturb(s, magnitude, mode="vertex-jitter", seed=0, max_retries=100):
    """Seeded random perturbation of size ``magnitude`` that stays in a relaxed class."""
    if mode not in PERTURBATION_MODES:
        raise ParameterError(f"unknown perturbation mode {mode!r}")
    if magnitude < 0:
        raise ParameterError("magnitude must be nonnegative")
    if magnitude == 0:
        return s
    cp = nominal_class(s)
    if mode == "vertex-jitter" and magnitude >= cp.h / 4:
        raise ParameterError(f"vertex-jitter magnitude {magnitude} must be < h/4 = {cp.h / 4}")
    rng = np.random.default_rng(seed)
    relaxed = (cp.h / 2, 2 * cp.L, cp.R + magnitude)
    for _ in range(max_retries):
        if mode == "vertex-jitter":
            polys = []
            for p in s.polygons:
                phi = rng.uniform(0, 2 * np.pi, len(p))
                polys.append(p + magnitude * np.column_stack([np.cos(phi), np.sin(phi)]))
        else:
            cells = s.cells
            c = cells[int(rng.integers(len(cells)))]
            hw = max(magnitude, math.sqrt(max(0.0, (relaxed[0]) ** 2 - magnitude ** 2)))
            lo, hi = relaxed[0] + hw, c.length - relaxed[0] - hw
            if hi < lo:
                continue
            center = rng.uniform(lo, hi)
            polys = list(s.polygons)
            polys[c.polygon] = _v_feature(polys[c.polygon], c.index, center, hw, magnitude,
                                          outward=(mode == "bump"))
        out = s.with_polygons(polys)
        if not validate_scatterer(out, *relaxed).passed:
            continue
        dh = boundary_hausdorff(s, out)
        if magnitude / 4 <= dh <= 4 * magnitude:
            return out
    raise GenerationError(f"no valid {mode} perturbation of size {magnitude} after {max_retries} tries")


# -- incident directions --------------------------------------------------------

def direction_independence(dirs):
    """``min over unit nu of max_j |v_j . nu|`` and whether the directions span the plane."""
    V = np.atleast_2d(np.asarray(dirs, dtype=float))
    th = np.arctan2(V[:, 1], V[:, 0])
    cands = [th + np.pi / 2]
    for i, j in combinations(range(len(th)), 2):
        m = 0.5 * (th[i] + th[j])
        cands.append(np.array([m, m + np.pi / 2]))
    cands = np.concatenate(cands)
    nu = np.column_stack([np.cos(cands), np.sin(cands)])
    a0 = float(np.min(np.max(np.abs(nu @ V.T), axis=1)))
    if a0 < 1e-12:
        return 0.0, False
    return a0, True
