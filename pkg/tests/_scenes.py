"""Random scenes shared by the chain tests and the acceptance suite."""
import math

import numpy as np

from _oracles import random_star_polygon
from polyscat.scene import Scatterer2D


def random_scene(rng, max_polygons=3):
    """One to three disjoint star-shaped obstacles inside the disc of radius 4."""
    polys = []
    target = int(rng.integers(1, max_polygons + 1))
    for _ in range(200):
        if len(polys) == target:
            break
        c = rng.uniform(-2.5, 2.5, 2)
        scale = rng.uniform(0.5, 1.2)
        p = random_star_polygon(rng, center=c, r_lo=0.6 * scale, r_hi=scale)
        # keep a clear gap between obstacles so the exterior stays roomy
        if all(np.min(np.linalg.norm(p[:, None] - q[None], axis=-1)) > 1.0 for q in polys) \
                and all(np.linalg.norm(c - q.mean(0)) > 2.6 for q in polys):
            polys.append(p)
    return Scatterer2D(polys)


def boundary_target(s, rng, d):
    """A point at distance ``d`` from the middle of a random edge, plus that distance."""
    cells = s.cells
    c = cells[int(rng.integers(len(cells)))]
    x1 = c.midpoint + d * c.normal
    return x1, float(s.distance_to_set(x1[None])[0])


def far_start(rng, radius=9.0):
    a = rng.uniform(0, 2 * math.pi)
    return np.array([radius * math.cos(a), radius * math.sin(a)])
