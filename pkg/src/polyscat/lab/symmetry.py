"""One-measurement symmetry degeneracy and its two-measurement escape."""
import math
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import ParameterError
from ..helmholtz import solve
from ..propagation import flatness_indicator
from ..scene import direction_independence, symmetry_lines


@dataclass
class SymmetryReport:
    """Flatness values on the symmetry line, on a rotated line, and for a second direction."""
    line: dict
    rotated_line: dict
    rotation_deg: float
    v: list
    v2: list
    k: float
    A_sym: float
    A_rotated: float
    A2_sym: float
    cell_normal_max: float
    a0: float
    ratio_rotated: float
    ratio_second: float

    def to_dict(self):
        return asdict(self)


def _ratio(a, b):
    return math.inf if b == 0 else a / b


def symmetry_experiment(s_sym, cfg, rotation_deg=5.0, v2=None):
    """Flatness of the single-direction field on a symmetry line parallel to it.

    The first configured direction ``v`` is used.  ``v2`` defaults to the
    line's normal, the direction that sees the line best.  The cell-normal
    entry is ``max over cells of |nu_cell . v|``.
    """
    v = cfg.direction(0)
    lines = symmetry_lines(s_sym, v)
    if not lines:
        raise ParameterError("scatterer has no symmetry line parallel to the incident direction")
    pi = min(lines, key=lambda ln: abs(ln.offset))
    v2 = pi.normal.copy() if v2 is None else np.asarray(v2, dtype=float) / np.hypot(*v2)
    rot = pi.rotated(math.radians(rotation_deg))
    c1 = cfg.replace(directions=[tuple(v)])
    c2 = cfg.replace(directions=[tuple(v2)])
    u = solve(s_sym, c1, 0)
    u2 = solve(s_sym, c2, 0)
    A = flatness_indicator(u, pi, c1)
    A_rot = flatness_indicator(u, rot, c1)
    A2 = flatness_indicator(u2, pi, c2)
    cells = s_sym.cells
    cell_max = max(abs(float(c.normal @ v)) for c in cells) if cells else 0.0
    a0, _ = direction_independence([v, v2])
    return SymmetryReport(line=pi.to_dict(), rotated_line=rot.to_dict(), rotation_deg=float(rotation_deg),
                          v=v.tolist(), v2=v2.tolist(), k=float(cfg.k), A_sym=A, A_rotated=A_rot, A2_sym=A2,
                          cell_normal_max=cell_max, a0=float(a0), ratio_rotated=_ratio(A_rot, A),
                          ratio_second=_ratio(A2, A))
