"""Empirical majorants ``d <= A eta(eps)^C`` and audits of the distance relations."""
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from ..errors import FitError
from ..propagation.smallness import log_eta_from_log

EPS_CAP = 1 / (2 * math.e)
C_RANGE = (0.01, 10.0)
# log/exp round trips lose a few ulps; this keeps the majorant a true majorant
_ULP_GUARD = 1 + 1e-12


@dataclass
class ModulusFit:
    """Majorant fit of ``d`` against ``eps`` under the log law and the power law."""
    A: float
    C: float
    slack: list
    log_slack: list
    violations: int
    power_A: float
    power_c: float
    power_violations: int
    spread_eta: float
    spread_power: float
    preferred: str
    n_used: int
    n_excluded: int
    method: str = "grid-then-bounded; A = max d/law; C minimizes mean log slack"
    points: list = field(default_factory=list)

    def bound(self, eps):
        return self.A * np.exp(self.C * log_eta_from_log(np.log(eps)))

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


def _majorant(logd, logx, C):
    """Smallest ``log A`` with ``log d <= log A + C logx`` and the mean log slack."""
    logA = float(np.max(logd - C * logx))
    return logA, float(np.mean(logA + C * logx - logd))


def _fit_law(logd, logx, n_grid=400):
    grid = np.geomspace(*C_RANGE, n_grid)
    scores = [_majorant(logd, logx, C)[1] for C in grid]
    i = int(np.argmin(scores))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, n_grid - 1)]
    res = minimize_scalar(lambda C: _majorant(logd, logx, C)[1], bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-10})
    C = float(res.x) if res.fun <= scores[i] else float(grid[i])
    logA, _ = _majorant(logd, logx, C)
    A = math.exp(logA) * _ULP_GUARD
    return A, C


def _usable(records):
    used, excluded = [], 0
    for r in records:
        get = r.get if isinstance(r, dict) else (lambda k, default=None: getattr(r, k, default))
        e = get("eps")
        if isinstance(e, (list, tuple)):
            e = max(e) if e else math.nan
        d = get("d")
        failed = bool(get("failed", False))
        if failed or not (0 < e < EPS_CAP) or not (d > 0) or not math.isfinite(d):
            excluded += 1
            continue
        used.append((float(e), float(d)))
    return used, excluded


def fit_modulus(records, min_records=5):
    """Fit ``d <= A eta(eps)^C`` (and ``d <= A' eps^c'``) as majorants over the records.

    Records may be ``StabilityRecord`` objects or ``{"eps", "d"}`` dicts.
    ``eps`` is the largest near-field error over the directions.  Failed
    records, ``eps >= 1/(2e)`` and ``d = 0`` are excluded.
    """
    used, excluded = _usable(records)
    if len(used) < min_records:
        raise FitError(f"need at least {min_records} usable records, got {len(used)}")
    eps = np.array([u[0] for u in used])
    d = np.array([u[1] for u in used])
    logd, loge = np.log(d), np.log(eps)
    leta = log_eta_from_log(loge)
    A, C = _fit_law(logd, leta)
    Ap, cp = _fit_law(logd, loge)
    law = A * np.exp(C * leta)
    plaw = Ap * np.exp(cp * loge)
    log_slack = np.log(law) - logd
    spread_eta = float(np.exp(np.max(log_slack) - np.min(log_slack)))
    p_slack = np.log(plaw) - logd
    spread_power = float(np.exp(np.max(p_slack) - np.min(p_slack)))
    return ModulusFit(
        A=A, C=C, slack=(law - d).tolist(), log_slack=log_slack.tolist(),
        violations=int(np.sum(d > law)), power_A=Ap, power_c=cp, power_violations=int(np.sum(d > plaw)),
        spread_eta=spread_eta, spread_power=spread_power,
        preferred="eta" if spread_eta <= spread_power else "power",
        n_used=len(used), n_excluded=excluded,
        points=[[float(a), float(b)] for a, b in zip(eps, d)])


@dataclass
class DistanceAudit:
    violations: list
    C1: float
    C2: float
    fitted: bool
    n_used: int
    n_degenerate: int

    def to_dict(self):
        return asdict(self)


def audit_distances(records, C1=None, C2=None, rtol=1e-12):
    """Flag records violating ``C1 dhat <= dtilde <= C2 d``.

    Missing constants are fitted as the extremal ratios over the usable
    records, so re-auditing the same records finds nothing.  Pairs with any
    zero distance are excluded as degenerate.
    """
    rows, degenerate = [], 0
    for r in records:
        get = r.get if isinstance(r, dict) else (lambda k, default=None: getattr(r, k, default))
        if get("failed", False):
            continue
        d, dh, dt = float(get("d")), float(get("dhat")), float(get("dtilde"))
        if not (d > 0 and dh > 0 and dt > 0):
            degenerate += 1
            continue
        rows.append((get("pair_id"), d, dh, dt))
    fitted = C1 is None or C2 is None
    if C1 is None:
        C1 = min((dt / dh for _, _, dh, dt in rows), default=math.nan)
    if C2 is None:
        C2 = max((dt / d for _, d, _, dt in rows), default=math.nan)
    out = []
    for pid, d, dh, dt in rows:
        if C1 * dh > dt * (1 + rtol):
            out.append({"pair_id": pid, "relation": "C1*dhat <= dtilde", "ratio": dt / dh})
        if dt > C2 * d * (1 + rtol):
            out.append({"pair_id": pid, "relation": "dtilde <= C2*d", "ratio": dt / d})
    return DistanceAudit(out, float(C1), float(C2), fitted, len(rows), degenerate)
