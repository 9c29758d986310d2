"""Exponent ledger, propagation of smallness along a chain, stability moduli.

Everything is carried in the log domain: ``Gamma_n`` decays like ``2^-n`` and
``eps^Gamma`` or ``eta(eps)`` underflow long before they become meaningless.
"""
import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .._io import atomic_write_text
from ..errors import ParameterError


@dataclass(frozen=True)
class ExponentLedger:
    """``B_n = sum_r prod_{i=r..n} beta_i`` and ``Gamma_n = prod_{i<=n} beta_i``."""
    betas: np.ndarray
    B: np.ndarray
    log_gamma: np.ndarray

    @property
    def gamma(self):
        return np.exp(self.log_gamma)

    def __len__(self):
        return len(self.betas)

    def rows(self):
        return [(i, float(b), float(B), float(g)) for i, (b, B, g)
                in enumerate(zip(self.betas, self.B, self.gamma))]

    def to_csv(self, path):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["i", "beta", "B", "Gamma"])
        for i, b, B, g in self.rows():
            w.writerow([i, repr(b), repr(B), repr(g)])
        atomic_write_text(path, buf.getvalue())


def _check_betas(betas):
    b = np.asarray(betas, dtype=float).ravel()
    if np.any(~np.isfinite(b)) or np.any(b <= 0) or np.any(b >= 1):
        raise ParameterError("every beta must lie in the open interval (0, 1)")
    return b


def ledger(betas):
    b = _check_betas(betas)
    n = len(b)
    B = np.empty(n)
    lg = np.empty(n)
    prev_B, prev_lg = 0.0, 0.0
    for i in range(n):
        prev_B = b[i] * (1.0 + prev_B)
        prev_lg = prev_lg + math.log(b[i])
        B[i], lg[i] = prev_B, prev_lg
    b.setflags(write=False)
    B.setflags(write=False)
    lg.setflags(write=False)
    return ExponentLedger(b, B, lg)


def log_propagate_smallness(log_eps, log_E, log_C, betas):
    """Log of the per-ball bounds; entry 0 is ``log eps``."""
    if log_eps > log_E:
        raise ParameterError("smallness requires eps <= E")
    if len(betas) == 0:
        return np.array([float(log_eps)])
    L = ledger(betas)
    g = L.gamma
    out = np.empty(len(L) + 1)
    out[0] = log_eps
    out[1:] = (1.0 + L.B) * log_C + (1.0 - g) * log_E + g * log_eps
    return out


def propagate_smallness(c, eps, E, C, betas):
    """Bounds ``C^(1+B_{j-1}) E^(1-Gamma_{j-1}) eps^Gamma_{j-1}`` at every ball of ``c``.

    ``c`` may be a chain or a ball count.  Returns ``(bounds, log_bounds)``.
    """
    n = c if isinstance(c, (int, np.integer)) else len(c)
    betas = np.asarray(betas, dtype=float).ravel()
    if len(betas) != n - 1:
        raise ParameterError(f"need {n - 1} betas for a chain of {n} balls, got {len(betas)}")
    if not (eps > 0 and E > 0 and C > 0):
        raise ParameterError("eps, E and C must be positive")
    logs = log_propagate_smallness(math.log(eps), math.log(E), math.log(C), betas)
    return np.exp(logs), logs


# -- moduli -----------------------------------------------------------------

def log_eta_from_log(log_s):
    """``log eta(s)`` from ``log s``; valid for ``log s < -1``."""
    log_s = np.asarray(log_s, dtype=float)
    if np.any(~np.isfinite(log_s)) or np.any(log_s >= -1.0):
        raise ParameterError("eta is defined for 0 < s < 1/e")
    return -np.sqrt(np.log(-log_s))


def eta_from_log(log_s):
    return np.exp(log_eta_from_log(log_s))


def eta(s):
    """``exp(-sqrt(log(-log s)))`` for ``0 < s < 1/e``."""
    s = np.asarray(s, dtype=float)
    if np.any(~(s > 0)) or np.any(s >= 1 / math.e):
        raise ParameterError("eta is defined for 0 < s < 1/e")
    out = eta_from_log(np.log(s))
    return float(out) if out.ndim == 0 else out


def eta1(e0, C1):
    """``exp(-C1 sqrt(-log e0))`` for ``0 < e0 < 1`` and ``C1 > 0``."""
    e0 = np.asarray(e0, dtype=float)
    if not C1 > 0:
        raise ParameterError("C1 must be positive")
    if np.any(~(e0 > 0)) or np.any(e0 >= 1):
        raise ParameterError("eta1 is defined for 0 < e0 < 1")
    out = np.exp(-C1 * np.sqrt(-np.log(e0)))
    return float(out) if out.ndim == 0 else out


def stability_bound(eps, C, R, log_eps=None):
    """``2 e R eta(eps)^C`` for ``eps <= 1/(2e)``; pass ``log_eps`` for tiny eps."""
    if not (C > 0 and R > 0):
        raise ParameterError("C and R must be positive")
    if log_eps is None:
        eps = np.asarray(eps, dtype=float)
        if np.any(~(eps > 0)) or np.any(eps > 1 / (2 * math.e)):
            raise ParameterError("stability bound needs 0 < eps <= 1/(2e)")
        log_eps = np.log(eps)
    else:
        log_eps = np.asarray(log_eps, dtype=float)
        if np.any(log_eps > -math.log(2 * math.e)):
            raise ParameterError("stability bound needs eps <= 1/(2e)")
    out = 2 * math.e * R * np.exp(C * log_eta_from_log(log_eps))
    return float(out) if out.ndim == 0 else out
