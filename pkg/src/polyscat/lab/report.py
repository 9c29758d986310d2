"""Report bundle: versioned JSON, flat CSV table, optional SVG plot."""
import csv
import hashlib
import io
import json
import os
import platform
import sys
from datetime import datetime, timezone

import numpy as np
import scipy

from .. import __version__
from .._io import atomic_write_text
from ..errors import OutputError, ValidationError
from .experiments import StabilityRecord
from .fitting import ModulusFit

SCHEMA = "polyscat-report/1"


def _fmt(x):
    """Full-precision text for numbers (17 significant digits)."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        # strict JSON has no NaN or infinity
        return float(obj) if np.isfinite(obj) else None
    if hasattr(obj, "to_dict"):
        return _jsonable(obj.to_dict())
    return obj


def dumps(obj):
    """Canonical strict JSON; floats use the shortest round-trip representation
    and non-finite values become null."""
    return json.dumps(_jsonable(obj), indent=1, sort_keys=True, allow_nan=False)


def content_hash(obj):
    return hashlib.sha256(json.dumps(_jsonable(obj), sort_keys=True).encode()).hexdigest()


def environment():
    return {"tool": "polyscat", "version": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__, "platform": sys.platform}


def make_manifest(seeds=(), config=None, scenes=(), stages=None, extra=None):
    """Run manifest: versions, input hashes, seeds and per-stage status."""
    m = {"environment": environment(), "seeds": [int(s) for s in seeds],
         "config_hash": content_hash(config) if config is not None else None,
         "scene_hashes": [content_hash(s) for s in scenes], "stages": dict(stages or {}),
         "created": datetime.now(timezone.utc).isoformat()}
    if extra:
        m.update(extra)
    # the hash ignores the timestamp so identical runs share it
    m["hash"] = content_hash({k: v for k, v in m.items() if k != "created"})
    return m


def csv_columns(n_dirs):
    cols = ["pair_id", "mode", "magnitude", "seed", "d", "dhat", "dtilde"]
    for name in ("eps", "eps1", "eps0"):
        cols += [f"{name}_{j}" for j in range(n_dirs)]
    return cols + ["A_values", "failed", "reason"]


def records_csv(records):
    n_dirs = max((len(r.eps) for r in records), default=0)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(csv_columns(n_dirs))
    for r in records:
        row = [r.pair_id, r.mode, _fmt(r.magnitude), r.seed, _fmt(r.d), _fmt(r.dhat), _fmt(r.dtilde)]
        for vals in (r.eps, r.eps1, r.eps0):
            row += [_fmt(v) for v in vals] + [""] * (n_dirs - len(vals))
        A = [_fmt(e["A"]) for per in r.A for e in per]
        row += [";".join(A), _fmt(r.failed), r.reason]
        w.writerow(row)
    return buf.getvalue()


def _svg_plot(fit, width=480, height=360, pad=48):
    """Log-log scatter of ``d`` against ``eps`` with the fitted majorant."""
    pts = np.array(fit.points if fit is not None else [], dtype=float).reshape(-1, 2)
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    if len(pts):
        le, ld = np.log10(pts[:, 0]), np.log10(pts[:, 1])
        e_grid = np.logspace(le.min(), le.max(), 64)
        lb = np.log10(fit.bound(e_grid))
        x0, x1 = le.min(), max(le.max(), le.min() + 1e-9)
        y0, y1 = min(ld.min(), lb.min()), max(ld.max(), lb.max(), ld.min() + 1e-9)
        X = lambda v: pad + (v - x0) / (x1 - x0) * (width - 2 * pad)  # noqa: E731
        Y = lambda v: height - pad - (v - y0) / (y1 - y0) * (height - 2 * pad)  # noqa: E731
        path = " ".join(f"{X(a):.2f},{Y(b):.2f}" for a, b in zip(np.log10(e_grid), lb))
        lines.append(f'<polyline points="{path}" fill="none" stroke="crimson" stroke-width="1.5"/>')
        for a, b in zip(le, ld):
            lines.append(f'<circle cx="{X(a):.2f}" cy="{Y(b):.2f}" r="3" fill="steelblue"/>')
        lines.append(f'<text x="{width / 2}" y="{height - 8}" text-anchor="middle" font-size="12">'
                     f'log10 eps [{x0:.2f}, {x1:.2f}]</text>')
        lines.append(f'<text x="12" y="{height / 2}" font-size="12" transform="rotate(-90 12 {height / 2})"'
                     f' text-anchor="middle">log10 d [{y0:.2f}, {y1:.2f}]</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def report(records, fits=None, out_dir=".", manifest=None, svg=False, stem="report", extra=None):
    """Write ``<stem>.json`` and ``<stem>.csv`` (and ``<stem>.svg``); returns the paths."""
    fits = list(fits or [])
    if manifest is None:
        manifest = make_manifest(seeds=sorted({r.seed for r in records}))
    doc = {"schema": SCHEMA, "manifest": manifest, "records": [r.to_dict() for r in records],
           "fits": [f.to_dict() for f in fits]}
    if extra:
        doc["extra"] = extra
    paths = {"json": os.path.join(out_dir, f"{stem}.json"), "csv": os.path.join(out_dir, f"{stem}.csv")}
    if not os.path.isdir(out_dir):
        raise OutputError(f"output directory {out_dir} does not exist")
    atomic_write_text(paths["json"], dumps(doc))
    atomic_write_text(paths["csv"], records_csv(records))
    if svg:
        paths["svg"] = os.path.join(out_dir, f"{stem}.svg")
        atomic_write_text(paths["svg"], _svg_plot(fits[0] if fits else None))
    return paths


def load_report(path):
    """Inverse of ``report``: ``(records, fits, manifest)``."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc
    if doc.get("schema") != SCHEMA:
        raise ValidationError(f"unsupported report schema {doc.get('schema')!r}", field="schema")
    records = [StabilityRecord.from_dict(r) for r in doc.get("records", [])]
    fits = [ModulusFit.from_dict(f) for f in doc.get("fits", [])]
    return records, fits, doc.get("manifest", {})

