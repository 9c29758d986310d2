"""Command-line entry point.

Exit codes: 0 success, 2 invalid input, 3 solver or computation failure,
4 file input/output failure.  Progress goes to standard error; data only to
files, always written atomically.
"""
import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from ._io import atomic_write_text
from .errors import (DomainError, FitError, GenerationError, OutputError, ParameterError, RoutingError,
                     SolverError, ValidationError)
from .helmholtz import ScatterConfig, load_config, optical_theorem_defect, solve
from .lab import audit_distances, fit_modulus, make_manifest, report, sweep, symmetry_experiment
from .lab.experiments import StabilityRecord
from .lab.report import dumps
from .propagation import build_chain, chain_is_regular
from .scene import Scatterer2D, load_scene, scene_to_dict

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4
log = logging.getLogger("polyscat")


def _threads(args):
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("POLYSCAT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ValidationError(f"POLYSCAT_THREADS must be an integer, got {env!r}",
                                  field="POLYSCAT_THREADS") from exc
    return 1


def _scene(args, required=True):
    if args.scene is None:
        if required:
            raise ValidationError("--scene is required", field="--scene")
        return Scatterer2D([])
    return load_scene(args.scene)


def _config(args):
    return load_config(args.config) if args.config else ScatterConfig()


def _load_json(path, what):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if not text.strip():
        return None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed {what} JSON: {exc}", field="<json>") from exc


def _sidecar(out, suffix):
    root, _ = os.path.splitext(out)
    return root + suffix


# -- commands -------------------------------------------------------------------

def cmd_solve(args):
    s = _scene(args)
    cfg = _config(args)
    u = solve(s, cfg, args.direction)
    log.info("solved %s, direction %d", s, args.direction)
    far = u.far_field()
    manifest = make_manifest([args.seed], cfg.to_dict(), [scene_to_dict(s)], {"solve": "ok"})
    od = optical_theorem_defect(u)
    diag = {"manifest_hash": manifest["hash"], "manifest": manifest, "direction": args.direction,
            "cond": float(getattr(u, "cond", 1.0)), "optical_defect": od.value,
            "far_field_l2": far.l2_norm(), **u.diagnostics()}
    if hasattr(u, "bc_residual") and not s.is_empty:
        diag["bc_residual"] = u.bc_residual()
    far.to_csv(args.out)
    atomic_write_text(_sidecar(args.out, ".diagnostics.json"), dumps(diag))
    return EXIT_OK


def cmd_chain(args):
    s = _scene(args, required=False)
    if args.x0 is None or args.x1 is None:
        raise ValidationError("--x0 and --x1 are required", field="--x0")
    c = build_chain(s, args.x0, args.x1, d=args.d, constants=tuple(args.constants), rho0=args.rho0)
    reg = chain_is_regular(c, s)
    log.info("chain of %d balls, regular=%s, kappa=%s", len(c), bool(reg), c.info.get("kappa"))
    atomic_write_text(args.out, dumps(c.to_list()))
    manifest = make_manifest([args.seed], None, [scene_to_dict(s)], {"chain": "ok"},
                             extra={"chain_info": c.info, "regular": bool(reg)})
    atomic_write_text(_sidecar(args.out, ".manifest.json"), dumps(manifest))
    return EXIT_OK


def _sweep_spec(args):
    data = _load_json(args.config, "sweep config") if args.config else {}
    data = data or {}
    if not isinstance(data, dict):
        raise ValidationError("sweep config must be a JSON object", field="<root>")
    known = {"magnitudes", "mode", "seeds", "n_seeds", "scatter", "svg"}
    unknown = set(data) - known
    if unknown:
        raise ValidationError(f"unknown sweep field(s): {sorted(unknown)}", field=sorted(unknown)[0])
    mags = data.get("magnitudes", [0.1, 0.05, 0.025])
    if not isinstance(mags, list) or not all(isinstance(m, (int, float)) for m in mags):
        raise ValidationError("'magnitudes' must be a list of numbers", field="magnitudes")
    if "seeds" in data:
        seeds = data["seeds"]
        if not isinstance(seeds, list) or not all(isinstance(x, int) for x in seeds):
            raise ValidationError("'seeds' must be a list of integers", field="seeds")
    else:
        seeds = [args.seed + i for i in range(int(data.get("n_seeds", 3)))]
    cfg = ScatterConfig.from_dict(data.get("scatter", {}))
    return mags, data.get("mode", "vertex-jitter"), seeds, cfg, bool(data.get("svg", False))


def cmd_sweep(args):
    s = _scene(args)
    mags, mode, seeds, cfg, svg = _sweep_spec(args)
    try:
        recs = sweep(s, mags, mode, seeds, cfg, threads=_threads(args),
                     on_record=lambda r: log.info("record %s failed=%s", r.pair_id, r.failed))
    except ParameterError as exc:
        raise ValidationError(str(exc), field="magnitudes") from exc
    fits, stages = [], {"sweep": "ok"}
    try:
        fits.append(fit_modulus(recs))
        stages["fit"] = "ok"
    except FitError as exc:
        stages["fit"] = f"skipped: {exc}"
    os.makedirs(args.out, exist_ok=True)
    manifest = make_manifest(seeds, cfg.to_dict(), [scene_to_dict(s)], stages,
                             extra={"magnitudes": mags, "mode": mode})
    report(recs, fits, args.out, manifest=manifest, svg=svg)
    log.info("wrote %d records to %s", len(recs), args.out)
    return EXIT_OK


def _records_from(doc):
    if doc is None:
        return []
    if isinstance(doc, dict):
        doc = doc.get("records", [])
    if not isinstance(doc, list):
        raise ValidationError("records file must be a report or a list of records", field="records")
    try:
        return [StabilityRecord.from_dict(r) for r in doc]
    except (ParameterError, TypeError) as exc:
        raise ValidationError(f"bad record: {exc}", field="records") from exc


def cmd_audit(args):
    recs = _records_from(_load_json(args.records, "records"))
    res = audit_distances(recs, args.C1, args.C2)
    log.info("%d records, %d violations", len(recs), len(res.violations))
    manifest = make_manifest([args.seed], None, [], {"audit": "ok"})
    atomic_write_text(args.out, dumps({"manifest_hash": manifest["hash"], "manifest": manifest,
                                       **res.to_dict()}))
    return EXIT_OK


def cmd_symmetry(args):
    s = _scene(args)
    cfg = _config(args)
    try:
        rep = symmetry_experiment(s, cfg, rotation_deg=args.rotation)
    except ParameterError as exc:
        raise ValidationError(str(exc), field="--scene") from exc
    manifest = make_manifest([args.seed], cfg.to_dict(), [scene_to_dict(s)], {"symmetry": "ok"})
    atomic_write_text(args.out, dumps({"manifest_hash": manifest["hash"], "manifest": manifest,
                                       **rep.to_dict()}))
    return EXIT_OK


# -- parser -----------------------------------------------------------------------

def _common(p, scene=True, config=True):
    if scene:
        p.add_argument("--scene", help="scene JSON file")
    if config:
        p.add_argument("--config", help="configuration JSON file")
    p.add_argument("--out", required=True, help="output path")
    p.add_argument("--seed", type=int, default=0, help="base random seed")
    p.add_argument("--threads", type=int, default=None, help="worker threads (env POLYSCAT_THREADS)")
    p.add_argument("--verbose", "-v", action="store_true", help="progress on standard error")


def build_parser():
    ap = argparse.ArgumentParser(prog="polyscat", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"polyscat {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one scattering problem; far-field CSV + diagnostics JSON")
    _common(p)
    p.add_argument("--direction", type=int, default=0, help="incident direction index")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("chain", help="build a regular chain of balls; chain JSON")
    _common(p)
    p.add_argument("--x0", type=float, nargs=2, metavar=("X", "Y"))
    p.add_argument("--x1", type=float, nargs=2, metavar=("X", "Y"))
    p.add_argument("--d", type=float, default=None, help="distance of x1 to the scatterer")
    p.add_argument("--rho0", type=float, default=None, help="first radius (default dist(x0)/16)")
    p.add_argument("--constants", type=float, nargs=4, default=[0.2, 0.5, 0.8, 8.0],
                   metavar=("A1", "A2", "A3", "A4"))
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("sweep", help="perturbation sweep; report JSON/CSV in --out directory")
    _common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("audit", help="audit distance relations over stored records")
    _common(p, scene=False, config=False)
    p.add_argument("--records", required=True, help="report JSON or list of records")
    p.add_argument("--C1", type=float, default=None)
    p.add_argument("--C2", type=float, default=None)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("symmetry", help="symmetry degeneracy experiment; report JSON")
    _common(p)
    p.add_argument("--rotation", type=float, default=5.0, help="rotation of the comparison line (degrees)")
    p.set_defaults(func=cmd_symmetry)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="polyscat: %(message)s")
    try:
        return args.func(args)
    except (ValidationError, ParameterError, DomainError) as exc:
        field = getattr(exc, "field", None)
        print(f"polyscat: invalid input{f' ({field})' if field else ''}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SolverError, RoutingError, FitError, GenerationError, np.linalg.LinAlgError) as exc:
        print(f"polyscat: computation failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (OutputError, OSError) as exc:
        print(f"polyscat: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
