import json
import os

import numpy as np
import pytest

from conftest import square_polys
from polyscat import __version__
from polyscat.cli import main
from polyscat.helmholtz import FarFieldPattern
from polyscat.propagation import BallChain, chain_is_regular
from polyscat.scene import Scatterer2D, dump_scene


@pytest.fixture
def files(tmp_path):
    scene = tmp_path / "square.json"
    dump_scene(Scatterer2D(square_polys()), scene)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"quad_order": 128, "n_far": 64}))
    empty = tmp_path / "empty.json"
    dump_scene(Scatterer2D([]), empty)
    return {"scene": str(scene), "cfg": str(cfg), "empty": str(empty), "dir": tmp_path}


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0 and __version__ in capsys.readouterr().out


def test_solve_writes_far_field_and_diagnostics(files):
    out = str(files["dir"] / "far.csv")
    assert main(["solve", "--scene", files["scene"], "--config", files["cfg"], "--out", out]) == 0
    far = FarFieldPattern.from_csv(out)
    assert far.n == 64 and np.all(np.isfinite(far.values))
    diag = json.loads(open(str(files["dir"] / "far.diagnostics.json")).read())
    assert diag["bc_residual"] < 1e-3 and "manifest_hash" in diag


def test_solve_output_is_deterministic(files):
    a, b = str(files["dir"] / "a.csv"), str(files["dir"] / "b.csv")
    for out in (a, b):
        assert main(["solve", "--scene", files["scene"], "--config", files["cfg"], "--out", out]) == 0
    assert open(a).read() == open(b).read()


def test_malformed_config_names_the_field(files, capsys):
    bad = files["dir"] / "bad.json"
    bad.write_text(json.dumps({"quad_order": 128, "wavenumber": 3}))
    code = main(["solve", "--scene", files["scene"], "--config", str(bad), "--out", str(files["dir"] / "x.csv")])
    assert code == 2 and "wavenumber" in capsys.readouterr().err


def test_malformed_scene_json(files, capsys):
    bad = files["dir"] / "broken.json"
    bad.write_text("{not json")
    code = main(["solve", "--scene", str(bad), "--out", str(files["dir"] / "x.csv")])
    assert code == 2 and "invalid input" in capsys.readouterr().err


def test_missing_scene_is_invalid(files):
    assert main(["solve", "--out", str(files["dir"] / "x.csv")]) == 2


def test_bad_direction_is_invalid(files):
    code = main(["solve", "--scene", files["scene"], "--config", files["cfg"], "--direction", "99",
                 "--out", str(files["dir"] / "x.csv")])
    assert code == 2


def test_unwritable_output_is_io_error(files):
    out = str(files["dir"] / "no" / "such" / "dir" / "far.csv")
    assert main(["solve", "--scene", files["scene"], "--config", files["cfg"], "--out", out]) == 4


def test_solver_failure_exit_code(files):
    cfg = files["dir"] / "tight.json"
    cfg.write_text(json.dumps({"quad_order": 128, "tolerances": {"cond": 1.0}}))
    code = main(["solve", "--scene", files["scene"], "--config", str(cfg), "--out", str(files["dir"] / "x.csv")])
    assert code == 3


def test_chain_on_empty_scene(files):
    out = str(files["dir"] / "chain.json")
    code = main(["chain", "--scene", files["empty"], "--x0", "-5", "0", "--x1", "5", "0", "--rho0", "0.5",
                 "--out", out])
    assert code == 0
    c = BallChain.from_list(json.loads(open(out).read()))
    assert chain_is_regular(c, Scatterer2D([]))
    assert np.allclose(c.centers[0], [-5, 0]) and np.allclose(c.centers[-1], [5, 0])
    assert os.path.exists(str(files["dir"] / "chain.manifest.json"))


def test_chain_around_square(files):
    out = str(files["dir"] / "chain.json")
    code = main(["chain", "--scene", files["scene"], "--x0", "-4", "0", "--x1", "0.55", "0", "--d", "0.05",
                 "--out", out])
    assert code == 0
    c = BallChain.from_list(json.loads(open(out).read()))
    assert chain_is_regular(c, Scatterer2D(square_polys()))


def test_chain_needs_endpoints(files):
    assert main(["chain", "--out", str(files["dir"] / "c.json")]) == 2


def test_chain_start_inside_scatterer(files):
    code = main(["chain", "--scene", files["scene"], "--x0", "0", "0", "--x1", "3", "0",
                 "--out", str(files["dir"] / "c.json")])
    assert code == 2


def test_sweep_grid(files):
    spec = files["dir"] / "sweep.json"
    spec.write_text(json.dumps({"magnitudes": [0.08, 0.04, 0.02], "seeds": [0, 1, 2],
                                "scatter": {"quad_order": 128}}))
    out = files["dir"] / "rep"
    assert main(["sweep", "--scene", files["scene"], "--config", str(spec), "--out", str(out)]) == 0
    doc = json.loads((out / "report.json").read_text())
    assert len(doc["records"]) == 9
    assert len((out / "report.csv").read_text().splitlines()) == 10


def test_sweep_unknown_field(files, capsys):
    spec = files["dir"] / "sweep.json"
    spec.write_text(json.dumps({"magnitude": [0.1]}))
    code = main(["sweep", "--scene", files["scene"], "--config", str(spec), "--out", str(files["dir"] / "r")])
    assert code == 2 and "magnitude" in capsys.readouterr().err


def test_sweep_increasing_magnitudes_is_invalid(files):
    spec = files["dir"] / "sweep.json"
    spec.write_text(json.dumps({"magnitudes": [0.01, 0.1], "scatter": {"quad_order": 128}}))
    assert main(["sweep", "--scene", files["scene"], "--config", str(spec), "--out", str(files["dir"] / "r")]) == 2


def test_threads_from_environment(files, monkeypatch):
    spec = files["dir"] / "sweep.json"
    spec.write_text(json.dumps({"magnitudes": [0.05], "seeds": [0, 1], "scatter": {"quad_order": 128}}))
    outs = []
    for env in ("1", "2"):
        monkeypatch.setenv("POLYSCAT_THREADS", env)
        out = files["dir"] / f"rep{env}"
        assert main(["sweep", "--scene", files["scene"], "--config", str(spec), "--out", str(out)]) == 0
        outs.append((out / "report.csv").read_text())
    assert outs[0] == outs[1]
    monkeypatch.setenv("POLYSCAT_THREADS", "many")
    assert main(["sweep", "--scene", files["scene"], "--config", str(spec), "--out", str(files["dir"] / "r")]) == 2


def test_audit_empty_file(files):
    rec = files["dir"] / "records.json"
    rec.write_text("")
    out = files["dir"] / "audit.json"
    assert main(["audit", "--records", str(rec), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["violations"] == [] and doc["n_used"] == 0


def test_audit_with_fixed_constants(files):
    rec = files["dir"] / "records.json"
    rec.write_text(json.dumps([{"pair_id": "a", "d": 0.2, "dhat": 0.2, "dtilde": 0.2},
                               {"pair_id": "b", "d": 0.1, "dhat": 0.2, "dtilde": 0.3}]))
    out = files["dir"] / "audit.json"
    assert main(["audit", "--records", str(rec), "--C1", "1", "--C2", "1", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert [v["pair_id"] for v in doc["violations"]] == ["b"]


def test_audit_bad_records(files):
    rec = files["dir"] / "records.json"
    rec.write_text(json.dumps([{"pair_id": "a", "colour": 1}]))
    assert main(["audit", "--records", str(rec), "--out", str(files["dir"] / "a.json")]) == 2
    assert main(["audit", "--records", str(files["dir"] / "missing.json"),
                 "--out", str(files["dir"] / "a.json")]) == 4


def test_symmetry_command(files):
    out = files["dir"] / "sym.json"
    assert main(["symmetry", "--scene", files["scene"], "--config", files["cfg"], "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["A_sym"] <= doc["A_rotated"]


def test_symmetry_needs_a_symmetry_line(files):
    s = files["dir"] / "lop.json"
    dump_scene(Scatterer2D([[(-0.5, -0.5), (0.5, -0.5), (0.5, 0.3), (0.3, 0.5), (-0.5, 0.5)]]), s)
    assert main(["symmetry", "--scene", str(s), "--config", files["cfg"], "--out", str(files["dir"] / "y.json")]) == 2
