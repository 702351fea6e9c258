"""Output formats, configuration and the command-line interface."""

import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from vortextubes.acceptance import CriterionResult, judge, merged_thresholds, rejudge, report
from vortextubes.cli import main
from vortextubes.config import ConfigError, RunConfig, resolve_curve
from vortextubes.io import (config_hash, read_csv, read_grid, read_json, write_csv, write_grid, write_json,
                            write_vtk_vectors)


def run_cli(capsys, *argv):
    rc = main([str(a) for a in argv])
    return rc, json.loads(capsys.readouterr().out)


# -- formats ----------------------------------------------------------------------

@settings(deadline=None, max_examples=20)
@given(vals=arrays(np.float64, (4, 3, 6), elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_grid_round_trip(tmp_path_factory, vals):
    p = tmp_path_factory.mktemp("g") / "psi.bin"
    write_grid(p, vals, dict(eps=0.1))
    back, head = read_grid(p)
    np.testing.assert_array_equal(back, vals)
    assert head["shape"] == [4, 3, 6] and head["order"] == "alpha-major" and head["eps"] == 0.1


def test_grid_rejects_foreign_file(tmp_path):
    p = tmp_path / "x.bin"
    p.write_bytes(b"not a grid")
    with pytest.raises(ValueError):
        read_grid(p)


@settings(deadline=None, max_examples=20)
@given(rows=st.lists(st.tuples(st.floats(allow_nan=False, allow_infinity=False), st.integers(-5, 5)),
                     max_size=10))
def test_csv_round_trip_is_exact(tmp_path_factory, rows):
    p = tmp_path_factory.mktemp("c") / "t.csv"
    write_csv(p, ["x", "k"], rows, config_hash="abc", eps=0.1)
    meta, cols, back = read_csv(p)
    assert cols == ["x", "k"] and meta["config_hash"] == "abc" and meta["eps"] == 0.1
    assert [(r[0], int(r[1])) for r in back] == [(float(x), k) for x, k in rows]


def test_json_meta_and_special_values(tmp_path):
    p = write_json(tmp_path / "r.json", dict(a=np.float64(1.5), b=np.inf, c=np.array([1, 2]), z=1j),
                   config_hash="h")
    d = read_json(p)
    assert d["a"] == 1.5 and d["b"] == "inf" and d["c"] == [1, 2] and d["z"] == [0.0, 1.0]
    assert d["meta"]["config_hash"] == "h" and "version" in d["meta"]


def test_vtk_layout(tmp_path):
    U = np.arange(2 * 3 * 4 * 3, dtype=float).reshape(2, 3, 4, 3)
    p = write_vtk_vectors(tmp_path / "u.vtk", (0, 0, 0), (1, 1, 1), (2, 3, 4), U)
    text = p.read_text().splitlines()
    assert text[0].startswith("# vtk DataFile")
    assert "DIMENSIONS 2 3 4" in text
    data = [line for line in text if line[:1].isdigit() or line[:1] == "-"]
    # x varies fastest: the second vector in the file is U[1, 0, 0]
    np.testing.assert_array_equal([float(v) for v in data[1].split()], U[1, 0, 0])


# -- configuration ---------------------------------------------------------------------

def test_run_config_round_trip_and_hash():
    cfg = RunConfig.from_dict(dict(curves=["circle"], eps=0.1, grid=[32, 8, 16]))
    again = RunConfig.from_dict(cfg.to_dict())
    assert again == cfg and again.hash == cfg.hash
    moved = RunConfig.from_dict(dict(cfg.to_dict(), out_dir="elsewhere"))
    assert moved.hash == cfg.hash
    assert RunConfig.from_dict(dict(cfg.to_dict(), eps=0.2)).hash != cfg.hash
    assert config_hash({"b": 1, "a": 2}) == config_hash({"a": 2, "b": 1})


def test_run_config_lists_every_problem():
    with pytest.raises(ConfigError) as exc:
        RunConfig.from_dict(dict(eps=-1.0, solver_tol=0.0, bogus=1))
    assert "bogus" in str(exc.value)
    with pytest.raises(ConfigError) as exc:
        RunConfig.from_dict(dict(eps=-1.0, solver_tol=0.0))
    assert len(exc.value.problems) >= 3


def test_resolve_curve_forms(tmp_path):
    c = resolve_curve({"builtin": "circle", "radius": 2.0})
    assert c.length == pytest.approx(4 * np.pi)
    assert c.is_arclength
    with pytest.raises(ConfigError):
        resolve_curve(str(tmp_path / "missing.json"))


# -- threshold tables -------------------------------------------------------------------

def test_judge_and_rejudge():
    measured = dict(growth=1.2, slope=0.1, finite=True)
    assert judge(12, measured) == (True, [])
    assert judge(12, dict(measured, growth=float("nan")))[1] == ["growth"]
    res = CriterionResult(12, "decay", True, measured, merged_thresholds()[12])
    strict = rejudge([res], {12: dict(growth=1.0)})[0]
    assert not strict.passed and strict.failed_checks == ["growth"]
    assert res.passed  # original untouched
    rep = report([res, strict])
    assert rep["passed"] == 1 and rep["total"] == 2 and not rep["all_passed"]
    assert res.line().startswith("[PASS] criterion 12")


# -- CLI ------------------------------------------------------------------------------------

def test_cli_predict(capsys):
    rc, d = run_cli(capsys, "predict", "--curve", "trefoil", "--eps", 0.05)
    assert rc == 0
    assert d["omega"] == pytest.approx(-15.593362799471352, abs=1e-10)


def test_cli_degenerate_tube_is_a_json_error(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("VORTEXTUBES_OUT", str(tmp_path))
    rc, d = run_cli(capsys, "tube", "sample", "--curve", "circle", "--eps", 2.0)
    assert rc == 2 and d["error"] == "DegenerateChart" and d["message"]
    rc, d = run_cli(capsys, "curve", "check", "--curve", "circle", "--eps", 2.0)
    assert rc == 0 and d["ok"] is False and d["chart_nondegenerate"] is False


def test_cli_outputs_are_byte_identical(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("VORTEXTUBES_OUT", str(tmp_path))
    blobs = []
    for name in ("a", "b"):
        run_cli(capsys, "tube", "sample", "--curve", "trefoil", "--eps", 0.05, "--out", tmp_path / f"{name}.csv")
        run_cli(capsys, "solve", "psi", "--curve", "trefoil", "--eps", 0.1, "--grid", "32,8,16",
                "--out", tmp_path / f"{name}.bin")
        blobs.append([(tmp_path / f"{name}{ext}").read_bytes() for ext in (".csv", ".bin", ".json")])
    assert blobs[0] == blobs[1]
    meta, cols, rows = read_csv(tmp_path / "a.csv")
    assert cols[:3] == ["alpha", "r", "theta"] and len(rows) == 16 * 4 * 8


def test_cli_out_env_default(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("VORTEXTUBES_OUT", str(tmp_path))
    rc, d = run_cli(capsys, "tube", "sample", "--curve", "circle", "--eps", 0.1)
    assert rc == 0 and (tmp_path / "tube.csv").exists()


def test_cli_field_eval_from_saved_psi(capsys, tmp_path):
    psi = tmp_path / "psi.bin"
    run_cli(capsys, "solve", "psi", "--curve", "trefoil", "--eps", 0.1, "--grid", "64,8,16", "--out", psi)
    args = ("field", "eval", "--curve", "trefoil", "--eps", 0.1, "--grid", "64,8,16", "--at", "1.0,1.0,0.5")
    rc1, saved = run_cli(capsys, *args, "--psi", psi)
    rc2, fresh = run_cli(capsys, *args)
    assert rc1 == rc2 == 0
    assert saved == fresh
    assert abs(saved["v_r"]) < 1e-10


def test_cli_global_fit_and_sample(capsys, tmp_path):
    out = tmp_path / "field.json"
    rc, d = run_cli(capsys, "global", "fit", "--curve", "circle", "--eps", 0.1, "--L", 6,
                    "--grid", "32,8,16", "--out", out)
    # mechanics only: fit quality at lam = eps^3 is the subject of the acceptance suite
    assert rc == 0 and np.isfinite(d["misfit"]) and d["lam"] == pytest.approx(1e-3)
    doc = read_json(out)
    assert doc["projected"] and doc["representation"]["lam"] == pytest.approx(1e-3)
    rc, d = run_cli(capsys, "global", "sample", "--field", out, "--box=-1,1,-1,1,-1,1", "--n", 3,
                    "--out", tmp_path / "u.vtk")
    assert rc == 0 and d["points"] == 27


def test_cli_pipeline(capsys, tmp_path):
    cfg = dict(curves=["circle"], eps=0.1, grid=[32, 8, 16], boundary_samples=32, birkhoff_iters=200,
               conjugacy_modes=8, section_seeds=2, section_iters=3, global_fit=False)
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    rc, d = run_cli(capsys, "pipeline", "--config", p, "--out-dir", tmp_path / "out")
    assert rc == 0 and d["status"] == "ok"
    for f in d["files"]:
        assert (tmp_path / "out" / f).exists() or (tmp_path / f).exists() or f.startswith(str(tmp_path))
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(dict(curves=[], eps=-1)))
    rc, d = run_cli(capsys, "pipeline", "--config", bad)
    assert rc == 2 and d["error"] == "ConfigError" and len(d["problems"]) >= 2


def test_cli_verify_missing_inputs(capsys, tmp_path):
    p = tmp_path / "v.json"
    p.write_text("{}")
    rc, d = run_cli(capsys, "verify", "--config", p)
    assert rc == 2 and set(d["missing"]) == {"curve", "eps_values"}


def test_cli_verify_single_criterion(capsys, tmp_path):
    p = tmp_path / "v.json"
    p.write_text(json.dumps(dict(curve="trefoil", eps_values=[0.1, 0.05], criteria=[14])))
    rc, d = run_cli(capsys, "verify", "--config", p)
    assert rc == 0 and d["all_passed"] and d["criteria"][0]["id"] == 14


def test_console_script_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "vortextubes.cli", "predict", "--curve", "circle", "--eps", "0.1"],
                         capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["omega"] == pytest.approx(0.0, abs=1e-12)
