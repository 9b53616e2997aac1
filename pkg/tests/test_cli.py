import csv
import io
import json
import math
import subprocess
import sys

import pytest

from flatband.cli import main
from flatband.model import ModelParams, derive_constants

WALL = ["--L", "101", "--lambda", "1.25", "--q-abs", "1.2", "--zeta-abs", repr(1.2 ** -20)]


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_profile_domain_wall(capsys):
    code, out, _ = run(["profile", *WALL], capsys)
    assert code == 0
    rows = rows_of(out)
    assert len(rows) == 203
    by = {int(r["site2x"]): r for r in rows}
    assert float(by[0]["n"]) == pytest.approx(0.5282, abs=5e-3)
    assert float(by[0]["n_asymp"]) == pytest.approx(0.52819946006377387, rel=1e-14)
    assert float(by[1]["n_asymp"]) == pytest.approx(1 - 0.52819946006377387, rel=1e-13)
    assert float(by[39]["S3"]) > 0 > float(by[41]["S3"])
    assert abs(float(by[40]["S3"])) < 1e-15
    assert by[40]["x"] == "20" and by[41]["x"] == "20.5"


def test_profile_is_byte_identical(capsys):
    _, a, _ = run(["profile", "--L", "21", "--theta", "0.3"], capsys)
    _, b, _ = run(["profile", "--L", "21", "--theta", "0.3"], capsys)
    assert a == b


def test_profile_pitch(capsys):
    _, out, _ = run(["profile", "--L", "21", "--theta", "0.3"], capsys)
    pitches = [float(r["pitch"]) for r in rows_of(out) if r["pitch"] != "nan"]
    assert len(pitches) == 43 - 2  # first site of each sublattice has no predecessor
    assert all(p == pytest.approx(0.3, abs=1e-12) for p in pitches)


def test_profile_all_up(capsys):
    _, out, _ = run(["profile", "--L", "11", "--zeta-abs", "0"], capsys)
    for r in rows_of(out):
        assert float(r["S3"]) == pytest.approx(float(r["n"]) / 2, abs=1e-15)


def test_profile_limit_mode_needs_window(capsys):
    code, _, err = run(["profile", "--mode", "limit"], capsys)
    assert code == 2 and "--window" in err
    code, out, _ = run(["profile", "--mode", "limit", "--window=-2:2", "--format", "json"], capsys)
    assert code == 0 and len(json.loads(out)) == 9


def test_correlation_outputs(tmp_path, capsys):
    out = tmp_path / "corr.csv"
    code, _, _ = run(["correlation", *WALL, "--out", str(out)], capsys)
    assert code == 0
    rows = rows_of(out.read_text())
    assert {"site2x", "site2y", "x", "y", "nn_truncated"} <= set(rows[0])
    fits = json.loads((tmp_path / "corr_fits.json").read_text())
    c = derive_constants(ModelParams(lam=1.25, q_abs=1.2))
    assert fits["electron_up_up"]["rate"] == pytest.approx(math.log(c.r), rel=0.02)
    assert fits["truncated_density"]["length"] <= fits["truncated_density"]["bound_length"]


@pytest.mark.parametrize("pair,msg", [("0.5,2", "ED oracle"), ("2,2", "coincident")])
def test_correlation_refusals(pair, msg, capsys):
    code, _, err = run(["correlation", "--L", "11", "--pair", pair], capsys)
    assert code == 2 and msg in err


def test_verify_pass_and_fault(tmp_path, capsys):
    rep = tmp_path / "v.json"
    code, _, err = run(["verify", "--suite", "recursion", "--out", str(rep)], capsys)
    assert code == 0 and "PASS" in err
    assert json.loads(rep.read_text())["passed"] is True
    code, _, err = run(["verify", "--suite", "recursion", "--inject-fault", "1e-6"], capsys)
    assert code == 1 and "violated: recursion vs Gram determinant" in err


def test_verify_unit_q_dispatches_closed_form(capsys):
    code, _, err = run(["verify", "--q-abs", "1", "--suite", "recursion"], capsys)
    assert code == 0
    assert "closed form" in err and "Gram" not in err


def test_verify_guards(capsys):
    assert run(["verify", "--L", "9"], capsys)[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--suite", "nonsense"])
    assert exc.value.code == 2


def test_sweep(tmp_path, capsys, monkeypatch):
    grid = ["--grid", "lambda=0.6,1.25,2", "--grid", "q_abs=1.2,1.7"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["sweep", *grid, "--out", str(a)], capsys)[0] == 0
    monkeypatch.setenv("FLATBAND_THREADS", "3")
    assert run(["sweep", *grid, "--out", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    rows = rows_of(a.read_text())
    assert [(float(r["lambda"]), float(r["q_abs"])) for r in rows] == [
        (0.6, 1.2), (0.6, 1.7), (1.25, 1.2), (1.25, 1.7), (2.0, 1.2), (2.0, 1.7)]
    for r in rows:
        lam, q = float(r["lambda"]), float(r["q_abs"])
        assert float(r["wall_width"]) == pytest.approx(1 / math.log(q), rel=1e-14)
        eps = lam ** 2 + q ** 0.5 + q ** -0.5
        assert float(r["plateau_integer"]) == pytest.approx(lam ** 2 / math.sqrt(eps ** 2 - 4), rel=1e-13)
        assert float(r["n_integer_far"]) == pytest.approx(float(r["plateau_integer"]), rel=1e-6)


def test_sweep_z_axis(capsys):
    code, out, _ = run(["sweep", "--grid", "z=-2,3", "--q-abs", "1.5"], capsys)
    assert code == 0
    assert [float(r["z"]) for r in rows_of(out)] == pytest.approx([-2.0, 3.0])


@pytest.mark.parametrize("grid", [[], ["--grid", "colour=1"], ["--grid", "lambda="]])
def test_sweep_bad_grid(grid, capsys):
    assert run(["sweep", *grid], capsys)[0] == 2


def test_threads_env_validated(capsys, monkeypatch):
    monkeypatch.setenv("FLATBAND_THREADS", "many")
    assert run(["sweep", "--grid", "lambda=1,2"], capsys)[0] == 2


def test_limits(capsys):
    code, out, _ = run(["limits", "--q-abs", "1.2", "--zeta-abs", "0.5", "--window=-1:1"], capsys)
    assert code == 0
    rows = rows_of(out)
    assert len(rows) == 3
    assert all(float(r["err_both"]) < 1e-10 and float(r["beta"]) < 1 for r in rows)


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "p.cfg"
    cfg.write_text("lambda = 2.0\nL = 7\n")
    _, a, _ = run(["profile", "--config", str(cfg)], capsys)
    _, b, _ = run(["profile", "--config", str(cfg), "--lambda", "1.0"], capsys)
    _, ref, _ = run(["profile", "--L", "7", "--lambda", "1.0"], capsys)
    assert len(rows_of(a)) == 15
    assert b == ref and a != b
    cfg.write_text("bogus = 1\n")
    assert run(["profile", "--config", str(cfg)], capsys)[0] == 2
    assert run(["profile", "--config", str(tmp_path / "missing.cfg")], capsys)[0] == 2


def test_parameter_errors(capsys):
    assert run(["profile", "--L", "4"], capsys)[0] == 2
    assert run(["profile", "--lambda", "-1"], capsys)[0] == 2
    assert run(["profile", "--window", "abc"], capsys)[0] == 2


def test_plot_writes_png(tmp_path, capsys):
    pytest.importorskip("matplotlib")
    out = tmp_path / "prof.csv"
    assert run(["profile", "--L", "11", "--out", str(out), "--plot"], capsys)[0] == 0
    png = tmp_path / "prof_profile.png"
    assert png.read_bytes()[:4] == b"\x89PNG"
    assert run(["profile", "--L", "11", "--plot"], capsys)[0] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "flatband.cli", "profile", "--L", "3"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[0].startswith("site2x,x,")
