import csv
import json

import pytest

from halfplane_vortex.cli import main
from halfplane_vortex.model import dump_state, load_state, make_state


def _manifest(d):
    return json.loads((d / "manifest.json").read_text())


def test_simulate_and_emit_final(tmp_path):
    s = make_state([(1, 1.0, 0.0, 1.0)])
    dump_state(s, tmp_path / "in.json")
    out = tmp_path / "run"
    rc = main(["simulate", "--state", str(tmp_path / "in.json"), "--dt", "1e-2", "--steps", "100",
               "--record-every", "10", "--emit-final", str(tmp_path / "final.json"), "--out", str(out)])
    assert rc == 0
    rows = list(csv.DictReader(open(out / "trajectory.csv")))
    assert len(rows) == 11
    assert {float(r["y"]) for r in rows} == {1.0}
    final = load_state(tmp_path / "final.json")
    assert final.time == pytest.approx(1.0)
    m = _manifest(out)
    assert m["subcommand"] == "simulate" and str(out / "trajectory.csv") in m["outputs"]
    # continuing from the emitted state reaches the same point as one longer run
    rc = main(["simulate", "--state", str(tmp_path / "final.json"), "--dt", "1e-2", "--steps", "100",
               "--emit-final", str(tmp_path / "f2.json"), "--out", str(out)])
    rc2 = main(["simulate", "--state", str(tmp_path / "in.json"), "--dt", "1e-2", "--steps", "200",
                "--emit-final", str(tmp_path / "f3.json"), "--out", str(out)])
    assert rc == rc2 == 0
    assert load_state(tmp_path / "f2.json").xs[0] == pytest.approx(load_state(tmp_path / "f3.json").xs[0], rel=1e-13)


def test_collapse_diagnostic_summary(tmp_path):
    dump_state(make_state([(1, 1.0, 0.5, 1.0), (2, -1.0, -0.5, 1.0)]), tmp_path / "in.json")
    assert main(["simulate", "--state", str(tmp_path / "in.json"), "--steps", "500", "--collapse-diagnostic",
                 "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert "collapse" in summary and summary["collapse"]["monotone_decreasing"] is False


def test_phase_with_negative_grid(tmp_path):
    rc = main(["phase", "--case", "two_layer_same", "--alpha", "1", "--grid", "-1,1,0,1,21,21",
               "--levels", "-0.5", "--out", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "field.csv").exists() and (tmp_path / "levels.csv").exists()


def test_equilibria_deterministic(tmp_path):
    args = ["equilibria", "--family", "vertical", "--alpha", "2", "--beta", "1", "--multistart", "30"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "solutions.csv").read_bytes() == (tmp_path / "b" / "solutions.csv").read_bytes()


def test_streamlines(tmp_path):
    rc = main(["streamlines", "--config", "opposite_horizontal", "--alpha", "10", "--beta", "2",
               "--resolution", "20", "--out", str(tmp_path)])
    assert rc == 0
    rows = list(csv.DictReader(open(tmp_path / "stagnation.csv")))
    assert any(r["class"] == "boundary" for r in rows)


def test_certify(tmp_path):
    rc = main(["certify", "--samples", "2000", "--alpha-list", "1,2", "--out", str(tmp_path)])
    assert rc == 0
    cert = json.loads((tmp_path / "certificate.json").read_text())
    assert cert["opposite_pair"]["no_equilibrium"] is True
    assert [s["speed"] for s in cert["stacked"]] == ["2", "1"]


def test_domain_error_exit_code(tmp_path, capsys):
    rc = main(["phase", "--case", "two_layer_same", "--alpha", "-1", "--grid", "0,1,0,1,5,5",
               "--out", str(tmp_path)])
    assert rc == 1
    assert "error" in capsys.readouterr().err
    assert not (tmp_path / "manifest.json").exists()
    assert main(["simulate", "--state", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 1


def test_usage_error_exit_code(tmp_path):
    with pytest.raises(SystemExit) as e:
        main(["phase", "--case", "two_layer_same", "--grid", "0,1,0,1", "--out", str(tmp_path)])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["bogus"])
    assert e.value.code == 2
