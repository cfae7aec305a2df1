import csv
import json
import math
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from swarmdyn import cli
from swarmdyn.errors import ValidationError
from swarmdyn.game_core import SimplexState

SCEN = resources.files("swarmdyn") / "scenarios"


def scenario(name):
    return str(SCEN / f"{name}.json")


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_barycentric_vertices():
    assert cli.to_barycentric(SimplexState(1, 0, 0)) == (0.0, 0.0)
    assert cli.to_barycentric(SimplexState(0, 1, 0)) == (1.0, 0.0)
    u, v = cli.to_barycentric(SimplexState(0, 0, 1))
    assert (u, v) == (0.5, math.sqrt(3) / 2)
    u, v = cli.to_barycentric((1 / 3, 1 / 3, 1 / 3))
    assert u == pytest.approx(0.5) and v == pytest.approx(0.28867513459481287)


def test_barycentric_affine_and_injective(rng):
    pts = rng.dirichlet([1, 1, 1], size=200)
    uv = np.array([cli.to_barycentric(p) for p in pts])
    # affine: the map of a convex combination is the combination of the maps
    lam = rng.uniform(size=199)
    mix = lam[:, None] * pts[:-1] + (1 - lam[:, None]) * pts[1:]
    mixed = np.array([cli.to_barycentric(p) for p in mix])
    assert np.allclose(mixed, lam[:, None] * uv[:-1] + (1 - lam[:, None]) * uv[1:], atol=1e-14)
    M = np.array([[0, 1, 0.5], [0, 0, math.sqrt(3) / 2], [1, 1, 1]])
    assert abs(np.linalg.det(M)) > 0.5


def test_fig_sigma3_outputs(tmp_path):
    assert cli.run(scenario("fig_sigma3"), tmp_path) == 0
    head, traj = read_csv(tmp_path / "fig_sigma3_trajectory.csv")
    assert head == ["t", "x1", "x2", "x3"]
    assert np.allclose(traj[0, 1:], [0.1, 0.9, 0.0])
    head, bary = read_csv(tmp_path / "fig_sigma3_barycentric.csv")
    assert head == ["t", "u", "v"]
    assert np.allclose(bary[:, 1], traj[:, 2] + traj[:, 3] / 2, atol=1e-11)
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["classifications"][1]["classification"] == "saddle"


def test_fig_meanfield_connectivity(tmp_path):
    assert cli.run(scenario("fig_meanfield"), tmp_path) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    low, high = report["final_state"]
    assert high[2] > low[2]
    head, rows = read_csv(tmp_path / "fig_meanfield_trajectory.csv")
    assert head == ["t", "k", "x1", "x2", "x3", "theta1", "theta2"]
    assert set(rows[:, 1]) == {0.22, 0.85}


def test_fig_micromacro_monotone(tmp_path):
    assert cli.run(scenario("fig_micromacro"), tmp_path) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    x3 = [row[2] for row in report["final_state"]]
    assert len(x3) == 9 and all(b > a for a, b in zip(x3, x3[1:]))


@pytest.mark.parametrize("name", ["unstructured_deadlock", "unstructured_consensus",
                                  "fig_sigma15", "sector_switching", "fig_meanfield_sigma15"])
def test_report_round_trip(tmp_path, name):
    assert cli.run(scenario(name), tmp_path) == 0
    report = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    jsonschema.validate(report, cli.REPORT_SCHEMA)
    for key in ("equilibria", "thresholds", "classifications", "settle_times"):
        assert key in report


def test_unstructured_report_contents(tmp_path):
    assert cli.run(scenario("unstructured_consensus"), tmp_path) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["thresholds"]["sigma_star"] == pytest.approx(0.375)
    kinds = {c["case"]: c["classification"] for c in report["classifications"]}
    assert kinds["Case1"] == "saddle"
    assert kinds["Case2Plus"] in ("stable node", "stable focus")
    assert report["settle_times"]["equilibrium"] is not None


def test_reproducible_bytes(tmp_path):
    for d in ("a", "b"):
        assert cli.run(scenario("sector_switching"), tmp_path / d) == 0
    for f in ("sector_switching_trajectory.csv", "sector_switching_barycentric.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    assert b"\r\n" not in (tmp_path / "a" / "sector_switching_trajectory.csv").read_bytes()


def test_swarm_out_overrides(tmp_path, monkeypatch):
    monkeypatch.setenv("SWARM_OUT", str(tmp_path / "env"))
    assert cli.run(scenario("fig_sigma3"), tmp_path / "arg") == 0
    assert (tmp_path / "env" / "report.json").exists()
    assert not (tmp_path / "arg").exists()


def _write(tmp_path, doc):
    path = tmp_path / "s.json"
    path.write_text(json.dumps(doc))
    return path


def test_unknown_model_exit_2(tmp_path, capsys):
    doc = {"model": "lattice", "params": {}, "init": [1, 0, 0]}
    assert cli.run(_write(tmp_path, doc), tmp_path / "o") == 2
    assert "/model" in capsys.readouterr().err


def test_schema_error_has_pointer(tmp_path, capsys):
    doc = json.loads(Path(scenario("fig_sigma3")).read_text())
    doc["integrator"]["step"] = -1
    assert cli.run(_write(tmp_path, doc), tmp_path / "o") == 2
    assert "/integrator/step" in capsys.readouterr().err


def test_missing_class_exit_2(tmp_path, capsys):
    doc = json.loads(Path(scenario("fig_micromacro")).read_text())
    doc["init"] = {"2": [1, 0, 0], "99": [0, 1, 0]}
    assert cli.run(_write(tmp_path, doc), tmp_path / "o") == 2
    assert "/init/99" in capsys.readouterr().err


def test_off_simplex_init_exit_2(tmp_path):
    doc = json.loads(Path(scenario("fig_sigma3")).read_text())
    doc["init"] = [0.5, 0.6, 0.0]
    assert cli.run(_write(tmp_path, doc), tmp_path / "o") == 2


def test_numerical_failure_exit_3(tmp_path):
    doc = json.loads(Path(scenario("fig_micromacro")).read_text())
    doc["params"] = {"r": 5.0, "sigma": 50.0, "alpha": 5.0, "gamma": 5.0}
    doc["integrator"] = {"step": 1.0, "horizon": 10.0}
    assert cli.run(_write(tmp_path, doc), tmp_path / "o") == 3


def test_validate_scenario_direct():
    with pytest.raises(ValidationError, match="/network"):
        cli.validate_scenario({"model": "micro_macro", "params": {}, "init": [1, 0, 0]})


def test_equilibria_subcommand(capsys):
    code = cli.main(["equilibria", "--params", '{"r": 1, "sigma": 0.375, "alpha": 0.2, "gamma": 0.3}'])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    c3 = [e for e in out["equilibria"] if e["case"] == "Case3"][0]
    assert c3["valid"] and c3["point"] == pytest.approx([0.4, 0.4, 0.2])


def test_threshold_subcommand(capsys):
    assert cli.main(["threshold", "--params", '{"r": 1, "sigma": 0, "alpha": 0.2, "gamma": 0.3}']) == 0
    assert json.loads(capsys.readouterr().out)["sigma_star"] == pytest.approx(0.375)
    assert cli.main(["threshold", "--params", '{"r": 1, "sigma": 0, "alpha": 1, "gamma": 0.3}']) == 2


def test_spr_subcommand(capsys, tmp_path):
    f = tmp_path / "p.json"
    f.write_text('{"r": 1, "sigma": 0, "alpha": 0.1, "gamma": 0.2}')
    assert cli.main(["spr-check", "--params", str(f), "--sector", "2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["hurwitz"]["hurwitz"] and out["spr"]["spr"] and out["kyp"]["found"]
    assert cli.main(["spr-check", "--params", '{"gamma1": 0.2, "gamma2": 0.3, "sigma": 3}']) == 0
    assert json.loads(capsys.readouterr().out)["positive_real"]["positive_real"]


def test_sweep(tmp_path, capsys):
    d = tmp_path / "scen"
    d.mkdir()
    for name in ("fig_sigma3", "unstructured_deadlock"):
        (d / f"{name}.json").write_text(Path(scenario(name)).read_text())
    assert cli.main(["sweep", "--dir", str(d), "--out", str(tmp_path / "out"), "--jobs", "2"]) == 0
    assert (tmp_path / "out" / "fig_sigma3" / "report.json").exists()
    assert (tmp_path / "out" / "unstructured_deadlock" / "report.json").exists()
