import csv
import hashlib
import json

import pytest

from fracprox import catalog_problem, run_concave
from fracprox.cli import main
from fracprox.config import ConfigError, build_problem, parse_config
from fracprox.traceio import read_trace_csv, trace_to_csv

ORACLE = {"P1": {"n_points_per_dim": 100001}, "P2": {"n_points_per_dim": 1001, "refine": 2},
          "P3": {"n_points_per_dim": 100001}, "P4": {"n_points_per_dim": 100001}}


def write_cfg(tmp_path, name="P1", algorithm="concave", oracle=True, **solver):
    cfg = {"problem": name, "solver": {"algorithm": algorithm, **solver}}
    if oracle:
        cfg["oracle"] = ORACLE[name]
    path = tmp_path / f"{name}-{algorithm}.json"
    path.write_text(json.dumps(cfg))
    return path


@pytest.mark.parametrize("name, algorithm", [("P1", "concave"), ("P2", "concave"),
                                             ("P3", "convex"), ("P4", "concave"),
                                             ("P1", "dinkelbach")])
def test_solve_verify_roundtrip(tmp_path, name, algorithm):
    cfg = write_cfg(tmp_path, name, algorithm)
    out, summ, rep = tmp_path / "t.csv", tmp_path / "s.json", tmp_path / "r.json"
    assert main(["solve", "--config", str(cfg), "--out", str(out), "--summary", str(summ)]) == 0
    assert main(["verify", "--config", str(cfg), "--trace", str(out), "--report", str(rep)]) == 0
    report = json.loads(rep.read_text())
    assert report["passed"]


def test_solve_p1_outputs(tmp_path):
    cfg = write_cfg(tmp_path)
    out, summ = tmp_path / "t.csv", tmp_path / "s.json"
    main(["solve", "--config", str(cfg), "--out", str(out), "--summary", str(summ)])
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["k", "theta", "eta", "f_val", "g_val", "step_norm", "residual_norm", "x0"]
    assert len(rows) == 501
    s = json.loads(summ.read_text())
    assert {"theta_final", "x_final", "termination", "iterations", "wall_time"} <= set(s)
    assert s["theta_final"] == pytest.approx(0.0662, abs=1e-4)


def test_p2_has_two_coordinate_columns(tmp_path):
    cfg = write_cfg(tmp_path, "P2", oracle=False, max_iter=5)
    out = tmp_path / "t.csv"
    main(["solve", "--config", str(cfg), "--out", str(out)])
    assert out.read_text().splitlines()[0].endswith(",x0,x1")


def test_p4_zero_termination(tmp_path):
    cfg = write_cfg(tmp_path, "P4")
    summ = tmp_path / "s.json"
    assert main(["solve", "--config", str(cfg), "--summary", str(summ)]) == 0
    assert json.loads(summ.read_text())["termination"] == "OptimalValueZero"


def test_safeguard_violation_exit_1(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "P3", "convex", eta_policy={"eta": 3.0})
    assert main(["solve", "--config", str(cfg)]) == 1
    assert "eta_1 * theta_1 < 1/L" in capsys.readouterr().err


def test_bad_config_exit_1(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"problem": "P1", "solver": {"bogus": 1}}))
    assert main(["solve", "--config", str(path)]) == 1
    path.write_text("{not json")
    assert main(["solve", "--config", str(path)]) == 1


def test_hypothesis_violation_exit_2(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"problem": "P1", "x0": [2.0]}))
    assert main(["solve", "--config", str(path)]) == 2


def test_io_error_exit_3(tmp_path):
    cfg = write_cfg(tmp_path, oracle=False, max_iter=3)
    assert main(["solve", "--config", str(cfg), "--out", str(tmp_path / "no" / "t.csv")]) == 3
    assert main(["solve", "--config", str(tmp_path / "missing.json")]) == 3


def test_tampered_trace_exit_4(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "t.csv"
    main(["solve", "--config", str(cfg), "--out", str(out)])
    rows = list(csv.reader(out.open()))
    rows[3][1] = "0.3"  # theta_3 jumps above theta_2
    with out.open("w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)
    rep = tmp_path / "r.json"
    assert main(["verify", "--config", str(cfg), "--trace", str(out), "--report", str(rep)]) == 4
    assert not json.loads(rep.read_text())["passed"]


def test_convex_trace_under_concave_config_exit_1(tmp_path, capsys):
    out = tmp_path / "t.csv"
    main(["solve", "--config", str(write_cfg(tmp_path, "P3", "convex", max_iter=20)),
          "--out", str(out)])
    assert main(["verify", "--config", str(write_cfg(tmp_path, "P1")),
                 "--trace", str(out)]) == 1
    assert "convex" in capsys.readouterr().err


def test_verify_reports_tightness(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "t.csv"
    main(["solve", "--config", str(cfg), "--out", str(out)])
    capsys.readouterr()
    main(["verify", "--config", str(cfg), "--trace", str(out)])
    assert "rate_bound tightness=" in capsys.readouterr().out


def test_solve_is_byte_deterministic(tmp_path):
    cfg = write_cfg(tmp_path, "P2", oracle=False)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["solve", "--config", str(cfg), "--out", str(a)])
    main(["solve", "--config", str(cfg), "--out", str(b)])
    assert hashlib.sha256(a.read_bytes()).digest() == hashlib.sha256(b.read_bytes()).digest()


def test_csv_roundtrip_is_exact(tmp_path):
    t = run_concave(catalog_problem("P2"))
    path = tmp_path / "t.csv"
    path.write_text(trace_to_csv(t))
    back = read_trace_csv(path, t.x0)
    assert back.algorithm == "concave"
    assert all((a.theta, a.eta, a.f_val, a.g_val, a.step_norm) ==
               (b.theta, b.eta, b.f_val, b.g_val, b.step_norm) and (a.x == b.x).all()
               for a, b in zip(t.records, back.records))


@pytest.mark.parametrize("name", ["P1", "P4"])
def test_compare(tmp_path, capsys, name):
    rep = tmp_path / "c.json"
    assert main(["compare", "--config", str(write_cfg(tmp_path, name, oracle=False)),
                 "--report", str(rep)]) == 0
    res = json.loads(rep.read_text())
    assert res["theta_diff"] < 1e-5
    rows = {r["algorithm"]: r for r in res["rows"]}
    if rows["dinkelbach"]["prox_evaluations"] <= rows["concave"]["prox_evaluations"]:
        assert "note" in res
    assert "prox" in capsys.readouterr().out


def test_compare_rejects_convex_problem(tmp_path):
    assert main(["compare", "--config", str(write_cfg(tmp_path, "P3", "convex"))]) == 1


def test_oracle_command(tmp_path, capsys):
    assert main(["oracle", "--config", str(write_cfg(tmp_path, "P3", "convex"))]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["x_bar"][0] == pytest.approx(1.10499, abs=1e-4)


def test_oracle_unsupported_dimension(tmp_path):
    cfg = {"problem": {"f": {"kind": "zero"}, "S": {"kind": "box", "params":
                       {"lo": [0, 0, 0, 0], "hi": [1, 1, 1, 1]}},
                       "g": {"kind": "constant", "params": {"value": 1.0}},
                       "L": 1.0, "M": 1.0, "curvature": "concave"},
           "x0": [0, 0, 0, 0]}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    assert main(["oracle", "--config", str(path)]) == 1


def test_print_config_lists_defaults(capsys):
    assert main(["--print-config"]) == 0
    cfg = json.loads(capsys.readouterr().out)
    assert cfg["solver"]["max_iter"] == 500
    assert cfg["x0"] == [0.0]


def test_sweep_keys_by_digest(tmp_path):
    cfgs = [write_cfg(tmp_path, "P1", oracle=False, max_iter=20),
            write_cfg(tmp_path, "P4", oracle=False)]
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", *map(str, cfgs), "--out", str(out), "--jobs", "2"]) == 0
    index = json.loads((out / "index.json").read_text())
    for entry in index.values():
        assert (out / f"{entry['key']}.csv").exists()


def test_seed_env_override(monkeypatch):
    monkeypatch.setenv("FRACPROX_SEED", "7")
    assert parse_config({"problem": "P1", "seed": 1}).seed == 7
    monkeypatch.setenv("FRACPROX_SEED", "x")
    with pytest.raises(ConfigError):
        parse_config({"problem": "P1"})


def test_inline_problem_matches_catalog():
    cfg = parse_config({"problem": {
        "f": {"kind": "abs_shifted", "params": {"center": 0.7, "offset": 0.1}},
        "S": {"kind": "interval", "params": {"lo": 0.0, "hi": 1.0}},
        "g": {"kind": "concave_quad", "params": {"a": 1.0, "level": 2.0}},
        "L": 2.0, "M": 2.0, "curvature": "concave"}, "x0": [0.0]})
    a = run_concave(build_problem(cfg))
    b = run_concave(catalog_problem("P1"))
    assert trace_to_csv(a) == trace_to_csv(b)


def test_config_rejections():
    with pytest.raises(ConfigError):
        parse_config({"problem": "P9"})
    with pytest.raises(ConfigError):
        parse_config({"problem": "P1", "extra": 1})
    with pytest.raises(ConfigError):
        build_problem(parse_config({"problem": {
            "f": {"kind": "l1", "params": {"centre": 0}}, "S": {"kind": "full"},
            "g": {"kind": "constant", "params": {"value": 1}}, "L": 1, "M": 1,
            "curvature": "convex"}, "x0": [0.0]}))
