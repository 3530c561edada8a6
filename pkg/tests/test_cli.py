import json

import pytest

from linematch.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out.strip() else None), out.err


def test_gen_and_run(tmp_path, capsys):
    path = str(tmp_path / "lb.json")
    code, data, _ = run(capsys, "gen", "--family", "lb-k1", "--n", "4", "--eps", "1/100", "--out", path)
    assert code == 0 and data["items"][-1] == "299/100"
    code, data, _ = run(capsys, "run", "--algo", "ordermatch", "--instance", path, "--k", "1")
    assert code == 0
    assert data["cost"] == "299/100" and data["opt_cost_per_k"][0] == "1"
    code, data, _ = run(capsys, "run", "--algo", "optimal", "--instance", path)
    assert data["cost_per_k"] == data["opt_cost_per_k"]


def test_naive_anchors_on_pathology(tmp_path, capsys):
    path = str(tmp_path / "tb.json")
    run(capsys, "gen", "--family", "tiebreak-kgeq2", "--n", "5", "--out", path)
    code, data, _ = run(capsys, "run", "--algo", "ordermatch-naive", "--anchors", "1,5", "--instance", path)
    assert code == 0 and data["cost_per_k"][1] == "3497/500"  # 7 - 6/1000


def test_run_from_profile(tmp_path, capsys):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"rankings": [[1, 2, 3], [1, 2, 3], [1, 2, 3]]}))
    code, data, _ = run(capsys, "run", "--algo", "serial-dictatorship", "--profile", str(path))
    assert code == 0 and data["matching"] == [[1, 1], [2, 2], [3, 3]]
    code, _, err = run(capsys, "run", "--algo", "optimal", "--profile", str(path))
    assert code == 2 and "needs --instance" in err


def test_analyze(tmp_path, capsys):
    path = str(tmp_path / "r.json")
    run(capsys, "gen", "--family", "random", "--n", "6", "--seed", "4", "--out", path)
    code, data, _ = run(capsys, "analyze", "--instance", path)
    assert code == 0
    assert data["edge_bound_violations"] == []
    assert all(e["kind"] != "backward" for e in data["edges"])
    assert all(e["kind"] not in ("forward", "backward") for e in data["transformed_edges"])
    assert data["dot"].startswith("digraph")


@pytest.mark.parametrize("mode", ["optimal", "ranks1side", "zeroknowledge"])
def test_twosided(capsys, mode):
    code, data, _ = run(capsys, "twosided", "--mode", mode, "--n", "6", "--seed", "2")
    assert code == 0 and data["within_bound"]
    assert len(data["matching"]) == 6


def test_query_lb_writes_both_metrics(tmp_path, capsys):
    out = tmp_path / "w.json"
    code, data, _ = run(capsys, "gen", "--family", "query-lb", "--n", "5", "--queried", "1,2", "--out", str(out))
    assert code == 0 and out.exists() and (tmp_path / "w_bottom.json").exists()
    assert data["top"] != data["bottom"]


def test_eval(tmp_path, capsys):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text(f"families = random, lb-kgeq2\nsizes = 2..5\nrepetitions = 3\nreproducers = {tmp_path / 'r'}\n")
    code, data, _ = run(capsys, "eval", "--config", str(cfg), "--csv", str(tmp_path / "o.csv"))
    assert code == 0 and data["ok"] and (tmp_path / "o.csv").exists()
    assert data["max_ratio"]["lb-kgeq2/ordermatch/k=2"] == "1499/500"


def test_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{ nope")
    code, _, err = run(capsys, "run", "--algo", "ordermatch", "--instance", str(bad))
    assert code == 2 and "bad.json:1:3" in err
    code, _, err = run(capsys, "gen", "--family", "lb-k1", "--n", "1")
    assert code == 2
    prof = tmp_path / "p.json"
    prof.write_text(json.dumps({"rankings": [[1, 2, 3], [2, 3, 1], [3, 1, 2]]}))
    code, _, err = run(capsys, "run", "--algo", "ordermatch", "--profile", str(prof))
    assert code == 2 and "last choices" in err
