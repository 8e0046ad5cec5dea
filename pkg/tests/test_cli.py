import json

import numpy as np
import pytest

from nncondense.cli import main


@pytest.fixture
def data(tmp_path, rng):
    X = np.r_[rng.normal(0, 0.05, (30, 2)), rng.normal(2, 0.05, (30, 2))]
    y = np.r_[np.ones(30), 2 * np.ones(30)].astype(int)
    p = tmp_path / "d.csv"
    np.savetxt(p, np.c_[X, y], delimiter=",", fmt="%.6f")
    return p


def test_condense_classify_verify(tmp_path, data, capsys):
    out = tmp_path / "s.json"
    rc = main(["condense", str(data), "--label-map", "1:1,2:-1", "--metric", "l1", "--heuristic", "-o", str(out), "--dump-net", str(tmp_path / "n.json")])
    assert rc == 0 and json.loads(out.read_text())["source"] == "heuristic"
    assert "levels" in json.loads((tmp_path / "n.json").read_text())
    q = tmp_path / "q.csv"
    q.write_text("0,0\n2,2\n")
    assert main(["classify", str(out), str(q), "-o", str(tmp_path / "p.csv")]) == 0
    assert (tmp_path / "p.csv").read_text().split() == ["1", "-1"]
    assert main(["verify", str(out), str(data), "--label-map", "1:1,2:-1", "--metric", "l1"]) == 0


def test_verify_rejects_bad_set(tmp_path, data):
    s = tmp_path / "bad.json"
    s.write_text(json.dumps({"members": [0], "source": "net", "verified": False, "n": 60}))
    assert main(["verify", str(s), str(data), "--label-map", "1:1,2:-1"]) == 1


def test_input_errors_exit_one(tmp_path):
    assert main(["condense", str(tmp_path / "missing.csv")]) == 1
    p = tmp_path / "z.csv"
    p.write_text("0,0,1\n0,0,2\n")
    assert main(["condense", str(p), "--label-map", "1:1,2:-1"]) == 1


def test_bounds_table(capsys):
    assert main(["bounds", "--n", "1000", "--subset-size", "10", "--epsilon", "0.01"]) == 0
    out = capsys.readouterr().out
    assert "consistent subset" in out and "VacuousBound" in out


def test_genharness(tmp_path, capsys):
    lc = tmp_path / "lc.json"
    lc.write_text(json.dumps({"U": 1, "V": 1, "A": 1, "B": 1, "edges": [{"u": 0, "v": 0, "pairs": [[0, 0]]}]}))
    assert main(["genharness", str(lc), "-o", str(tmp_path / "inst"), "--verify"]) == 0
    assert (tmp_path / "inst" / "matrix.csv").exists()
    assert main(["genharness", "--gadget", "3", "-o", str(tmp_path / "g")]) == 0


def test_experiment_with_config(tmp_path, data):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"name": "toy", "sample_size": 20, "trials": 2, "dataset": {"path": str(data), "label_map": {"1": 1, "2": -1}}}))
    rep = tmp_path / "r.json"
    assert main(["experiment", str(cfg), "-o", str(rep), "--trials", "1"]) == 0
    assert json.loads(rep.read_text())["aggregate"]["trials"] == 1
