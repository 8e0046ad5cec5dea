import json

import numpy as np
import pytest

from nncondense.errors import InputError, MissingClass, ParseError, PoolTooSmall
from nncondense.harness import CompressionReport, ExperimentConfig, ingest, run_experiment, run_trial


def write_pool(path, rng, per_class=400, labels=("1", "2")):
    a = rng.normal(0, 0.02, (per_class, 3))
    b = rng.normal(1, 0.02, (per_class, 3))
    with open(path, "w") as f:
        for row in a:
            f.write(",".join(f"{v:.6f}" for v in row) + f",{labels[0]}\n")
        for row in b:
            f.write(",".join(f"{v:.6f}" for v in row) + f",{labels[1]}\n")


def config(path, **kw):
    d = dict(name="toy", sample_size=100, trials=3, dataset=dict(path=str(path), label_map={"1": 1, "2": -1}))
    d.update(kw)
    return ExperimentConfig.from_dict(d)


@pytest.fixture
def pool_file(tmp_path, rng):
    p = tmp_path / "pool.csv"
    write_pool(p, rng)
    return p


def test_config_validation(pool_file):
    with pytest.raises(InputError):
        config(pool_file, sample_size=7)
    with pytest.raises(InputError):
        config(pool_file, trials=0)


def test_config_from_toml(tmp_path, pool_file):
    (tmp_path / "c.toml").write_text(
        'name = "toy"\nsample_size = 10\nmetric = "l1"\n[dataset]\npath = "pool.csv"\nlabel_map = {"1" = 1, "2" = -1}\n'
    )
    cfg = ExperimentConfig.from_file(tmp_path / "c.toml")
    assert cfg.metric_kind == "l1" and cfg.dataset.path == str(pool_file)


def test_class_pair_filter(tmp_path, rng):
    p = tmp_path / "multi.csv"
    p.write_text("0,0,4\n0,1,6\n1,1,7\n2,2,4\n3,3,7\n")
    cfg = ExperimentConfig.from_dict(
        dict(name="c", sample_size=2, dataset=dict(path=str(p), label_map={"4": 1, "7": -1}, class_pair=["4", "7"]))
    )
    pool = ingest(cfg)
    assert pool.n == 4 and sorted(pool.labels.tolist()) == [-1, -1, 1, 1]


def test_missing_class_and_parse_error(tmp_path):
    p = tmp_path / "one.csv"
    p.write_text("0,0,4\n1,1,4\n")
    cfg = ExperimentConfig.from_dict(dict(name="c", sample_size=2, dataset=dict(path=str(p), label_map={"4": 1, "7": -1})))
    with pytest.raises(MissingClass):
        ingest(cfg)
    p.write_text("0,0,4\n1,oops,7\n")
    with pytest.raises(ParseError):
        ingest(cfg)


def test_two_cluster_trial(pool_file):
    cfg = config(pool_file)
    rec = run_trial(ingest(cfg), cfg, 0)
    assert rec.pct_after_net == pytest.approx(200 / cfg.sample_size)
    assert rec.acc_delta == 0.0 and rec.consistent
    assert 0 < rec.pct_after_heuristic <= rec.pct_after_net <= 100


def test_trial_determinism(pool_file):
    cfg = config(pool_file)
    pool = ingest(cfg)
    assert run_trial(pool, cfg, 2).to_dict() == run_trial(pool, cfg, 2).to_dict()
    assert run_trial(pool, cfg, 2).to_dict() != run_trial(pool, cfg, 3).to_dict()


def test_pool_too_small(pool_file):
    cfg = config(pool_file, sample_size=802)
    with pytest.raises(PoolTooSmall):
        run_trial(ingest(cfg), cfg, 0)


def test_single_trial_aggregate_equals_record(pool_file):
    cfg = config(pool_file, trials=1)
    rep = run_experiment(cfg)
    rec = rep.records[0]
    agg = rep.aggregate
    assert agg["pct_after_net"] == rec.pct_after_net and agg["acc_delta"] == rec.acc_delta


def test_report_is_reproducible_and_parallel_safe(tmp_path, pool_file):
    cfg = config(pool_file, sample_size=60, trials=4)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run_experiment(cfg, report_path=a)
    cfg.jobs = 2
    run_experiment(cfg, report_path=b)
    da, db = json.loads(a.read_text()), json.loads(b.read_text())
    da.pop("timings"), db.pop("timings")
    assert da == db
    assert "timings" not in da["records"][0]


def test_aggregate_order_independent(pool_file):
    cfg = config(pool_file, trials=3)
    rep = run_experiment(cfg)
    shuffled = CompressionReport(rep.name, rep.sample_size, rep.records[::-1])
    assert shuffled.aggregate == rep.aggregate
    assert "% after net" in rep.table()


def test_hierarchy_net_option(pool_file):
    cfg = config(pool_file, net_method="hierarchy", estimate_ddim=True)
    rec = run_trial(ingest(cfg), cfg, 0)
    assert rec.consistent and rec.ddim_estimate is not None
