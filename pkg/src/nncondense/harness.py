"""Repeated-sampling compression experiments.

Each trial draws disjoint, label-balanced train and test samples from a
pool, condenses the training sample, prunes it, and compares 1-NN test
accuracy of the pruned set against the full training sample.

Randomness is counter-based: trial ``t`` (attempt ``a``) uses
``numpy.random.default_rng(SeedSequence([rng_seed, t, a]))``, so trials can
run in any order or in parallel and still reproduce bit-for-bit.
"""
from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .classify import Classifier, predict_many
from .condense import prune_heuristic, verify_consistent
from .errors import InputError, InvariantViolation, MissingClass, PoolTooSmall, ZeroMargin
from .metric import LabeledPointSet, load, metric_name, read_labeled_csv, scaled_margin
from .nets import build_hierarchy, build_net_bruteforce, extract_terminal_net

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

log = logging.getLogger(__name__)


@dataclass
class DatasetFormat:
    path: str | list[str]
    delimiter: str | None = ","
    label_column: int = -1
    feature_columns: list[int] | None = None
    label_map: dict = field(default_factory=dict)
    default_label: int | None = None
    class_pair: list[str] | None = None
    skip_header: bool = False


@dataclass
class ExperimentConfig:
    name: str
    dataset: DatasetFormat
    sample_size: int
    trials: int = 50
    metric_kind: str = "l1"
    rng_seed: int = 0
    net_method: str = "bruteforce"
    heuristic: bool = True
    estimate_ddim: bool = False
    dump_dir: str | None = None
    jobs: int = 1
    max_resamples: int = 50

    def __post_init__(self):
        if self.sample_size < 2 or self.sample_size % 2:
            raise InputError("sample_size must be even and at least 2")
        if self.trials < 1:
            raise InputError("trials must be at least 1")
        if self.net_method not in ("bruteforce", "hierarchy"):
            raise InputError("net_method must be 'bruteforce' or 'hierarchy'")
        self.metric_kind = metric_name(self.metric_kind)

    @classmethod
    def from_dict(cls, d: dict, base_dir=None) -> ExperimentConfig:
        d = dict(d)
        ds = dict(d.pop("dataset"))
        paths = ds["path"] if isinstance(ds["path"], list) else [ds["path"]]
        if base_dir is not None:
            paths = [str((Path(base_dir) / p)) if not Path(p).is_absolute() else p for p in paths]
        ds["path"] = paths if len(paths) > 1 else paths[0]
        if "metric" in d:
            d["metric_kind"] = d.pop("metric")
        if "seed" in d:
            d["rng_seed"] = d.pop("seed")
        return cls(dataset=DatasetFormat(**ds), **d)

    @classmethod
    def from_file(cls, path) -> ExperimentConfig:
        path = Path(path)
        if path.suffix == ".toml":
            data = tomllib.loads(path.read_text())
        else:
            data = json.loads(path.read_text())
        return cls.from_dict(data, base_dir=path.parent)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrialRecord:
    trial: int
    n: int
    net_size: int
    heuristic_size: int
    pct_after_net: float
    pct_after_heuristic: float
    acc_full: float
    acc_net: float
    acc_compressed: float
    gamma: float
    ddim_estimate: float | None
    resamples: int
    consistent: bool
    timings: dict = field(default_factory=dict)

    @property
    def acc_delta(self) -> float:
        return self.acc_compressed - self.acc_full

    def to_dict(self, with_timings: bool = False) -> dict:
        d = asdict(self)
        d["acc_delta"] = self.acc_delta
        if not with_timings:
            d.pop("timings")
        return d


@dataclass
class CompressionReport:
    name: str
    sample_size: int
    records: list
    complete: bool = True

    @property
    def aggregate(self) -> dict:
        if not self.records:
            return {}
        recs = sorted(self.records, key=lambda r: r.trial)

        def mean(key):
            return float(np.mean([getattr(r, key) for r in recs]))

        return {
            "trials": len(recs),
            "pct_after_net": mean("pct_after_net"),
            "pct_after_heuristic": mean("pct_after_heuristic"),
            "acc_full": mean("acc_full"),
            "acc_compressed": mean("acc_compressed"),
            "acc_delta": float(np.mean([r.acc_delta for r in recs])),
            "gamma": mean("gamma"),
            "resamples": int(sum(r.resamples for r in recs)),
        }

    def to_dict(self) -> dict:
        recs = sorted(self.records, key=lambda r: r.trial)
        return {
            "name": self.name,
            "sample_size": self.sample_size,
            "complete": self.complete,
            "aggregate": self.aggregate,
            "records": [r.to_dict() for r in recs],
            "timings": {str(r.trial): r.timings for r in recs},
        }

    def table(self) -> str:
        a = self.aggregate
        head = f"{'data set':<24}{'original sample':>17}{'% after net':>14}{'% after heuristic':>20}{'+/- accuracy':>15}"
        if not a:
            return head
        row = (
            f"{self.name:<24}{self.sample_size:>17d}{a['pct_after_net']:>14.2f}"
            f"{a['pct_after_heuristic']:>20.2f}{a['acc_delta']:>+15.4f}"
        )
        return head + "\n" + row

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))


def ingest(config: ExperimentConfig) -> LabeledPointSet:
    """Read the configured dataset into a normalized pool with +/-1 labels."""
    fmt = config.dataset
    paths = fmt.path if isinstance(fmt.path, list) else [fmt.path]
    Xs, ys = [], []
    for p in paths:
        X, y = read_labeled_csv(
            p,
            label_column=fmt.label_column,
            feature_columns=fmt.feature_columns,
            label_map=fmt.label_map,
            default_label=fmt.default_label,
            keep_labels=fmt.class_pair,
            delimiter=fmt.delimiter,
            skip_header=fmt.skip_header,
        )
        Xs.append(X)
        ys.append(y)
    X = np.vstack(Xs)
    y = np.concatenate(ys)
    for lab in (1, -1):
        if not np.any(y == lab):
            raise MissingClass(f"no points labeled {lab:+d} after filtering")
    return load(X, y, config.metric_kind, approximate_diameter=True, approximate_threshold=5000)


def _draw(pool: LabeledPointSet, half: int, rng: np.random.Generator):
    pos, neg = pool.positives, pool.negatives
    if len(pos) < 2 * half or len(neg) < 2 * half:
        raise PoolTooSmall(
            f"need {2 * half} points per label for disjoint train/test samples, pool has {len(pos)}/{len(neg)}"
        )
    pp = rng.permutation(pos)[: 2 * half]
    nn = rng.permutation(neg)[: 2 * half]
    train = np.sort(np.concatenate([pp[:half], nn[:half]]))
    test = np.sort(np.concatenate([pp[half:], nn[half:]]))
    return train, test


def run_trial(pool: LabeledPointSet, config: ExperimentConfig, trial_index: int) -> TrialRecord:
    """One draw-condense-prune-evaluate cycle; resamples draws whose margin is zero."""
    half = config.sample_size // 2
    raw = pool.raw_points()
    timings = {}
    for attempt in range(config.max_resamples + 1):
        rng = np.random.default_rng(np.random.SeedSequence([config.rng_seed, trial_index, attempt]))
        train, test = _draw(pool, half, rng)
        t0 = time.perf_counter()
        S = load(raw[train], pool.labels[train], config.metric_kind)
        try:
            gamma = scaled_margin(S).gamma
        except ZeroMargin:
            continue
        timings["load_margin"] = time.perf_counter() - t0
        break
    else:
        raise ZeroMargin(f"trial {trial_index}: every draw had coincident opposite-labeled points")

    t0 = time.perf_counter()
    ddim = None
    if config.net_method == "hierarchy":
        h = build_hierarchy(S)
        net = extract_terminal_net(h)
        if config.estimate_ddim and len(h.levels) >= 2:
            from .bounds import estimate_ddim

            ddim = estimate_ddim(h).value
    else:
        net = build_net_bruteforce(S, gamma)
        if config.estimate_ddim:
            from .bounds import estimate_ddim

            ddim = estimate_ddim(build_hierarchy(S, gamma)).value
    timings["net"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if config.heuristic:
        pruned = prune_heuristic(net.members, S, gamma, check_input=False).members
    else:
        pruned = np.sort(net.members)
    timings["heuristic"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    consistent = bool(verify_consistent(pruned, S))
    if not consistent:
        raise InvariantViolation(f"trial {trial_index}: compressed set is not consistent")
    Xt, yt = raw[test], pool.labels[test]
    acc_full = float(np.mean(predict_many(Classifier.full(S), Xt) == yt))
    acc_net = float(np.mean(predict_many(Classifier(S, net.members), Xt) == yt))
    acc_comp = float(np.mean(predict_many(Classifier(S, pruned), Xt) == yt))
    timings["evaluate"] = time.perf_counter() - t0

    if config.dump_dir:
        out = Path(config.dump_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"trial_{trial_index:04d}.json").write_text(
            json.dumps({"train": train.tolist(), "net": net.members.tolist(), "pruned": pruned.tolist()})
        )

    n = S.n
    return TrialRecord(
        trial=trial_index,
        n=n,
        net_size=len(net.members),
        heuristic_size=len(pruned),
        pct_after_net=100.0 * len(net.members) / n,
        pct_after_heuristic=100.0 * len(pruned) / n,
        acc_full=acc_full,
        acc_net=acc_net,
        acc_compressed=acc_comp,
        gamma=gamma,
        ddim_estimate=ddim,
        resamples=attempt,
        consistent=consistent,
        timings=timings,
    )


_WORKER_POOL: LabeledPointSet | None = None


def _init_worker(pool):
    global _WORKER_POOL
    _WORKER_POOL = pool


def _worker(args):
    config, t = args
    return run_trial(_WORKER_POOL, config, t)


def run_experiment(config: ExperimentConfig, pool: LabeledPointSet | None = None, report_path=None) -> CompressionReport:
    """Run all trials and aggregate. Partial results are written on interrupt when ``report_path`` is set."""
    if pool is None:
        pool = ingest(config)
    report = CompressionReport(config.name, config.sample_size, [])
    try:
        if config.jobs > 1:
            with ProcessPoolExecutor(config.jobs, initializer=_init_worker, initargs=(pool,)) as ex:
                for rec in ex.map(_worker, [(config, t) for t in range(config.trials)]):
                    report.records.append(rec)
        else:
            for t in range(config.trials):
                report.records.append(run_trial(pool, config, t))
                log.info("trial %d done", t)
    except KeyboardInterrupt:
        report.complete = False
        if report_path:
            report.write(report_path)
        raise
    if report_path:
        report.write(report_path)
    return report


# Layouts of the public UCI files; paths are relative to a data directory.
PRESETS = {
    "skin": dict(
        name="Skin Segmentation",
        sample_size=10000,
        dataset=dict(path="Skin_NonSkin.txt", delimiter="whitespace", label_map={"1": 1, "2": -1}),
    ),
    "shuttle": dict(
        name="Statlog Shuttle",
        sample_size=2000,
        dataset=dict(path=["shuttle.trn", "shuttle.tst"], delimiter="whitespace", label_map={"1": 1}, default_label=-1),
    ),
    "covtype-1v4": dict(
        name="Covertype 1 vs. 4",
        sample_size=2000,
        dataset=dict(path="covtype.data", label_map={"1": 1, "4": -1}, class_pair=["1", "4"]),
    ),
    "covtype-4v6": dict(
        name="Covertype 4 vs. 6",
        sample_size=2000,
        dataset=dict(path="covtype.data", label_map={"4": 1, "6": -1}, class_pair=["4", "6"]),
    ),
    "covtype-4v7": dict(
        name="Covertype 4 vs. 7",
        sample_size=2000,
        dataset=dict(path="covtype.data", label_map={"4": 1, "7": -1}, class_pair=["4", "7"]),
    ),
}


def preset_config(key: str, data_dir, **overrides) -> ExperimentConfig:
    d = {k: (dict(v) if isinstance(v, dict) else v) for k, v in PRESETS[key].items()}
    d.update(overrides)
    return ExperimentConfig.from_dict(d, base_dir=data_dir)


def preset_available(key: str, data_dir) -> bool:
    p = PRESETS[key]["dataset"]["path"]
    paths = p if isinstance(p, list) else [p]
    return all((Path(data_dir) / q).exists() for q in paths)
