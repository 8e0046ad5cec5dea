"""Command-line entry point.

Exit codes: 0 success, 1 input error, 2 internal invariant violation.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bounds as B
from .classify import Classifier, predict_many
from .condense import CondensedSet, condense, prune_heuristic, verify_consistent
from .errors import InconsistentInput, InputError, InvariantViolation, NncError
from .harness import PRESETS, ExperimentConfig, preset_config, run_experiment
from .metric import load, read_labeled_csv, read_matrix_csv, read_table


def _label_map(text: str | None) -> dict:
    if not text:
        return {}
    out = {}
    for item in text.split(","):
        raw, _, lab = item.partition(":")
        if not lab:
            raise InputError(f"bad label mapping {item!r}; expected RAW:+1 or RAW:-1")
        out[raw.strip()] = int(lab)
    return out


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("data", help="feature CSV (one point per row) or distance-matrix CSV with --labels")
    p.add_argument("--labels", help="labels file; switches to explicit distance-matrix input")
    p.add_argument("--metric", default="l2", help="l1, l2 or linf (ignored for matrix input)")
    p.add_argument("--label-column", type=int, default=-1)
    p.add_argument("--label-map", help="RAW:LABEL pairs, e.g. '1:1,2:-1'")
    p.add_argument("--default-label", type=int)
    p.add_argument("--delimiter", default=",", help="',' or 'whitespace'")
    p.add_argument("--skip-header", action="store_true")


def _read_data(args):
    if args.labels:
        M, y = read_matrix_csv(args.data, args.labels)
        return load(M, y, "explicit"), None, y
    X, y = read_labeled_csv(
        args.data,
        label_column=args.label_column,
        label_map=_label_map(args.label_map),
        default_label=args.default_label,
        delimiter=args.delimiter,
        skip_header=args.skip_header,
    )
    return load(X, y, args.metric), X, y


def cmd_condense(args) -> int:
    pset, X, y = _read_data(args)
    out = condense(pset, slow=args.slow)
    if args.dump_net:
        from .nets import build_hierarchy

        doc = build_hierarchy(pset).to_dict() if not args.slow else {"net": out.to_dict()}
        Path(args.dump_net).write_text(json.dumps(doc))
    if args.heuristic:
        threshold = out.meta["radius"] if args.threshold == "radius" else None
        pruned = prune_heuristic(out.members, pset, out.meta["gamma"], threshold=threshold, check_input=False)
        pruned.meta.update({k: v for k, v in out.meta.items() if k not in pruned.meta})
        pruned.meta["net_size"] = len(out)
        out = pruned
    out.meta["metric"] = pset.metric_kind
    if X is not None:
        out.meta["member_points"] = X[out.members].tolist()
        out.meta["member_labels"] = [int(v) for v in y[out.members]]
    if args.out:
        out.save(args.out)
    print(f"{len(out)} of {out.n} points kept ({100 * out.retention:.2f}%), gamma={out.meta['gamma']:.6g}, source={out.source}")
    return 0


def cmd_classify(args) -> int:
    cs = CondensedSet.load(args.set)
    if "member_points" not in cs.meta:
        raise InputError("saved set has no member coordinates; it was built from a distance matrix")
    P = np.asarray(cs.meta["member_points"], dtype=float)
    ref = load(P, cs.meta["member_labels"], cs.meta.get("metric", "l2")) if len(P) > 1 else None
    if ref is None:
        raise InputError("need at least two members to classify")
    rows, _ = read_table(args.test, delimiter=args.delimiter, skip_header=args.skip_header)
    X = np.asarray(rows, dtype=float)
    if args.has_labels:
        X = X[:, :-1]
    pred = predict_many(Classifier.full(ref), X)
    lines = "\n".join(str(int(v)) for v in pred) + "\n"
    if args.out:
        Path(args.out).write_text(lines)
    else:
        sys.stdout.write(lines)
    return 0


def cmd_bounds(args) -> int:
    rows = []

    def attempt(name, fn):
        try:
            rows.append((name, f"{fn():.6g}"))
        except InputError as e:
            rows.append((name, f"n/a ({type(e).__name__})"))

    n, k, eps, delta = args.n, args.subset_size, args.epsilon, args.delta
    attempt("consistent subset", lambda: B.bound_consistent(n, k, delta))
    attempt("eps-consistent subset", lambda: B.bound_eps_consistent(n, k, eps, delta))
    attempt("net-size corollary", lambda: B.corollary_bound(n, eps, delta, args.gamma, args.ddim))
    attempt("fat-shattering margin bound", lambda: B.gkk10_bound(n, eps, delta, args.gamma, args.ddim))
    w = max(len(r[0]) for r in rows)
    for name, val in rows:
        print(f"{name:<{w}}  {val}")
    return 0


def cmd_experiment(args) -> int:
    if args.preset:
        cfg = preset_config(args.preset, args.data_dir or ".")
    elif args.config:
        cfg = ExperimentConfig.from_file(args.config)
    else:
        raise InputError("give a config file or --preset")
    for key in ("trials", "jobs", "sample_size"):
        if getattr(args, key) is not None:
            setattr(cfg, key, getattr(args, key))
    if args.seed is not None:
        cfg.rng_seed = args.seed
    if args.slow_net is not None:
        cfg.net_method = "bruteforce" if args.slow_net else "hierarchy"
    if args.no_heuristic:
        cfg.heuristic = False
    if args.dump_dir:
        cfg.dump_dir = args.dump_dir
    cfg.__post_init__()
    report = run_experiment(cfg, report_path=args.out)
    print(report.table())
    return 0


def cmd_genharness(args) -> int:
    from . import hardness as H

    if args.gadget:
        g = H.build_gadget(args.gadget, args.D, args.gamma)
        inst = g.instance
    else:
        if not args.labelcover:
            raise InputError("give a Label Cover JSON file or --gadget W")
        inst = H.reduce_labelcover_to_wnnc(H.LabelCoverInstance.from_json(args.labelcover), D=args.D)
        if args.unweighted:
            inst = H.reduce_wnnc_to_nnc(inst, D=args.D)
    inst.save(args.out)
    print(f"wrote {inst.n} points to {args.out}")
    if args.verify:
        if args.gadget:
            for k, v in H.certify_gadget(args.gadget, args.D, args.gamma).items():
                print(f"{k}: {v}")
        else:
            rep = H.verify_reduction_claims(inst)
            print("\n".join(rep.lines()))
            if not rep.passed:
                return 2
    return 0


def cmd_verify(args) -> int:
    cs = CondensedSet.load(args.set)
    pset, _, _ = _read_data(args)
    if cs.n != pset.n:
        raise InputError(f"set was built on {cs.n} points, data has {pset.n}")
    v = verify_consistent(cs.members, pset, k=args.k)
    if v:
        print(f"consistent: {len(cs)} members cover all {pset.n} points")
        return 0
    raise InconsistentInput(f"{len(v.violations)} points violated, first: {v.violations[:10].tolist()}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nncondense", description="Nearest-neighbor condensing toolkit")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("condense", help="compute a consistent subset")
    _add_data_args(p)
    p.add_argument("--slow", action="store_true", help="greedy quadratic net instead of the hierarchy")
    p.add_argument("--heuristic", action="store_true", help="prune the net afterwards")
    p.add_argument("--threshold", choices=("gamma", "radius"), default="gamma", help="pruning slack")
    p.add_argument("--dump-net", metavar="PATH")
    p.add_argument("-o", "--out", metavar="PATH")
    p.set_defaults(func=cmd_condense)

    p = sub.add_parser("classify", help="1-NN predictions from a saved set")
    p.add_argument("set")
    p.add_argument("test", help="CSV of query vectors")
    p.add_argument("--has-labels", action="store_true", help="test CSV carries a trailing label column")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--skip-header", action="store_true")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("bounds", help="tabulate generalization bounds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--subset-size", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--ddim", type=float, default=2.0)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("experiment", help="repeated-sampling compression experiment")
    p.add_argument("config", nargs="?", help="TOML or JSON config")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--data-dir")
    p.add_argument("--trials", type=int)
    p.add_argument("--sample-size", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--seed", type=int)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--slow-net", dest="slow_net", action="store_true", default=None)
    g.add_argument("--fast-net", dest="slow_net", action="store_false")
    p.add_argument("--no-heuristic", action="store_true")
    p.add_argument("--dump-dir")
    p.add_argument("-o", "--out", help="JSON report path")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("genharness", help="generate hardness instances")
    p.add_argument("labelcover", nargs="?")
    p.add_argument("--gadget", type=int, metavar="W")
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--D", type=int, default=2)
    p.add_argument("--unweighted", action="store_true", help="expand weights into gadgets")
    p.add_argument("--verify", action="store_true")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.set_defaults(func=cmd_genharness)

    p = sub.add_parser("verify", help="check a saved set for consistency")
    p.add_argument("set")
    _add_data_args(p)
    p.add_argument("-k", type=int, default=1)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except InvariantViolation as e:
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    except (InputError, OSError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except NncError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
