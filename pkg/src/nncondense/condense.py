"""Consistent subsets: net-based condensing, the pruning heuristic,
consistency verification and an exhaustive optimum for small sets."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptySubset, InconsistentInput, InvariantViolation, TooFewLevels, TooLarge
from .metric import LabeledPointSet, scaled_margin
from .nets import build_hierarchy, build_net_bruteforce, ceil_log2, extract_terminal_net

SOURCES = ("net", "heuristic", "bruteforce-opt", "full")


@dataclass(eq=False)
class CondensedSet:
    members: np.ndarray
    source: str
    verified: bool
    n: int
    meta: dict = field(default_factory=dict)

    @property
    def retention(self) -> float:
        return len(self.members) / self.n if self.n else 0.0

    def __len__(self) -> int:
        return len(self.members)

    def to_dict(self) -> dict:
        return {
            "members": [int(m) for m in self.members],
            "source": self.source,
            "verified": self.verified,
            "n": self.n,
            "retention": self.retention,
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> CondensedSet:
        return cls(np.asarray(d["members"], dtype=np.intp), d["source"], bool(d["verified"]), int(d["n"]), d.get("meta", {}))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path) -> CondensedSet:
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class Verification:
    consistent: bool
    violations: np.ndarray

    def __bool__(self) -> bool:
        return self.consistent


def verify_consistent(members, pset: LabeledPointSet, k: int = 1, chunk: int = 1024) -> Verification:
    """Check every point of the set against its nearest members.

    k=1: all members at the exact minimum distance must carry the point's
    label (a cross-label tie is a violation). k>1 (odd): majority vote of
    the k nearest members, ties at the k-th distance broken by index.
    """
    members = np.unique(np.asarray(members, dtype=np.intp))
    if len(members) == 0:
        raise EmptySubset("no members to verify against")
    if k < 1 or k % 2 == 0:
        raise ValueError("k must be a positive odd integer")
    mlab = pset.labels[members]
    bad = []
    for lo in range(0, pset.n, chunk):
        rows = np.arange(lo, min(lo + chunk, pset.n))
        D = pset.pairwise(rows, members)
        lab = pset.labels[rows]
        if k == 1:
            dmin = D.min(axis=1, keepdims=True)
            tie = D == dmin
            wrong = (tie & (mlab[None, :] != lab[:, None])).any(axis=1)
        else:
            kk = min(k, len(members))
            order = np.argsort(D, axis=1, kind="stable")[:, :kk]
            votes = mlab[order].sum(axis=1)
            wrong = np.sign(votes) != lab
        bad.extend(rows[wrong].tolist())
    bad = np.asarray(bad, dtype=np.intp)
    return Verification(len(bad) == 0, bad)


def size_cap(gamma: float, ddim: float) -> int | None:
    """ceil(1/gamma) ** (ddim + 1), the net-size guarantee; None at gamma = 1, where the packing bound does not apply."""
    from .bounds import packing_bound

    return None if gamma >= 1 else packing_bound(1.0, gamma, ddim)


def condense(pset: LabeledPointSet, *, slow: bool = False, estimate_dimension: bool = True) -> CondensedSet:
    """Consistent subset from the terminal net of the hierarchy (or the greedy net at the margin when ``slow``)."""
    margin = scaled_margin(pset)
    gamma = margin.gamma
    meta = {"gamma": gamma, "witness_pair": list(margin.witness_pair)}
    h = None
    if slow:
        net = build_net_bruteforce(pset, gamma)
        meta["method"] = "bruteforce"
    else:
        h = build_hierarchy(pset)
        net = extract_terminal_net(h)
        meta["method"] = "hierarchy"
        meta["i_min"] = h.i_min
    meta["radius"] = net.radius
    if estimate_dimension:
        from .bounds import estimate_ddim

        try:
            hh = h if h is not None and len(h.levels) >= 2 else build_hierarchy(pset, gamma)
            d = estimate_ddim(hh).value
            meta["ddim_estimate"] = d
            meta["size_cap"] = size_cap(gamma, d)
        except TooFewLevels:
            pass
    ok = verify_consistent(net.members, pset)
    if not ok:
        raise InvariantViolation(f"net is not consistent at points {ok.violations[:10].tolist()}")
    return CondensedSet(np.sort(net.members), "net", True, pset.n, meta)


def prune_heuristic(
    net_members,
    pset: LabeledPointSet,
    gamma: float,
    *,
    threshold: float | None = None,
    check_input: bool = True,
) -> CondensedSet:
    """Shrink a consistent net.

    For i = 0, -1, ..., ceil(log2 gamma), for each surviving member p in
    ascending index order: if every surviving opposite-labeled member is at
    distance >= 2 * 2**i from p, drop every other survivor strictly within
    2**i - threshold of p. ``threshold`` defaults to ``gamma``; pass the
    terminal net radius for the alternative reading.
    """
    members = np.unique(np.asarray(net_members, dtype=np.intp))
    if len(members) == 0:
        raise EmptySubset("empty net")
    if check_input:
        ok = verify_consistent(members, pset)
        if not ok:
            raise InconsistentInput(f"input set is not consistent at points {ok.violations[:10].tolist()}")
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    cut_base = gamma if threshold is None else threshold
    lab = pset.labels[members]
    alive = np.ones(len(members), dtype=bool)
    last = ceil_log2(gamma)
    for i in range(0, last - 1, -1):
        r = 2.0**i
        cut = r - cut_base
        if cut <= 0:
            continue
        for a in range(len(members)):
            if not alive[a]:
                continue
            live = np.flatnonzero(alive)
            d = pset.row(int(members[a]), members[live])
            opp = lab[live] != lab[a]
            if opp.any() and d[opp].min() < 2 * r:
                continue
            drop = live[(d < cut) & (live != a)]
            alive[drop] = False
    out = members[alive]
    ok = verify_consistent(out, pset)
    if not ok:
        raise InvariantViolation(f"pruned set is not consistent at points {ok.violations[:10].tolist()}")
    return CondensedSet(out, "heuristic", True, pset.n, {"gamma": gamma, "threshold": cut_base, "input_size": len(members)})


# ------------------------------------------------------------ exact optimum


def consistency_table(pset: LabeledPointSet) -> np.ndarray:
    """Boolean array over all 2**n member masks: is the subset consistent?

    For each point, its distance classes are visited nearest first; the first
    class meeting the mask decides (all met members must share the label).
    """
    n = pset.n
    masks = np.arange(1 << n, dtype=np.int64)
    ok = masks != 0
    D = pset.pairwise(np.arange(n), np.arange(n))
    for p in range(n):
        undecided = ok.copy()
        good = np.zeros_like(ok)
        for dv in np.unique(D[p]):
            cls = np.flatnonzero(D[p] == dv)
            same = sum(1 << int(q) for q in cls if pset.labels[q] == pset.labels[p])
            opp = sum(1 << int(q) for q in cls if pset.labels[q] != pset.labels[p])
            hit = undecided & ((masks & (same | opp)) != 0)
            good |= hit & ((masks & opp) == 0)
            undecided &= ~hit
        ok &= good
    return ok


def brute_force_min_consistent(pset: LabeledPointSet, max_n: int = 16) -> CondensedSet:
    """Minimum-cardinality consistent subset by exhaustive search; lexicographically first among optima."""
    n = pset.n
    if n > max_n:
        raise TooLarge(f"{n} points exceeds the exhaustive-search limit {max_n}")
    if n == 0:
        raise EmptySubset("empty set")
    ok = consistency_table(pset)
    for size in range(1, n + 1):
        for combo in itertools.combinations(range(n), size):
            if ok[sum(1 << c for c in combo)]:
                return CondensedSet(np.asarray(combo, dtype=np.intp), "bruteforce-opt", True, n, {"optimum": size})
    raise InvariantViolation("the full set is not consistent")  # only with zero margin


def min_weight_consistent(pset: LabeledPointSet, weights, max_n: int = 20) -> tuple[float, np.ndarray]:
    """Minimum total weight over consistent subsets; ties go to the smallest mask."""
    n = pset.n
    if n > max_n:
        raise TooLarge(f"{n} points exceeds the exhaustive-search limit {max_n}")
    w = np.asarray(weights, dtype=float)
    ok = consistency_table(pset)
    masks = np.arange(1 << n, dtype=np.int64)
    total = np.zeros(1 << n)
    for q in range(n):
        total += w[q] * ((masks >> q) & 1)
    total[~ok] = math.inf
    best = int(np.argmin(total))
    if not math.isfinite(total[best]):
        raise InvariantViolation("no consistent subset")
    return float(total[best]), np.asarray([q for q in range(n) if best >> q & 1], dtype=np.intp)
