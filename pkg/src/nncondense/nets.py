"""Epsilon-nets: greedy brute-force construction and the fast net hierarchy.

Radii are powers of two ``2**i`` with ``i <= 0`` on the normalized set.
Level 0 is the single seed point; it covers every point within distance
<= 1 (the diameter), which is the only non-strict covering in the hierarchy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ZeroMargin
from .metric import LabeledPointSet

# one level per binade of double precision, plus slack
_MAX_DEPTH = 1100


@dataclass(frozen=True, eq=False)
class Net:
    radius: float
    members: np.ndarray

    def __len__(self) -> int:
        return len(self.members)

    def to_dict(self) -> dict:
        return {"radius": self.radius, "members": [int(m) for m in self.members]}

    @classmethod
    def from_dict(cls, d: dict) -> Net:
        return cls(float(d["radius"]), np.asarray(d["members"], dtype=np.intp))


def floor_log2(x: float) -> int:
    """Exact floor(log2 x) for x > 0."""
    m, e = math.frexp(x)
    return e - 1


def ceil_log2(x: float) -> int:
    """Exact ceil(log2 x) for x > 0."""
    m, e = math.frexp(x)
    return e - 1 if m == 0.5 else e


def build_net_bruteforce(pset: LabeledPointSet, epsilon: float, seed_index: int = 0) -> Net:
    """Greedy net: seed first, then every point (ascending index) at distance >= epsilon from the net so far."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if not 0 <= seed_index < pset.n:
        raise IndexError(f"seed index {seed_index} out of range")
    members = [seed_index]
    nearest = np.array(pset.row(seed_index), dtype=float)
    for p in range(pset.n):
        if p == seed_index:
            continue
        if nearest[p] >= epsilon:
            members.append(p)
            np.minimum(nearest, pset.row(p), out=nearest)
    return Net(float(epsilon), np.asarray(members, dtype=np.intp))


def packing_violations(pset: LabeledPointSet, members, epsilon: float) -> list[tuple[int, int]]:
    """Member pairs closer than ``epsilon``."""
    members = np.asarray(members, dtype=np.intp)
    out = []
    for lo in range(0, len(members), 1024):
        block = pset.pairwise(members[lo : lo + 1024], members)
        r, c = np.nonzero(block < epsilon)
        for a, b in zip(r + lo, c):
            if a < b:
                out.append((int(members[a]), int(members[b])))
    return out


def covering_violations(pset: LabeledPointSet, members, epsilon: float, strict: bool = True) -> np.ndarray:
    """Points of the set with no member strictly (or non-strictly) within ``epsilon``."""
    members = np.asarray(members, dtype=np.intp)
    bad = []
    for lo in range(0, pset.n, 1024):
        rows = np.arange(lo, min(lo + 1024, pset.n))
        dmin = pset.pairwise(rows, members).min(axis=1)
        miss = dmin >= epsilon if strict else dmin > epsilon
        bad.extend(rows[miss].tolist())
    return np.asarray(bad, dtype=np.intp)


def is_valid_net(pset: LabeledPointSet, net: Net, strict: bool = True) -> bool:
    return not packing_violations(pset, net.members, net.radius) and not len(
        covering_violations(pset, net.members, net.radius, strict=strict)
    )


@dataclass(eq=False)
class NetHierarchy:
    """Nested nets at radii 2**i, i = 0, -1, ..., i_min.

    Attributes:
        levels: i -> member indices of the net at radius 2**i.
        neighbors: i -> {p: members q of level i with dist(p, q) < 4 * 2**i}; p is its own neighbor.
        children: i -> {p: level-(i-1) members whose level-i parent is p}; defined for i > i_min.
        parent: i -> array P(., i) over all points, a level-i member covering each point.
        i_min: terminal level.
        stopped_by: "condition" (label-consistency stopping rule) or "hint" (target level from a margin).
    """

    levels: dict[int, np.ndarray]
    neighbors: dict[int, dict[int, list[int]]]
    children: dict[int, dict[int, list[int]]]
    parent: dict[int, np.ndarray]
    i_min: int
    stopped_by: str
    seed_index: int = 0
    distance_evals: int = field(default=0)

    def radius(self, i: int) -> float:
        return 2.0**i

    @property
    def level_indices(self) -> list[int]:
        return sorted(self.levels, reverse=True)

    def sizes(self) -> list[tuple[int, int]]:
        return [(i, len(self.levels[i])) for i in self.level_indices]

    def to_dict(self) -> dict:
        return {
            "i_min": self.i_min,
            "stopped_by": self.stopped_by,
            "seed_index": self.seed_index,
            "levels": {str(i): [int(m) for m in self.levels[i]] for i in self.level_indices},
            "parent": {str(i): [int(m) for m in self.parent[i]] for i in self.level_indices},
            "neighbors": {
                str(i): {str(p): [int(q) for q in qs] for p, qs in self.neighbors[i].items()}
                for i in self.level_indices
            },
            "children": {
                str(i): {str(p): [int(q) for q in qs] for p, qs in self.children[i].items()}
                for i in self.level_indices
                if i in self.children
            },
        }


def _stop_level0(pset: LabeledPointSet, seed: int) -> bool:
    # level 0 covers every point within <= 1, so it is consistent only when single-class
    return bool(np.all(pset.labels == pset.labels[seed]))


def build_hierarchy(
    pset: LabeledPointSet,
    gamma_hint: float | None = None,
    *,
    min_level: int | None = None,
    seed_index: int = 0,
) -> NetHierarchy:
    """Build the net hierarchy top-down.

    Level i-1 starts as a copy of level i; each point q (ascending index)
    is compared only against T, the current level-(i-1) children of the
    level-i neighbors of q's level-i parent, and joins when dist(q, T) >= 2**(i-1).

    Termination:
        * ``min_level`` given: build exactly down to that level.
        * ``gamma_hint`` given: build down to floor(log2 gamma_hint) (at least
          one level below 0 when both labels are present).
        * otherwise: stop at the first level where no member lies within
          2**i of an opposite-labeled point.

    Raises:
        ZeroMargin: two opposite-labeled points coincide.
    """
    n = pset.n
    labels = pset.labels
    if n == 0:
        raise ValueError("empty set")
    two_labels = len(np.unique(labels)) == 2
    if min_level is not None:
        target = min(0, int(min_level))
    elif gamma_hint is not None:
        if not 0 < gamma_hint <= 1:
            raise ValueError("gamma_hint must lie in (0, 1]")
        target = floor_log2(gamma_hint)
        if target == 0 and two_labels:
            target = -1
    else:
        target = None

    seed = seed_index
    levels = {0: np.array([seed], dtype=np.intp)}
    neighbors: dict[int, dict[int, list[int]]] = {0: {seed: [seed]}}
    children: dict[int, dict[int, list[int]]] = {}
    parent = {0: np.full(n, seed, dtype=np.intp)}
    evals = 0

    if target is None and _stop_level0(pset, seed):
        return NetHierarchy(levels, neighbors, children, parent, 0, "condition", seed, evals)
    if n == 1 or target == 0:
        return NetHierarchy(levels, neighbors, children, parent, 0, "hint", seed, evals)

    i = 0
    while True:
        if i <= -_MAX_DEPTH:
            raise RuntimeError("hierarchy depth limit reached")
        r_next = 2.0 ** (i - 1)
        prev_members = levels[i]
        nbr = neighbors[i]
        par = parent[i]
        is_member = np.zeros(n, dtype=bool)
        is_member[prev_members] = True
        kids: dict[int, list[int]] = {int(p): [int(p)] for p in prev_members}
        new_parent = np.empty(n, dtype=np.intp)
        added = []
        for q in range(n):
            if is_member[q]:
                new_parent[q] = q
                continue
            pq = int(par[q])
            T = [t for rr in nbr[pq] for t in kids[rr]]
            d = pset.row(q, T)
            evals += len(T)
            k = int(np.argmin(d))
            if d[k] < r_next:
                new_parent[q] = T[k]
            else:
                is_member[q] = True
                kids[pq].append(q)
                new_parent[q] = q
                added.append(q)
        members = np.concatenate([prev_members, np.asarray(added, dtype=np.intp)])
        lvl = i - 1
        levels[lvl] = members
        children[i] = kids
        parent[lvl] = new_parent

        # neighbor lists and the stopping rule share the candidate scan:
        # every level-(i-1) member within 2 * 2**i of q is a child of a level-i neighbor of P(q, i)
        new_nbr: dict[int, list[int]] = {}
        consistent = True
        order = np.argsort(par, kind="stable")
        groups = np.split(order, np.flatnonzero(np.diff(par[order])) + 1)
        four_r = 4.0 * r_next
        for grp in groups:
            pq = int(par[grp[0]])
            cand = np.asarray(sorted(t for rr in nbr[pq] for t in kids[rr]), dtype=np.intp)
            D = pset.pairwise(grp, cand)
            evals += D.size
            within = D < r_next
            opp = labels[grp][:, None] != labels[cand][None, :]
            clash = within & opp
            if clash.any():
                consistent = False
                zero = clash & (D == 0.0)
                if zero.any():
                    a, b = np.argwhere(zero)[0]
                    raise ZeroMargin(
                        f"points {int(grp[a])} and {int(cand[b])} coincide with opposite labels"
                    )
            mrows = np.flatnonzero(is_member[grp])
            for a in mrows:
                new_nbr[int(grp[a])] = [int(c) for c in cand[D[a] < four_r]]
        neighbors[lvl] = new_nbr
        i = lvl

        if target is not None:
            if i <= target:
                return NetHierarchy(levels, neighbors, children, parent, i, "hint", seed, evals)
        elif consistent:
            return NetHierarchy(levels, neighbors, children, parent, i, "condition", seed, evals)


def extract_terminal_net(h: NetHierarchy) -> Net:
    return Net(2.0**h.i_min, h.levels[h.i_min])


def hierarchy_violations(pset: LabeledPointSet, h: NetHierarchy) -> list[str]:
    """Exhaustively check the hierarchy laws; returns human-readable failures."""
    errs = []
    idx = h.level_indices
    for i in idx:
        r = 2.0**i
        mem = h.levels[i]
        if len(np.unique(mem)) != len(mem):
            errs.append(f"level {i}: duplicate members")
        if packing_violations(pset, mem, r):
            errs.append(f"level {i}: packing below {r}")
        if len(covering_violations(pset, mem, r, strict=i < 0)):
            errs.append(f"level {i}: covering fails at {r}")
        memset = set(int(m) for m in mem)
        # parent pointers cover every point
        par = h.parent[i]
        if not set(int(p) for p in np.unique(par)) <= memset:
            errs.append(f"level {i}: parent pointer outside level")
        dpar = np.array([pset.dist(q, int(par[q])) for q in range(pset.n)])
        if i < 0 and np.any(dpar >= r):
            errs.append(f"level {i}: parent farther than {r}")
        if i == 0 and np.any(dpar > r):
            errs.append("level 0: parent farther than 1")
        # neighbor rule, both directions
        D = pset.pairwise(mem, mem)
        for a, p in enumerate(mem):
            want = set(int(q) for q in mem[D[a] < 4 * r])
            got = set(h.neighbors[i].get(int(p), []))
            if want != got:
                errs.append(f"level {i}: neighbor list of {int(p)} wrong")
                break
        for p, qs in h.neighbors[i].items():
            for q in qs:
                if p not in h.neighbors[i].get(q, []):
                    errs.append(f"level {i}: neighbor symmetry broken at ({p}, {q})")
                    break
        if i - 1 in h.levels:
            lower = set(int(m) for m in h.levels[i - 1])
            if not memset <= lower:
                errs.append(f"level {i}: not nested in level {i - 1}")
            # children partition level i-1 by their level-i parent
            kids = h.children.get(i, {})
            flat = sorted(q for qs in kids.values() for q in qs)
            if flat != sorted(lower):
                errs.append(f"level {i}: children do not partition level {i - 1}")
            for p, qs in kids.items():
                if any(int(par[q]) != p for q in qs):
                    errs.append(f"level {i}: child of {p} has another parent")
                    break
        if i + 1 in h.levels:
            # neighbors at level i have neighboring parents at level i+1
            up = h.parent[i + 1]
            for p, qs in h.neighbors[i].items():
                pp = int(up[p])
                for q in qs:
                    if int(up[q]) not in h.neighbors[i + 1].get(pp, []):
                        errs.append(f"level {i}: parents of neighbors {p},{q} are not neighbors")
                        break
    return errs
