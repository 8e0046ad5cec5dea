"""Hard-instance generation from Label Cover, and structural certificates.

Two constructions are provided:

* :func:`reduce_labelcover_to_wnnc` turns a Label Cover instance into a
  weighted condensing instance with an explicit distance matrix.
* :func:`reduce_wnnc_to_nnc` replaces point weights by gadget graphs
  (:func:`build_gadget`), giving an unweighted instance.

Only the distances the construction prescribes are fixed; every other
distance is the shortest-path closure over them, i.e. the largest value the
triangle inequality allows.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .condense import consistency_table, min_weight_consistent, verify_consistent
from .errors import DegenerateInstance, InfeasibleMetric, InputError, TooLarge
from .metric import METRIC_TOL, LabeledPointSet, find_triangle_violation, load, read_matrix_csv, write_matrix_csv

POSITIVE_ROLES = {"p+", "p'+", "S_L", "S_UA", "gadget_twin+", "gadget_apex+"}
NEGATIVE_ROLES = {"p-", "S_E", "S_VB", "gadget_twin-", "gadget_apex-"}
HEAVY_ROLES = {"S_E", "S_L"}


# ------------------------------------------------------------ Label Cover


@dataclass
class LabelCoverInstance:
    """Bipartite graph (U, V, E) with label sets A, B and per-edge admissible pairs."""

    U: list
    V: list
    A: list
    B: list
    edges: list  # (u, v, frozenset of (a, b))

    def __post_init__(self):
        U, V, A, B = set(self.U), set(self.V), set(self.A), set(self.B)
        clean = []
        for e in self.edges:
            u, v, pairs = e
            if u not in U or v not in V:
                raise InputError(f"edge ({u!r}, {v!r}) has an endpoint outside U x V")
            pairs = frozenset((a, b) for a, b in pairs)
            if not pairs:
                raise InputError(f"edge ({u!r}, {v!r}) has an empty relation")
            for a, b in pairs:
                if a not in A or b not in B:
                    raise InputError(f"pair ({a!r}, {b!r}) on edge ({u!r}, {v!r}) is outside A x B")
            clean.append((u, v, pairs))
        self.edges = clean

    @property
    def m(self) -> int:
        return len(self.U) + len(self.V) + len(self.A) + len(self.B) + len(self.edges) + sum(len(p) for _, _, p in self.edges)

    @classmethod
    def from_dict(cls, d: dict) -> LabelCoverInstance:
        def items(x):
            return list(range(x)) if isinstance(x, int) else list(x)

        edges = [(e["u"], e["v"], [tuple(p) for p in e["pairs"]]) for e in d["edges"]]
        return cls(items(d["U"]), items(d["V"]), items(d["A"]), items(d["B"]), edges)

    @classmethod
    def from_json(cls, path) -> LabelCoverInstance:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return {
            "U": self.U,
            "V": self.V,
            "A": self.A,
            "B": self.B,
            "edges": [{"u": u, "v": v, "pairs": sorted([a, b] for a, b in p)} for u, v, p in self.edges],
        }

    def covers(self, f: dict, g: dict) -> bool:
        """Every b in g(v) has a partner a in f(u) on every edge, and g(v) is nonempty."""
        for u, v, pairs in self.edges:
            gv = g.get(v, set())
            if not gv:
                return False
            for b in gv:
                if not any((a, b) in pairs for a in f.get(u, set())):
                    return False
        return True

    def optimum(self) -> int:
        """Minimum total |f(u)| over covering labelings, by enumeration (tiny instances only)."""
        best = math.inf
        Vs = [v for v in self.V if any(e[1] == v for e in self.edges)]
        subsetsA = [set(c) for k in range(len(self.A) + 1) for c in itertools.combinations(self.A, k)]
        subsetsB = [set(c) for k in range(1, len(self.B) + 1) for c in itertools.combinations(self.B, k)]
        if len(subsetsA) ** len(self.U) * len(subsetsB) ** len(Vs) > 2_000_000:
            raise TooLarge("label cover instance too large to enumerate")
        for fs in itertools.product(subsetsA, repeat=len(self.U)):
            cost = sum(len(s) for s in fs)
            if cost >= best:
                continue
            f = dict(zip(self.U, fs))
            for gs in itertools.product(subsetsB, repeat=len(Vs)):
                if self.covers(f, dict(zip(Vs, gs))):
                    best = cost
                    break
        return int(best) if math.isfinite(best) else -1


# ------------------------------------------------------------ instances


@dataclass
class NncInstance:
    """Explicit-distance labeled instance with per-point roles and optional weights."""

    matrix: np.ndarray
    labels: np.ndarray
    roles: list
    names: list
    weights: np.ndarray | None = None
    params: dict = field(default_factory=dict)
    owner: np.ndarray | None = None  # gadget point -> index of the point it weighs, else -1
    specified: dict = field(default_factory=dict)  # (i, j) -> prescribed distance

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def is_weighted(self) -> bool:
        return self.weights is not None

    def pointset(self) -> LabeledPointSet:
        return load(self.matrix, self.labels, "explicit")

    def indices(self, role: str) -> np.ndarray:
        return np.asarray([i for i, r in enumerate(self.roles) if r == role], dtype=np.intp)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def without(self, idx) -> NncInstance:
        """Copy with the points ``idx`` deleted (distances kept as they are)."""
        drop = set(int(i) for i in np.atleast_1d(idx))
        keep = np.asarray([i for i in range(self.n) if i not in drop], dtype=np.intp)
        remap = {int(o): k for k, o in enumerate(keep)}
        return NncInstance(
            self.matrix[np.ix_(keep, keep)].copy(),
            self.labels[keep].copy(),
            [self.roles[i] for i in keep],
            [self.names[i] for i in keep],
            None if self.weights is None else self.weights[keep].copy(),
            dict(self.params),
            None if self.owner is None else self.owner[keep].copy(),
            {(remap[i], remap[j]): d for (i, j), d in self.specified.items() if i in remap and j in remap},
        )

    def save(self, directory) -> None:
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        write_matrix_csv(self.matrix, self.labels, out / "matrix.csv", out / "labels.csv")
        meta = {
            "roles": self.roles,
            "names": self.names,
            "weights": None if self.weights is None else [float(w) for w in self.weights],
            "owner": None if self.owner is None else [int(o) for o in self.owner],
            "params": self.params,
            "specified": [[int(i), int(j), float(d)] for (i, j), d in sorted(self.specified.items())],
        }
        (out / "roles.json").write_text(json.dumps(meta, indent=2, default=float))

    @classmethod
    def load(cls, directory) -> NncInstance:
        d = Path(directory)
        D, y = read_matrix_csv(d / "matrix.csv", d / "labels.csv")
        meta = json.loads((d / "roles.json").read_text())
        w = meta.get("weights")
        o = meta.get("owner")
        return cls(
            D,
            y.astype(np.int8),
            meta["roles"],
            meta["names"],
            None if w is None else np.asarray(w, dtype=float),
            meta.get("params", {}),
            None if o is None else np.asarray(o, dtype=np.intp),
            {(int(i), int(j)): float(d) for i, j, d in meta.get("specified", [])},
        )


WnncInstance = NncInstance


def _closure(n: int, specified: dict) -> np.ndarray:
    """Shortest-path metric over the prescribed distances; checks they survive unchanged."""
    G = np.full((n, n), np.inf)
    np.fill_diagonal(G, 0.0)
    for (i, j), d in specified.items():
        if d <= 0:
            raise InfeasibleMetric(f"non-positive prescribed distance between {i} and {j}")
        G[i, j] = G[j, i] = min(G[i, j], d)
    D = shortest_path(np.where(np.isinf(G), 0.0, G), method="D", directed=False)
    if not np.all(np.isfinite(D)):
        raise InfeasibleMetric("prescribed distances leave the instance disconnected")
    for (i, j), d in specified.items():
        if D[i, j] < d - METRIC_TOL * max(1.0, d):
            raise InfeasibleMetric(f"prescribed d({i},{j})={d} exceeds a path of length {D[i, j]}")
        D[i, j] = D[j, i] = d
    D = (D + D.T) / 2
    bad = find_triangle_violation(D, METRIC_TOL * max(1.0, float(D.max())), exhaustive_limit=1500)
    if bad is not None:
        raise InfeasibleMetric(f"triangle inequality fails at {bad}")
    return D


def grid_points(count: int, D: int) -> np.ndarray:
    """First ``count`` points, in lexicographic order, of the D-dimensional integer grid of side ceil(count**(1/D))."""
    side = integer_root_ceil(count, D)
    pts = list(itertools.islice(itertools.product(range(side), repeat=D), count))
    return np.asarray(pts, dtype=float).reshape(count, D)


def integer_root_ceil(w: int, D: int) -> int:
    """Smallest integer s with s**D >= w."""
    s = max(1, int(round(w ** (1.0 / D))))
    while s**D < w:
        s += 1
    while s > 1 and (s - 1) ** D >= w:
        s -= 1
    return s


def _ball(count: int, D: int) -> tuple[np.ndarray, float]:
    """L1 distances of ``count`` grid points rescaled to diameter 1, and their minimum spacing."""
    if count <= 1:
        return np.zeros((count, count)), math.inf
    P = grid_points(count, D)
    M = np.abs(P[:, None, :] - P[None, :, :]).sum(axis=2)
    M /= M.max()
    return M, float(M[M > 0].min())


def reduce_labelcover_to_wnnc(lc: LabelCoverInstance, D: int = 2) -> NncInstance:
    """Weighted condensing instance encoding a Label Cover instance."""
    if D < 1:
        raise InputError("target dimension must be at least 1")
    if not lc.edges:
        raise DegenerateInstance("label cover instance has no edges")
    m = lc.m
    c = m**4
    roles, names, weights, labels = [], [], [], []

    def add(role, name, weight):
        roles.append(role)
        names.append(name)
        weights.append(weight)
        labels.append(1 if role in POSITIVE_ROLES else -1)
        return len(roles) - 1

    p_plus = add("p+", "p+", 1)
    e_idx = [add("S_E", f"p_e[{u},{v}]", c * c) for u, v, _ in lc.edges]
    vb_idx = {(v, b): add("S_VB", f"p_vb[{v},{b}]", 1) for v in lc.V for b in lc.B}
    p_minus = add("p-", "p-", 1)
    l_idx = {}
    for k, (u, v, pairs) in enumerate(lc.edges):
        for b in sorted({b for _, b in pairs}, key=lc.B.index):
            l_idx[(k, b)] = add("S_L", f"p_eb[{u},{v};{b}]", c * c)
    p_prime = add("p'+", "p'+", 1)
    ua_idx = {(u, a): add("S_UA", f"p_ua[{u},{a}]", c) for u in lc.U for a in lc.A}

    balls = {
        "S_E": list(e_idx),
        "S_VB": list(vb_idx.values()),
        "S_L": list(l_idx.values()),
        "S_UA": list(ua_idx.values()),
    }
    ball_d = {}
    spacing = math.inf
    for role, idx in balls.items():
        M, s = _ball(len(idx), D)
        ball_d[role] = M
        spacing = min(spacing, s)
    eta = (1.0 if not math.isfinite(spacing) else min(1.0, spacing)) / 8.0

    fixed: dict = {}

    def put(i, j, d):
        key = (min(i, j), max(i, j))
        fixed[key] = d

    for k, (u, v, pairs) in enumerate(lc.edges):
        pe = e_idx[k]
        put(p_plus, pe, 3 + eta)
        for b in {b for _, b in pairs}:
            put(pe, vb_idx[(v, b)], 3.0)
            peb = l_idx[(k, b)]
            put(peb, vb_idx[(v, b)], 2 + eta)
            put(peb, p_prime, 2 + 2 * eta)
        for a, b in pairs:
            put(l_idx[(k, b)], ua_idx[(u, a)], 2.0)
    for idx in vb_idx.values():
        put(p_minus, idx, 2.0)
    for role, idx in balls.items():
        M = ball_d[role]
        for x, y in itertools.combinations(range(len(idx)), 2):
            put(idx[x], idx[y], float(M[x, y]))

    n = len(roles)
    Dm = _closure(n, fixed)
    inst = NncInstance(
        Dm,
        np.asarray(labels, dtype=np.int8),
        roles,
        names,
        np.asarray(weights, dtype=float),
        {"c": c, "m": m, "eta": eta, "D": D, "ball_spacing": spacing if math.isfinite(spacing) else None},
        None,
        fixed,
    )
    inst.params["margin"] = instance_margin(inst)
    return inst


def instance_margin(inst: NncInstance) -> dict:
    pos = inst.labels == 1
    neg = ~pos
    if not pos.any() or not neg.any():
        return {"absolute": None, "scaled": None}
    g = float(inst.matrix[np.ix_(pos, neg)].min())
    return {"absolute": g, "scaled": g / float(inst.matrix.max())}


def trivial_solution(inst: NncInstance) -> np.ndarray:
    """All of S_UA and S_VB plus p+."""
    return np.sort(np.concatenate([inst.indices("S_UA"), inst.indices("S_VB"), inst.indices("p+")]))


def solution_cost(inst: NncInstance, members) -> float:
    w = inst.weights if inst.weights is not None else np.ones(inst.n)
    return float(np.sum(w[np.asarray(members, dtype=np.intp)]))


# ------------------------------------------------------------ gadgets


@dataclass
class GadgetGraph:
    w: int
    D: int
    gamma: float
    side: int
    twins_pos: np.ndarray  # indices of positive twins, grid order
    twins_neg: np.ndarray
    apex_pos: int
    apex_neg: int
    instance: NncInstance

    @property
    def twin_separation(self) -> float:
        return self.gamma / 2

    @property
    def T(self) -> np.ndarray:
        return np.sort(np.concatenate([self.twins_pos, self.twins_neg]))


def _gadget_layout(w: int, D: int, gamma: float, offset: int = 0):
    side = integer_root_ceil(w, D)
    grid = grid_points(w, D)
    G = np.abs(grid[:, None, :] - grid[None, :, :]).sum(axis=2)
    tp = [offset + 2 * t for t in range(w)]
    tn = [offset + 2 * t + 1 for t in range(w)]
    ap, an = offset + 2 * w, offset + 2 * w + 1
    fixed = {}
    for s in range(w):
        fixed[(tp[s], tn[s])] = gamma / 2
        for t in range(s + 1, w):
            for a in (tp[s], tn[s]):
                for b in (tp[t], tn[t]):
                    fixed[(a, b)] = float(G[s, t])
        fixed[(tp[s], ap)] = float(side)
        fixed[(tn[s], ap)] = side + gamma / 2
        fixed[(tn[s], an)] = float(side)
        fixed[(tp[s], an)] = side + gamma / 2
    return side, tp, tn, ap, an, fixed


def build_gadget(w: int, D: int, gamma: float) -> GadgetGraph:
    """Gadget of w twin pairs on a D-dimensional L1 grid plus two apex points (2w + 2 points)."""
    if w < 1 or D < 1 or not gamma > 0:
        raise InputError("need w >= 1, D >= 1, gamma > 0")
    side, tp, tn, ap, an, fixed = _gadget_layout(w, D, gamma)
    n = 2 * w + 2
    Dm = _closure(n, fixed)
    roles = ["gadget_twin+", "gadget_twin-"] * w + ["gadget_apex+", "gadget_apex-"]
    names = [f"t{s}{sign}" for s in range(w) for sign in "+-"] + ["apex+", "apex-"]
    labels = np.asarray([1 if r in POSITIVE_ROLES else -1 for r in roles], dtype=np.int8)
    inst = NncInstance(Dm, labels, roles, names, None, {"w": w, "D": D, "gamma": gamma, "side": side}, np.full(n, -1), fixed)
    return GadgetGraph(w, D, gamma, side, np.asarray(tp), np.asarray(tn), ap, an, inst)


def prescale_weights(inst: NncInstance) -> NncInstance:
    """Multiply every weight by n**2 so the 2-point cost of each gadget becomes negligible."""
    out = inst.without([])
    out.weights = inst.weights * inst.n**2
    return out


def reduce_wnnc_to_nnc(inst: NncInstance, D: int = 2, *, gamma: float | None = None, max_points: int = 5000) -> NncInstance:
    """Unweighted instance: every point of integer weight w > 1 gets a G(w, D) gadget.

    The gadget's opposite-label twins sit at distance side = ceil(w**(1/D))
    from the weighted point; everything else follows by closure. Twin
    separation is half the absolute margin of the input unless ``gamma``
    (an absolute distance) is given.
    """
    if inst.weights is None:
        raise InputError("instance has no weights")
    w_int = np.rint(inst.weights).astype(np.int64)
    if np.any(w_int < 1) or np.any(np.abs(inst.weights - w_int) > 1e-9):
        raise InputError("weights must be positive integers")
    total = inst.n + int(sum(2 * w + 2 for w in w_int if w > 1))
    if total > max_points:
        raise TooLarge(f"gadget expansion needs {total} points (limit {max_points})")
    if gamma is None:
        gamma = instance_margin(inst)["absolute"]
        if gamma is None:
            raise DegenerateInstance("instance has a single label")
    fixed = {}
    n0 = inst.n
    for i in range(n0):
        for j in range(i + 1, n0):
            fixed[(i, j)] = float(inst.matrix[i, j])
    roles, names = list(inst.roles), list(inst.names)
    labels = list(int(x) for x in inst.labels)
    owner = [-1] * n0
    offset = n0
    gadgets = []
    for i in range(n0):
        w = int(w_int[i])
        if w <= 1:
            continue
        side, tp, tn, ap, an, glayout = _gadget_layout(w, D, gamma, offset)
        fixed.update(glayout)
        # opposite-label twins face the weighted point
        facing = tn if inst.labels[i] == 1 else tp
        for t in facing:
            fixed[(i, t)] = float(side)
        for s in range(w):
            roles += ["gadget_twin+", "gadget_twin-"]
            names += [f"g{i}.t{s}+", f"g{i}.t{s}-"]
            labels += [1, -1]
        roles += ["gadget_apex+", "gadget_apex-"]
        names += [f"g{i}.apex+", f"g{i}.apex-"]
        labels += [1, -1]
        owner += [i] * (2 * w + 2)
        gadgets.append({"owner": i, "w": w, "side": side, "start": offset, "stop": offset + 2 * w + 2})
        offset += 2 * w + 2
    Dm = _closure(offset, {(min(a, b), max(a, b)): d for (a, b), d in fixed.items()})
    out = NncInstance(
        Dm,
        np.asarray(labels, dtype=np.int8),
        roles,
        names,
        None,
        {**inst.params, "D": D, "twin_gamma": gamma, "gadgets": gadgets},
        np.asarray(owner, dtype=np.intp),
        {(min(a, b), max(a, b)): d for (a, b), d in fixed.items()},
    )
    out.params["margin"] = instance_margin(out)
    return out


# ------------------------------------------------------------ certification


def forced_closure(pset: LabeledPointSet, start) -> np.ndarray:
    """Points that any consistent superset of ``start`` must contain.

    A point q outside the current set is forced when its nearest current
    members include an opposite label and q itself is the only same-label
    point strictly closer than them.
    """
    inc = np.zeros(pset.n, dtype=bool)
    inc[np.asarray(start, dtype=np.intp)] = True
    everything = np.arange(pset.n)
    changed = True
    while changed:
        changed = False
        for q in range(pset.n):
            if inc[q]:
                continue
            d = pset.row(q, everything)
            d0 = d[inc].min()
            near = inc & (d == d0)
            if not np.any(pset.labels[near] != pset.labels[q]):
                continue
            closer_same = (d < d0) & (pset.labels == pset.labels[q])
            if np.flatnonzero(closer_same).tolist() == [q]:
                inc[q] = True
                changed = True
    return np.flatnonzero(inc)


@dataclass
class ClaimsReport:
    claims: dict
    details: dict

    @property
    def passed(self) -> bool:
        return all(v for v in self.claims.values() if v is not None)

    def lines(self) -> list[str]:
        out = []
        for k, v in self.claims.items():
            tag = "skip" if v is None else ("PASS" if v else "FAIL")
            out.append(f"[{tag}] {k}")
        return out


def _nearest_members(D_row, members):
    d = D_row[members]
    return members[d == d.min()]


def verify_reduction_claims(inst: NncInstance, max_n: int = 20) -> ClaimsReport:
    """Certify the solution-structure claims of the reductions by enumeration.

    Label Cover instances (roles p+, S_E, ...):
      1. every subset omitting p+ is inconsistent;
      2. the minimum-weight consistent subset contains no heavy (S_E, S_L) point;
      3. in that optimum every S_E point is served by an adjacent S_VB member,
         every S_L point whose S_VB partner is chosen is served by an adjacent
         S_UA member at distance 2, and the cost splits as
         c * |S_UA chosen| + |S_VB chosen| + |{p+, p-, p'+} chosen|.
    Gadget instances: closure from any twin covers all twins of its gadget,
    and the two apexes classify every gadget point.
    """
    claims: dict = {}
    details: dict = {}
    pset = inst.pointset()
    D = pset.matrix
    has_lc = any(r in ("S_E", "S_L", "S_VB", "S_UA") for r in inst.roles)
    if has_lc:
        if inst.n > max_n:
            raise TooLarge(f"{inst.n} points exceeds the enumeration limit {max_n}")
        ok = consistency_table(pset)
        pp = inst.indices("p+")
        if len(pp) == 0:
            claims["1: p+ in every consistent subset"] = False
            details["claim1"] = "no p+ point in instance"
        else:
            bit = 1 << int(pp[0])
            masks = np.arange(len(ok), dtype=np.int64)
            omit = ok & ((masks & bit) == 0)
            claims["1: p+ in every consistent subset"] = not bool(omit.any())
            details["claim1_counterexamples"] = int(omit.sum())
        if inst.weights is not None:
            cost, opt = min_weight_consistent(pset, inst.weights, max_n=max_n)
            details["optimum"] = [inst.names[i] for i in opt]
            details["optimum_cost"] = cost
            heavy = [inst.names[i] for i in opt if inst.roles[i] in HEAVY_ROLES]
            claims["2: no heavy point in the optimum"] = not heavy
            claims["3: covering structure of the optimum"] = _claim3(inst, D, opt, cost, details)
        else:
            claims["2: no heavy point in the optimum"] = None
            claims["3: covering structure of the optimum"] = None
    gadgets = inst.params.get("gadgets")
    if gadgets is None and any(r.startswith("gadget") for r in inst.roles):
        gadgets = [{"owner": -1, "start": 0, "stop": inst.n, "w": inst.params.get("w")}]
    if gadgets:
        closure_ok, apex_ok = True, True
        for g in gadgets:
            idx = np.arange(g["start"], g["stop"])
            twins = np.asarray([i for i in idx if inst.roles[i].startswith("gadget_twin")])
            apexes = np.asarray([i for i in idx if inst.roles[i].startswith("gadget_apex")])
            for t in twins:
                forced = set(forced_closure(pset, [t]).tolist())
                if not set(twins.tolist()) <= forced:
                    closure_ok = False
            # apex pair serves every gadget point
            for q in idx:
                near = _nearest_members(D[q], apexes)
                if np.any(pset.labels[near] != pset.labels[q]):
                    apex_ok = False
        claims["gadget: any twin forces all twins"] = closure_ok
        claims["gadget: apex pair classifies the gadget"] = apex_ok
    return ClaimsReport(claims, details)


def _claim3(inst, D, opt, cost, details) -> bool:
    opt = np.asarray(opt, dtype=np.intp)
    c = inst.params["c"]
    fixed = inst.specified
    ok = True
    in_opt = set(opt.tolist())

    def adjacent(i, j, value):
        return abs(fixed.get((min(i, j), max(i, j)), -1.0) - value) <= 1e-12

    eta = inst.params["eta"]
    for e in inst.indices("S_E"):
        near = _nearest_members(D[e], opt)
        if not all(inst.roles[s] == "S_VB" and adjacent(e, s, 3.0) for s in near):
            ok = False
            details.setdefault("claim3_failures", []).append(f"{inst.names[e]} served by {[inst.names[s] for s in near]}")
    for l in inst.indices("S_L"):
        partners = [s for s in inst.indices("S_VB") if adjacent(l, s, 2 + eta)]
        if any(s in in_opt for s in partners):
            near = _nearest_members(D[l], opt)
            if not all(inst.roles[s] == "S_UA" and adjacent(l, s, 2.0) for s in near):
                ok = False
                details.setdefault("claim3_failures", []).append(f"{inst.names[l]} served by {[inst.names[s] for s in near]}")
        else:
            near = _nearest_members(D[l], opt)
            if np.any(inst.labels[near] != 1):
                ok = False
    n_ua = sum(inst.roles[i] == "S_UA" for i in opt)
    n_vb = sum(inst.roles[i] == "S_VB" for i in opt)
    n_single = sum(inst.roles[i] in ("p+", "p-", "p'+") for i in opt)
    details["labels_U"] = n_ua
    details["labels_V"] = n_vb
    if abs(cost - (c * n_ua + n_vb + n_single)) > 1e-6:
        ok = False
    return ok


def certify_gadget(w: int, D: int, gamma: float = 0.5, brute_limit: int = 16) -> dict:
    """Closure, optimum and weighted-point checks for G(w, D)."""
    g = build_gadget(w, D, gamma)
    pset = g.instance.pointset()
    twins = g.T
    out = {"w": w, "D": D, "points": g.instance.n}
    out["closure_all_T"] = all(set(twins.tolist()) <= set(forced_closure(pset, [t]).tolist()) for t in twins)
    out["apexes_consistent"] = bool(verify_consistent([g.apex_pos, g.apex_neg], pset))
    if pset.n <= brute_limit:
        from .condense import brute_force_min_consistent

        out["optimum"] = len(brute_force_min_consistent(pset, max_n=brute_limit))
    # attach the gadget to one positive point of weight w
    base = NncInstance(np.zeros((1, 1)), np.asarray([1], dtype=np.int8), ["p+"], ["b"], np.asarray([float(w)]), {})
    nnc = reduce_wnnc_to_nnc(base, D, gamma=gamma)
    bp = nnc.pointset()
    T = np.flatnonzero(nnc.owner == 0)
    T = np.asarray([i for i in T if nnc.roles[i].startswith("gadget_twin")])
    apexes = np.asarray([i for i in range(nnc.n) if nnc.roles[i].startswith("gadget_apex")])
    out["weighted_points"] = nnc.n
    out["inclusion_forces_T"] = out["inclusion_cost"] = None
    # every twin must appear once the weighted point does; weight 1 carries no gadget
    if w > 1 and bp.n <= brute_limit:
        ok = consistency_table(bp)
        masks = np.arange(len(ok), dtype=np.int64)
        with_b = ok & ((masks & 1) == 1)
        tmask = sum(1 << int(t) for t in T)
        out["inclusion_forces_T"] = bool(np.all((masks[with_b] & tmask) == tmask))
        sizes = np.array([bin(int(x)).count("1") for x in masks[with_b]])
        out["inclusion_cost"] = int(sizes.min()) if len(sizes) else None
    near_ok = True
    for q in np.concatenate([T, apexes]):
        near = _nearest_members(bp.matrix[q], apexes)
        near_ok &= bool(np.all(bp.labels[near] == bp.labels[q]))
    out["exclusion_cost"] = 2 if near_ok else None
    return out
