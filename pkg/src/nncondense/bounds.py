"""Generalization-bound calculators, the packing bound, a doubling-dimension
estimate, and a grid search over (epsilon, gamma).

Logarithms are natural except the explicit log2 factor in
:func:`gkk10_bound`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import EllExceedsN, InvalidRange, NoFeasiblePoint, SubsetTooLarge, TooFewLevels, VacuousBound
from .metric import LabeledPointSet


@dataclass(frozen=True)
class BoundInputs:
    n: int
    subset_size: int
    epsilon: float = 0.0
    delta: float = 0.05
    gamma: float = 1.0
    ddim: float = 0.0

    def __post_init__(self):
        _check_common(self.n, self.subset_size, self.epsilon, self.delta)
        if not 0 < self.gamma <= 1:
            raise InvalidRange("gamma must lie in (0, 1]")
        if self.ddim < 0:
            raise InvalidRange("ddim must be non-negative")


@dataclass(frozen=True)
class DdimEstimate:
    value: float
    method: str
    per_scale: list = field(default_factory=list)


def _check_common(n, k, epsilon, delta):
    if k < 1:
        raise InvalidRange("subset size must be at least 1")
    if k >= n:
        raise SubsetTooLarge(f"subset size {k} must be smaller than n={n}")
    if not 0 <= epsilon <= 1:
        raise InvalidRange("epsilon must lie in [0, 1]")
    if not 0 < delta < 1:
        raise InvalidRange("delta must lie in (0, 1)")


def packing_bound(beta: float, alpha: float, ddim: float) -> int:
    """ceil(beta/alpha) ** (ddim + 1).

    The ratio's ceiling is taken in exact rational arithmetic; for integral
    ``ddim`` the power is an exact integer. A fractional ``ddim`` gives the
    ceiling of the real power.
    """
    if not 0 < alpha < beta:
        raise InvalidRange("need 0 < alpha < beta")
    if ddim < 0:
        raise InvalidRange("ddim must be non-negative")
    base = math.ceil(Fraction(beta) / Fraction(alpha))
    e = Fraction(ddim) + 1
    if e.denominator == 1:
        return base ** int(e)
    return math.ceil(base ** float(e))


def bound_consistent(n: int, subset_size: int, delta: float) -> float:
    """Compression bound for a consistent subset: (k log n + log n + log 1/delta) / (n - k)."""
    _check_common(n, subset_size, 0.0, delta)
    ln = math.log(n)
    return (subset_size * ln + ln + math.log(1 / delta)) / (n - subset_size)


def bound_eps_consistent(n: int, subset_size: int, epsilon: float, delta: float) -> float:
    """Compression bound for an epsilon-consistent subset."""
    _check_common(n, subset_size, epsilon, delta)
    k = subset_size
    ln = math.log(n)
    return epsilon * n / (n - k) + math.sqrt((k * ln + 2 * ln + math.log(1 / delta)) / (2 * (n - k)))


def corollary_bound(n: int, epsilon: float, delta: float, gamma: float, ddim: float) -> float:
    """bound_eps_consistent with the subset size replaced by the net cap ceil(1/gamma)**(ddim+1)."""
    if not 0 < gamma <= 1:
        raise InvalidRange("gamma must lie in (0, 1]")
    ell = 1 if gamma == 1 else packing_bound(1, gamma, ddim)
    if ell >= n:
        raise EllExceedsN(f"cap {ell} >= n={n}")
    return bound_eps_consistent(n, ell, epsilon, delta)


def gkk10_dimension(gamma: float, ddim_ambient: float) -> int:
    if gamma <= 0 or ddim_ambient < 0:
        raise InvalidRange("need gamma > 0 and ddim >= 0")
    base = math.ceil(Fraction(16) / Fraction(gamma))
    e = Fraction(ddim_ambient) + 1
    return base ** int(e) if e.denominator == 1 else math.ceil(base ** float(e))


def gkk10_bound(n: int, epsilon: float, delta: float, gamma: float, ddim_ambient: float) -> float:
    """Earlier fat-shattering margin bound, for comparison.

    Raises VacuousBound when d_gamma > n, where the log factor can turn
    negative and the expression no longer bounds anything.
    """
    if n < 1 or not 0 <= epsilon <= 1 or not 0 < delta < 1:
        raise InvalidRange("bad n, epsilon or delta")
    d = gkk10_dimension(gamma, ddim_ambient)
    if d > n:
        raise VacuousBound(f"d_gamma={d} exceeds n={n}")
    inner = d * math.log(34 * math.e * n / d) * math.log2(578 * n) + math.log(4 / delta)
    return epsilon + math.sqrt(2 / n * inner)


def estimate_ddim(h) -> DdimEstimate:
    """Largest per-level growth exponent log2(|S_{2^(i-1)}| / |S_{2^i}|) of a hierarchy."""
    sizes = h.sizes()
    if len(sizes) < 2:
        raise TooFewLevels("need at least two levels")
    value = max(math.log2(b / a) for (_, a), (_, b) in zip(sizes, sizes[1:]))
    return DdimEstimate(float(value), "level-ratio", sizes)


def explicit_ddim(value: float) -> DdimEstimate:
    return DdimEstimate(float(value), "explicit", [])


# ---------------------------------------------------------------- SRM grid


@dataclass
class SrmCell:
    epsilon_cap: float
    gamma: float
    epsilon: float
    witness_size: int
    bound: float | None
    feasible: bool
    reason: str = ""


@dataclass
class SrmResult:
    epsilon: float
    gamma: float
    members: np.ndarray
    bound: float
    cells: list


def margin_witness(pset: LabeledPointSet, gamma: float) -> np.ndarray:
    """Greedily drop points until no opposite-labeled pair is closer than ``gamma``.

    Each round removes the point in the most violating pairs (lowest index on ties).
    """
    pos, neg = pset.positives, pset.negatives
    if len(pos) == 0 or len(neg) == 0:
        return np.arange(pset.n)
    V = pset.pairwise(pos, neg) < gamma
    alive_p = np.ones(len(pos), dtype=bool)
    alive_n = np.ones(len(neg), dtype=bool)
    while True:
        live = V & alive_p[:, None] & alive_n[None, :]
        cp = live.sum(axis=1)
        cn = live.sum(axis=0)
        if cp.max(initial=0) == 0:
            break
        counts = np.zeros(pset.n, dtype=np.int64)
        counts[pos] = cp
        counts[neg] = cn
        worst = int(np.argmax(counts))
        if pset.labels[worst] == 1:
            alive_p[np.searchsorted(pos, worst)] = False
        else:
            alive_n[np.searchsorted(neg, worst)] = False
    return np.sort(np.concatenate([pos[alive_p], neg[alive_n]]))


def srm_grid_search(pset: LabeledPointSet, grid, delta: float = 0.05, ddim: float | None = None) -> SrmResult:
    """Minimize the corollary bound over a grid of (epsilon cap, gamma) cells.

    Each cell builds a margin-gamma witness, measures its epsilon-consistency,
    and is feasible when that epsilon is within the cap and the bound is not
    vacuous. Returns the best feasible cell and its witness.
    """
    from .classify import epsilon_consistency
    from .nets import build_hierarchy

    grid = list(grid)
    if not grid:
        raise InvalidRange("empty grid")
    if ddim is None:
        ddim = estimate_ddim(build_hierarchy(pset, min_level=-8)).value if pset.n > 1 else 0.0
    cells = []
    best = None
    witnesses: dict[float, np.ndarray] = {}
    for eps_cap, gamma in grid:
        if not 0 < gamma <= 1:
            raise InvalidRange("grid gamma must lie in (0, 1]")
        if gamma not in witnesses:
            witnesses[gamma] = margin_witness(pset, gamma)
        w = witnesses[gamma]
        eps = epsilon_consistency(w, pset) if len(w) < pset.n else 0.0
        cell = SrmCell(eps_cap, gamma, eps, len(w), None, False)
        if eps > eps_cap:
            cell.reason = "epsilon above cap"
        else:
            try:
                cell.bound = corollary_bound(pset.n, eps, delta, gamma, ddim)
                cell.feasible = True
            except EllExceedsN:
                cell.reason = "vacuous"
        cells.append(cell)
        if cell.feasible and (best is None or cell.bound < best[0].bound):
            best = (cell, w)
    if best is None:
        raise NoFeasiblePoint("every grid cell is vacuous or infeasible")
    cell, w = best
    return SrmResult(cell.epsilon, cell.gamma, w, cell.bound, cells)
