"""Labeled point sets over a pluggable metric.

A :class:`LabeledPointSet` is always stored *normalized*: coordinates (or the
explicit distance matrix) are multiplied by ``scale`` so that the diameter is
1. Every distance used anywhere in the package goes through
:meth:`LabeledPointSet.pairwise`, so the same pair always yields the same
double and exact comparisons stay coherent across modules.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .errors import (
    DimensionMismatch,
    EmptyInput,
    InvalidLabel,
    MetricViolation,
    OutOfSampleUnsupported,
    ParseError,
    SingleClass,
    TooFewPoints,
    ZeroDiameter,
    ZeroMargin,
)

METRICS = ("l1", "l2", "linf", "explicit")

_CDIST = {"l1": "cityblock", "l2": "euclidean", "linf": "chebyshev"}
_ALIASES = {
    "l1": "l1", "manhattan": "l1", "cityblock": "l1",
    "l2": "l2", "euclidean": "l2",
    "linf": "linf", "l_inf": "linf", "chebyshev": "linf", "max": "linf",
    "explicit": "explicit", "matrix": "explicit", "precomputed": "explicit",
}

METRIC_TOL = 1e-9
# rows per block when scanning all pairs
_CHUNK = 2048


def metric_name(kind: str) -> str:
    try:
        return _ALIASES[kind.lower()]
    except KeyError:
        raise ValueError(f"unknown metric {kind!r}; expected one of {METRICS}") from None


@dataclass(frozen=True, eq=False)
class Margin:
    gamma: float
    witness_pair: tuple[int, int]


@dataclass(frozen=True, eq=False)
class LabeledPointSet:
    """Immutable, normalized labeled sample.

    Attributes:
        points: (n, d) normalized coordinates, or None in explicit mode.
        matrix: (n, n) normalized distance matrix, or None in vector mode.
        labels: int8 array of +1/-1.
        metric_kind: one of ``METRICS``.
        scale: factor applied to the raw input; raw distance = dist / scale.
        diameter: normalized diameter (1.0 for n >= 2, 0.0 for a singleton).
    """

    points: np.ndarray | None
    matrix: np.ndarray | None
    labels: np.ndarray
    metric_kind: str
    scale: float
    diameter: float

    @property
    def n(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return self.n

    @property
    def dim(self) -> int | None:
        return None if self.points is None else self.points.shape[1]

    @property
    def is_explicit(self) -> bool:
        return self.metric_kind == "explicit"

    @property
    def positives(self) -> np.ndarray:
        return np.flatnonzero(self.labels == 1)

    @property
    def negatives(self) -> np.ndarray:
        return np.flatnonzero(self.labels == -1)

    def pairwise(self, rows, cols) -> np.ndarray:
        """Distances between index arrays ``rows`` and ``cols`` (normalized units)."""
        rows = np.atleast_1d(np.asarray(rows, dtype=np.intp))
        cols = np.atleast_1d(np.asarray(cols, dtype=np.intp))
        if len(rows) == 0 or len(cols) == 0:
            return np.empty((len(rows), len(cols)))
        if self.matrix is not None:
            return self.matrix[np.ix_(rows, cols)]
        return cdist(self.points[rows], self.points[cols], metric=_CDIST[self.metric_kind])

    def row(self, i: int, cols=None) -> np.ndarray:
        """Distances from point ``i`` to ``cols`` (all points when omitted)."""
        if cols is None:
            if self.matrix is not None:
                return self.matrix[i]
            cols = np.arange(self.n)
        return self.pairwise([i], cols)[0]

    def dist(self, i: int, j: int) -> float:
        return float(self.pairwise([i], [j])[0, 0])

    def query(self, X, cols) -> np.ndarray:
        """Distances from raw (unnormalized) query vectors to sample points ``cols``."""
        if self.points is None:
            raise OutOfSampleUnsupported("explicit-matrix sets cannot measure new points")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.points.shape[1]:
            raise DimensionMismatch(
                f"query has dimension {X.shape[1]}, sample has {self.points.shape[1]}"
            )
        cols = np.atleast_1d(np.asarray(cols, dtype=np.intp))
        if len(cols) == 0:
            return np.empty((len(X), 0))
        return cdist(X * self.scale, self.points[cols], metric=_CDIST[self.metric_kind])

    def subset(self, idx) -> LabeledPointSet:
        """Restriction to ``idx``, keeping the parent's scale (not re-normalized)."""
        idx = np.asarray(idx, dtype=np.intp)
        pts = None if self.points is None else _frozen(self.points[idx])
        mat = None if self.matrix is None else _frozen(self.matrix[np.ix_(idx, idx)])
        sub = LabeledPointSet(pts, mat, _frozen(self.labels[idx]), self.metric_kind, self.scale, 0.0)
        diam = _max_pairwise(sub) if len(idx) >= 2 else 0.0
        object.__setattr__(sub, "diameter", diam)
        return sub

    def raw_points(self) -> np.ndarray | None:
        return None if self.points is None else self.points / self.scale


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _max_pairwise(s: LabeledPointSet) -> float:
    if s.matrix is not None:
        return float(s.matrix.max())
    best = 0.0
    allidx = np.arange(s.n)
    for lo in range(0, s.n, _CHUNK):
        best = max(best, float(s.pairwise(np.arange(lo, min(lo + _CHUNK, s.n)), allidx).max()))
    return best


def validate_matrix(
    matrix, tol: float = METRIC_TOL, exhaustive_limit: int = 800, samples: int = 200_000, seed: int = 0
) -> np.ndarray:
    """Check that ``matrix`` is a (pseudo)metric and return it symmetrized.

    Raises MetricViolation on shape, sign, diagonal, symmetry or triangle
    failures. The triangle check is exhaustive up to ``exhaustive_limit``
    points and sampled beyond.
    """
    D = np.array(matrix, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise MetricViolation(f"distance matrix must be square, got shape {D.shape}")
    if not np.all(np.isfinite(D)):
        raise MetricViolation("distance matrix has non-finite entries")
    n = D.shape[0]
    slack = tol * max(1.0, float(np.abs(D).max()) if n else 1.0)
    if np.any(D < -slack):
        raise MetricViolation("distance matrix has negative entries")
    if np.any(np.abs(np.diag(D)) > slack):
        i = int(np.argmax(np.abs(np.diag(D))))
        raise MetricViolation(f"nonzero diagonal entry at ({i}, {i})")
    asym = np.abs(D - D.T)
    if np.any(asym > slack):
        i, j = np.unravel_index(int(np.argmax(asym)), D.shape)
        raise MetricViolation(f"asymmetric entries at ({i}, {j}): {D[i, j]} vs {D[j, i]}")
    D = (D + D.T) / 2.0
    np.fill_diagonal(D, 0.0)
    np.clip(D, 0.0, None, out=D)
    bad = find_triangle_violation(D, slack, exhaustive_limit, samples, seed)
    if bad is not None:
        i, j, k = bad
        raise MetricViolation(
            f"triangle inequality fails: d({i},{j})={D[i, j]} > d({i},{k})+d({k},{j})={D[i, k] + D[k, j]}"
        )
    return D


def find_triangle_violation(D, slack=0.0, exhaustive_limit=800, samples=200_000, seed=0):
    """Return a triple (i, j, k) with d(i,j) > d(i,k) + d(k,j) + slack, or None."""
    n = D.shape[0]
    if n <= exhaustive_limit:
        for k in range(n):
            viol = D > D[:, k : k + 1] + D[k : k + 1, :] + slack
            if viol.any():
                i, j = np.unravel_index(int(np.argmax(viol)), D.shape)
                return int(i), int(j), k
        return None
    rng = np.random.default_rng(seed)
    t = rng.integers(0, n, size=(samples, 3))
    lhs = D[t[:, 0], t[:, 1]]
    rhs = D[t[:, 0], t[:, 2]] + D[t[:, 2], t[:, 1]]
    hit = np.flatnonzero(lhs > rhs + slack)
    if len(hit):
        i, j, k = t[hit[0]]
        return int(i), int(j), int(k)
    return None


def _check_labels(labels, n: int) -> np.ndarray:
    y = np.asarray(labels)
    if y.ndim != 1 or len(y) != n:
        raise DimensionMismatch(f"expected {n} labels, got shape {y.shape}")
    try:
        yf = y.astype(float)
    except (TypeError, ValueError):
        raise InvalidLabel("labels must be +1 or -1") from None
    bad = np.flatnonzero((yf != 1) & (yf != -1))
    if len(bad):
        raise InvalidLabel(f"label {y[bad[0]]!r} at index {bad[0]} is not +1 or -1")
    return yf.astype(np.int8)


def load(
    data,
    labels,
    metric_kind: str = "l2",
    *,
    approximate_diameter: bool = False,
    approximate_threshold: int = 50_000,
) -> LabeledPointSet:
    """Validate and normalize a labeled sample.

    Args:
        data: (n, d) feature array, or an (n, n) distance matrix when
            ``metric_kind`` is ``"explicit"``.
        labels: length-n sequence of +1/-1.
        metric_kind: l1, l2, linf or explicit (aliases accepted).
        approximate_diameter: use the farthest-point 2-approximation instead
            of the exact O(n^2) scan. Only honored when n exceeds
            ``approximate_threshold``.

    Returns:
        A normalized LabeledPointSet with diameter 1 (n >= 2).
    """
    kind = metric_name(metric_kind)
    if kind == "explicit":
        if np.ndim(data) != 2 or np.shape(data)[0] == 0:
            raise EmptyInput("empty distance matrix")
        D = validate_matrix(data)
        n = D.shape[0]
        pts = None
    else:
        if len(data) == 0:
            raise EmptyInput("no points given")
        try:
            pts = np.array(data, dtype=float)
        except ValueError:
            raise DimensionMismatch("feature vectors do not share one dimension") from None
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise DimensionMismatch("feature vectors do not share one dimension")
        if not np.all(np.isfinite(pts)):
            raise ValueError("non-finite coordinates")
        n = pts.shape[0]
        D = None
    y = _check_labels(labels, n)

    raw = LabeledPointSet(pts, D, y, kind, 1.0, 0.0)
    if n == 1:
        diam = 0.0
    elif approximate_diameter and n > approximate_threshold:
        far = raw.row(0)
        diam = 2.0 * float(far.max())
    else:
        diam = _max_pairwise(raw)
    if n >= 2 and diam == 0.0:
        raise ZeroDiameter("all points coincide")
    scale = 1.0 / diam if n >= 2 else 1.0
    raw_pts, raw_D = pts, D
    for _ in range(64):
        if pts is not None:
            pts = raw_pts * scale
        else:
            D = raw_D * scale
        if n < 2 or (approximate_diameter and n > approximate_threshold):
            break
        # rounding may leave the diameter pair a few ulps above 1
        if _max_pairwise(LabeledPointSet(pts, D, y, kind, scale, 1.0)) <= 1.0:
            break
        scale *= 1.0 - 4 * np.finfo(float).eps
    if pts is not None:
        pts = _frozen(pts)
    else:
        D = _frozen(D)
    return LabeledPointSet(pts, D, _frozen(y), kind, scale, 1.0 if n >= 2 else 0.0)


def diameter(pset: LabeledPointSet) -> float:
    """Exact maximum pairwise distance (normalized units)."""
    if pset.n < 2:
        raise TooFewPoints("diameter needs at least two points")
    return _max_pairwise(pset)


def scaled_margin(pset: LabeledPointSet) -> Margin:
    """Minimum opposite-label distance divided by the diameter.

    Ties in the witness pair go to the lowest positive index, then the lowest
    negative index.
    """
    pos, neg = pset.positives, pset.negatives
    if len(pos) == 0 or len(neg) == 0:
        raise SingleClass("margin needs both labels present")
    best = math.inf
    witness = (-1, -1)
    for lo in range(0, len(pos), _CHUNK):
        block = pset.pairwise(pos[lo : lo + _CHUNK], neg)
        k = int(np.argmin(block))
        r, c = divmod(k, block.shape[1])
        if block[r, c] < best:
            best = float(block[r, c])
            witness = (int(pos[lo + r]), int(neg[c]))
    if best == 0.0:
        raise ZeroMargin(f"points {witness[0]} and {witness[1]} coincide with opposite labels")
    diam = pset.diameter if pset.diameter > 0 else 1.0
    # rescaling can push a diameter pair a few ulps past 1
    return Margin(gamma=min(best / diam, 1.0), witness_pair=witness)


# ---------------------------------------------------------------- ingestion


def _parse_float(cell: str, row: int, col: int, path) -> float:
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"{path}: row {row}, column {col}: non-numeric value {cell!r}") from None


def _split(line: str, delimiter: str | None) -> list[str]:
    if delimiter is None or delimiter == "whitespace":
        return line.split()
    return next(csv.reader([line], delimiter=delimiter))


def read_table(
    path,
    *,
    delimiter: str | None = ",",
    skip_header: bool = False,
) -> tuple[list[list[str]], int]:
    """Read a delimited text file into rows of string cells.

    Returns the rows and the 1-based line number of the first row.
    """
    path = Path(path)
    rows = []
    first = 2 if skip_header else 1
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            if lineno == 1 and skip_header:
                continue
            line = line.strip()
            if not line:
                continue
            rows.append(_split(line, delimiter))
    return rows, first


def read_labeled_csv(
    path,
    *,
    label_column: int = -1,
    feature_columns: Sequence[int] | None = None,
    label_map: Mapping[str, int] | None = None,
    default_label: int | None = None,
    keep_labels: Sequence[str] | None = None,
    delimiter: str | None = ",",
    skip_header: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Parse one-row-per-point CSV into features and +/-1 labels.

    Raw label cells are matched as strings after numeric canonicalization
    ("4", "4.0" -> "4"). Rows whose raw label is not in ``keep_labels``
    (when given) are dropped before mapping; unmapped labels take
    ``default_label`` or raise ParseError.
    """
    path = Path(path)
    rows, first = read_table(path, delimiter=delimiter, skip_header=skip_header)
    if not rows:
        raise EmptyInput(f"{path}: no data rows")
    width = len(rows[0])
    lc = label_column % width
    fcols = list(feature_columns) if feature_columns is not None else [c for c in range(width) if c != lc]
    keep = None if keep_labels is None else {_canon(k) for k in keep_labels}
    lmap = {_canon(k): int(v) for k, v in (label_map or {}).items()}
    X, y = [], []
    for r, cells in enumerate(rows):
        lineno = first + r
        if len(cells) != width:
            raise ParseError(f"{path}: row {lineno}: expected {width} columns, found {len(cells)}")
        raw = _canon(cells[lc])
        if keep is not None and raw not in keep:
            continue
        if raw in lmap:
            lab = lmap[raw]
        elif default_label is not None:
            lab = default_label
        elif not lmap and raw in ("1", "-1"):
            lab = int(raw)
        else:
            raise ParseError(f"{path}: row {lineno}, column {lc + 1}: unmapped label {cells[lc]!r}")
        X.append([_parse_float(cells[c], lineno, c + 1, path) for c in fcols])
        y.append(lab)
    return np.asarray(X, dtype=float).reshape(len(X), len(fcols)), np.asarray(y, dtype=np.int8)


def _canon(v) -> str:
    s = str(v).strip()
    try:
        f = float(s)
    except ValueError:
        return s
    return str(int(f)) if f.is_integer() else repr(f)


def read_matrix_csv(matrix_path, labels_path, *, delimiter: str | None = ",") -> tuple[np.ndarray, np.ndarray]:
    """Read a square distance-matrix CSV and a one-label-per-line file."""
    rows, first = read_table(matrix_path, delimiter=delimiter)
    D = np.array(
        [[_parse_float(c, first + r, k + 1, matrix_path) for k, c in enumerate(cells)] for r, cells in enumerate(rows)]
    )
    lrows, lfirst = read_table(labels_path, delimiter=delimiter)
    y = [_parse_float(cells[0], lfirst + r, 1, labels_path) for r, cells in enumerate(lrows)]
    return D, np.asarray(y)


def write_matrix_csv(matrix, labels, matrix_path, labels_path) -> None:
    np.savetxt(matrix_path, np.asarray(matrix), delimiter=",", fmt="%.17g")
    np.savetxt(labels_path, np.asarray(labels, dtype=int), fmt="%d")
