"""The 1-NN rule over a subset of a labeled sample."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, EmptySubset
from .metric import LabeledPointSet


@dataclass(frozen=True, eq=False)
class Classifier:
    reference: LabeledPointSet
    members: np.ndarray

    def __post_init__(self):
        m = np.unique(np.asarray(self.members, dtype=np.intp))
        if len(m) == 0:
            raise EmptySubset("classifier needs at least one member")
        object.__setattr__(self, "members", m)

    @classmethod
    def full(cls, pset: LabeledPointSet) -> Classifier:
        return cls(pset, np.arange(pset.n))


def _decide(D: np.ndarray, mlab: np.ndarray) -> np.ndarray:
    # +1 iff strictly closer to a positive member; everything else, ties included, is -1
    inf = np.inf
    dpos = np.where(mlab[None, :] == 1, D, inf).min(axis=1) if D.shape[1] else np.full(len(D), inf)
    dneg = np.where(mlab[None, :] == -1, D, inf).min(axis=1) if D.shape[1] else np.full(len(D), inf)
    return np.where(dpos < dneg, 1, -1).astype(np.int8)


def predict_many(clf: Classifier, X, chunk: int = 2048) -> np.ndarray:
    """Labels for raw query vectors (original, unnormalized units)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    mlab = clf.reference.labels[clf.members]
    out = np.empty(len(X), dtype=np.int8)
    for lo in range(0, len(X), chunk):
        out[lo : lo + chunk] = _decide(clf.reference.query(X[lo : lo + chunk], clf.members), mlab)
    return out


def predict(clf: Classifier, x) -> int:
    return int(predict_many(clf, np.atleast_2d(np.asarray(x, dtype=float)))[0])


def predict_indices(clf: Classifier, idx, chunk: int = 2048) -> np.ndarray:
    """Labels for in-sample points (works in explicit-matrix mode too)."""
    idx = np.atleast_1d(np.asarray(idx, dtype=np.intp))
    mlab = clf.reference.labels[clf.members]
    out = np.empty(len(idx), dtype=np.int8)
    for lo in range(0, len(idx), chunk):
        out[lo : lo + chunk] = _decide(clf.reference.pairwise(idx[lo : lo + chunk], clf.members), mlab)
    return out


def empirical_error(clf: Classifier, X, y) -> float:
    """Fraction of (X, y) mispredicted."""
    y = np.asarray(y)
    if len(y) == 0:
        raise EmptyInput("empty test set")
    return float(np.mean(predict_many(clf, X) != y))


def epsilon_consistency(members, pset: LabeledPointSet) -> float:
    """Fraction of the sample where the subset's 1-NN rule disagrees with the full sample's."""
    sub = Classifier(pset, members)
    everything = np.arange(pset.n)
    full = predict_indices(Classifier.full(pset), everything)
    return float(np.mean(predict_indices(sub, everything) != full))
