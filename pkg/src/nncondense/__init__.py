"""Nearest-neighbor condensing: consistent subsets from margin-scale nets."""
from .classify import Classifier, empirical_error, epsilon_consistency, predict, predict_many
from .condense import (
    CondensedSet,
    brute_force_min_consistent,
    condense,
    prune_heuristic,
    verify_consistent,
)
from .errors import InputError, InvariantViolation, NncError
from .metric import LabeledPointSet, diameter, load, scaled_margin
from .nets import Net, NetHierarchy, build_hierarchy, build_net_bruteforce, extract_terminal_net

__version__ = "0.1.0"

__all__ = [
    "Classifier",
    "CondensedSet",
    "InputError",
    "InvariantViolation",
    "LabeledPointSet",
    "Net",
    "NetHierarchy",
    "NncError",
    "brute_force_min_consistent",
    "build_hierarchy",
    "build_net_bruteforce",
    "condense",
    "diameter",
    "empirical_error",
    "epsilon_consistency",
    "extract_terminal_net",
    "load",
    "predict",
    "predict_many",
    "prune_heuristic",
    "scaled_margin",
    "verify_consistent",
]
