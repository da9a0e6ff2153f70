"""Sparse recovery algorithms: greedy baselines, the Oracle and TMP."""

from .greedy import (
    PreselectionResult,
    RecoveryResult,
    cosamp,
    exhaustive_l0,
    fit_on_support,
    gomp,
    gomp_estimate,
    omp,
    oracle_estimator,
)
from .tree import (
    PathEvaluation,
    SearchPath,
    TmpConfig,
    TreeState,
    TreeStats,
    noncausal_completion,
    preselect,
    tmp,
)

__all__ = [
    "PathEvaluation",
    "PreselectionResult",
    "RecoveryResult",
    "SearchPath",
    "TmpConfig",
    "TreeState",
    "TreeStats",
    "cosamp",
    "exhaustive_l0",
    "fit_on_support",
    "gomp",
    "gomp_estimate",
    "noncausal_completion",
    "omp",
    "oracle_estimator",
    "preselect",
    "tmp",
]
