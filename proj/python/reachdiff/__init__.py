"""Honest causal trees and forests for personalized reach difficulty."""

import json

from ._core import (
    FEATURE_NAMES,
    CausalForest,
    CausalTree,
    Dataset,
    FitError,
    ParseError,
    TLearner,
    UndefinedGroundTruth,
    UndefinedMetric,
    ValidationError,
    WorkspaceSpec,
    aggregated_r2,
    contains,
    featurize,
    generate_grid,
    ground_truth_tau,
    per_subject_mse,
    run_experiment_json,
)
from ._core import generate_cohort as _generate_cohort

__all__ = [
    "FEATURE_NAMES",
    "CausalForest",
    "CausalTree",
    "Dataset",
    "FitError",
    "ParseError",
    "TLearner",
    "UndefinedGroundTruth",
    "UndefinedMetric",
    "ValidationError",
    "WorkspaceSpec",
    "aggregated_r2",
    "contains",
    "featurize",
    "fit_tlearner",
    "generate_cohort",
    "generate_grid",
    "ground_truth_tau",
    "per_subject_mse",
    "run_experiment",
]


def generate_cohort(config=None):
    """Synthetic cohort from an experiment config dict (defaults when None)."""
    return _generate_cohort(json.dumps(config or {}))


def fit_tlearner(X, y, treated, variant="tree", params=None, seed=0):
    spec = {"variant": variant}
    if params:
        spec["params"] = params
    return TLearner.fit(X, y, treated, json.dumps(spec), seed)


def run_experiment(config, cohort):
    """Multi-seed evaluation; returns the report as a dict."""
    return json.loads(run_experiment_json(json.dumps(config or {}), cohort))
