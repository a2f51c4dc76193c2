"""Robust binary classification for categorical data from pairwise marginals.

The package trains a randomized linear-regression classifier on indicator
features, performs worst-case maximal-correlation feature selection via a
block group lasso, and ships exact small-instance oracles that machine-check
the worst-case-error guarantees.
"""

from .classifier import (
    EvaluationResult,
    Prediction,
    RenyiModel,
    decide_map,
    decide_randomized,
    evaluate,
    load_model,
    predict_conditional,
    save_model,
    train_model,
)
from .core import (
    QuadSolution,
    h_value,
    hgr_binary,
    min_hgr_bound,
    solve_population,
    solve_saa,
)
from .errors import RenyiError
from .estimators import RenyiClassifier, RenyiFeatureSelector
from .experiment import run_synthetic
from .feature_selection import (
    AdmmOptions,
    SelectionResult,
    project_l1_ball,
    prox_linf,
    select,
    select_saa,
)
from .joint import DecisionRule, JointDistribution, parse_dump
from .marginals import (
    MarginalConstraints,
    PairwiseMarginals,
    build_constraints,
    estimate,
    from_joint,
)
from .oracle import (
    feasible_point,
    hgr_bruteforce,
    map_rule_of,
    random_instance,
    renyi_rule_of,
    solve_estar,
    solve_theta,
    worst_case_error,
)
from .schema import CategoricalSchema, Dataset, IndicatorRow, encode_row, expand_pairs, ingest_csv
from .simplex import LpProblem, LpSolution, lp_solve

__version__ = "0.1.0"

__all__ = [
    "AdmmOptions",
    "CategoricalSchema",
    "Dataset",
    "DecisionRule",
    "EvaluationResult",
    "IndicatorRow",
    "JointDistribution",
    "LpProblem",
    "LpSolution",
    "MarginalConstraints",
    "PairwiseMarginals",
    "Prediction",
    "QuadSolution",
    "RenyiClassifier",
    "RenyiError",
    "RenyiFeatureSelector",
    "RenyiModel",
    "SelectionResult",
    "build_constraints",
    "decide_map",
    "decide_randomized",
    "encode_row",
    "estimate",
    "evaluate",
    "expand_pairs",
    "feasible_point",
    "from_joint",
    "h_value",
    "hgr_binary",
    "hgr_bruteforce",
    "ingest_csv",
    "load_model",
    "lp_solve",
    "map_rule_of",
    "min_hgr_bound",
    "parse_dump",
    "predict_conditional",
    "project_l1_ball",
    "prox_linf",
    "random_instance",
    "renyi_rule_of",
    "run_synthetic",
    "save_model",
    "select",
    "select_saa",
    "solve_estar",
    "solve_population",
    "solve_saa",
    "solve_theta",
    "train_model",
    "worst_case_error",
]
