"""Feature assembly, cost-sensitive random forest, evaluation and ranking."""

from .evaluate import EvalMetrics, cross_validate, evaluate
from .features import FEATURE_NAMES, SCHEMA_VERSION, FeatureVector, Similarities, assemble_features
from .forest import CostMatrix, ForestModel, ForestParams, predict, predict_many, train_forest
from .ranking import gain_ratio_rank

__all__ = [
    "CostMatrix", "EvalMetrics", "FEATURE_NAMES", "FeatureVector", "ForestModel", "ForestParams",
    "SCHEMA_VERSION", "Similarities", "assemble_features", "cross_validate", "evaluate",
    "gain_ratio_rank", "predict", "predict_many", "train_forest",
]
