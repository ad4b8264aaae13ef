from .classifiers import (
    ClassifierSpec,
    DecisionTree,
    KNNClassifier,
    LinearSVMClassifier,
    RandomForestClassifier,
    TrainingError,
    predict,
    train,
)
from .ensemble import (
    CLASSIFIER_NAMES,
    ENSEMBLE_NAME,
    MEMBER_NAMES,
    EnsembleModel,
    majority_vote,
    predict_ensemble,
    train_ensemble,
)
from .metrics import Metrics, evaluate, metrics_from_counts
from .standardize import Standardizer, fit_standardizer

__all__ = [
    "CLASSIFIER_NAMES",
    "ENSEMBLE_NAME",
    "MEMBER_NAMES",
    "ClassifierSpec",
    "DecisionTree",
    "EnsembleModel",
    "KNNClassifier",
    "LinearSVMClassifier",
    "Metrics",
    "RandomForestClassifier",
    "Standardizer",
    "TrainingError",
    "evaluate",
    "fit_standardizer",
    "majority_vote",
    "metrics_from_counts",
    "predict",
    "predict_ensemble",
    "train",
    "train_ensemble",
]
