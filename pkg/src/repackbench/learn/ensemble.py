"""Twelve-member majority-vote ensemble."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..seeds import derive_seed
from .classifiers import (
    ClassifierSpec,
    KNNClassifier,
    LinearSVMClassifier,
    RandomForestClassifier,
    train,
)
from .standardize import Standardizer, fit_standardizer

KNN_KS = (10, 25, 50, 100, 250, 500)
FOREST_SIZES = (10, 25, 50, 75, 100)
N_MEMBERS = len(KNN_KS) + len(FOREST_SIZES) + 1
VOTE_THRESHOLD = N_MEMBERS // 2  # malicious iff votes >= 6, so a 6-6 tie is malicious
ENSEMBLE_NAME = "Ensemble"
MODEL_FORMAT = "repackbench.ensemble"
MODEL_VERSION = 1

_CLASSES = {
    "KNN": KNNClassifier,
    "RandomForest": RandomForestClassifier,
    "LinearSVM": LinearSVMClassifier,
}


def member_specs(seed: int) -> list[ClassifierSpec]:
    """The canonical member order: 6 KNN, 5 random forests, 1 linear SVM."""
    specs = [ClassifierSpec("KNN", k=k) for k in KNN_KS]
    specs += [
        ClassifierSpec("RandomForest", estimators=e, seed=derive_seed(seed, "forest", e))
        for e in FOREST_SIZES
    ]
    specs.append(ClassifierSpec("LinearSVM"))
    return specs


MEMBER_NAMES = tuple(s.name for s in member_specs(0))
CLASSIFIER_NAMES = MEMBER_NAMES + (ENSEMBLE_NAME,)


def majority_vote(votes) -> np.ndarray:
    """Rows of 12 member votes (1 = malicious) to ensemble labels."""
    votes = np.asarray(votes, dtype=np.int64)
    return (votes.sum(axis=-1) >= VOTE_THRESHOLD).astype(np.int64)


@dataclass
class EnsembleModel:
    specs: list[ClassifierSpec]
    members: list
    standardizer: Standardizer

    @property
    def names(self) -> list[str]:
        return [s.name for s in self.specs]

    def votes(self, X) -> np.ndarray:
        """(n, 12) member predictions on raw (unstandardized) rows."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.standardizer.dim:
            raise ValueError(f"dimension mismatch: {X.shape[1]} vs {self.standardizer.dim}")
        Z = self.standardizer.apply(X)
        return np.stack([m.predict(Z) for m in self.members], axis=1)

    def predict(self, X) -> np.ndarray:
        return majority_vote(self.votes(X))

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "standardizer": self.standardizer.to_dict(),
            "members": [
                {
                    "variant": s.variant,
                    "k": s.k,
                    "estimators": s.estimators,
                    "seed": s.seed,
                    "state": m.state(),
                }
                for s, m in zip(self.specs, self.members)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "EnsembleModel":
        if d.get("format") != MODEL_FORMAT or d.get("version") != MODEL_VERSION:
            raise ValueError("unsupported model format")
        specs, members = [], []
        for m in d["members"]:
            specs.append(ClassifierSpec(m["variant"], m["k"], m["estimators"], m["seed"]))
            members.append(_CLASSES[m["variant"]].from_state(m["state"]))
        return cls(specs, members, Standardizer.from_dict(d["standardizer"]))

    @classmethod
    def from_json(cls, text: str) -> "EnsembleModel":
        return cls.from_dict(json.loads(text))


def train_ensemble(X, y, seed: int = 0) -> EnsembleModel:
    """Standardize X, then train the 12 members on it.

    KNN members whose k exceeds the row count are trained with k clamped to
    the row count; they keep their nominal name.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    std = fit_standardizer(X)
    Z = std.apply(X)
    specs = member_specs(seed)
    members = []
    for spec in specs:
        if spec.variant == "KNN" and spec.k > len(Z):
            members.append(KNNClassifier(len(Z), Z, y))
        else:
            members.append(train(spec, Z, y))
    return EnsembleModel(specs, members, std)


def predict_ensemble(model: EnsembleModel, x) -> int:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("predict_ensemble takes one feature row")
    return int(model.predict(x[None, :])[0])
