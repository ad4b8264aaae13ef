"""Confusion counts and derived scores, malicious being the positive class."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float
    specificity: float
    accuracy: float
    # names of metrics whose denominator was zero (value forced to 0)
    undefined: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn,
            "precision": self.precision, "recall": self.recall, "f1": self.f1,
            "specificity": self.specificity, "accuracy": self.accuracy,
            "undefined": list(self.undefined),
        }


def metrics_from_counts(tp: int, fp: int, fn: int, tn: int) -> Metrics:
    undefined = []

    def ratio(name, num, den):
        if den == 0:
            undefined.append(name)
            return 0.0
        return num / den

    precision = ratio("precision", tp, tp + fp)
    recall = ratio("recall", tp, tp + fn)
    f1 = ratio("f1", 2.0 * precision * recall, precision + recall)
    specificity = ratio("specificity", tn, tn + fp)
    accuracy = ratio("accuracy", tp + tn, tp + fp + fn + tn)
    return Metrics(tp, fp, fn, tn, precision, recall, f1, specificity, accuracy, tuple(undefined))


def evaluate(predictions: Sequence[int], truth: Sequence[int]) -> Metrics:
    """Score 0/1 predictions (1 = malicious) against 0/1 truth."""
    p = np.asarray(predictions, dtype=np.int64)
    t = np.asarray(truth, dtype=np.int64)
    if p.shape != t.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {t.shape}")
    if p.size == 0:
        raise ValueError("empty input")
    if min(p.min(), t.min()) < 0 or max(p.max(), t.max()) > 1:
        raise ValueError("labels must be 0/1")
    # cell index 2*truth + prediction: 0 tn, 1 fp, 2 fn, 3 tp
    tn, fp, fn, tp = (int(c) for c in np.bincount(2 * t + p, minlength=4))
    return metrics_from_counts(tp, fp, fn, tn)
