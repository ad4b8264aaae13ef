"""KNN, random forest and linear SVM written against plain numpy.

Labels are 0/1 integer arrays with 1 = malicious. Every tie resolves to
malicious.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..seeds import derive_seed

SVM_EPOCHS = 200
SVM_LAMBDA = 1e-3


class TrainingError(ValueError):
    pass


@dataclass(frozen=True)
class ClassifierSpec:
    variant: str  # "KNN" | "RandomForest" | "LinearSVM"
    k: Optional[int] = None
    estimators: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.variant == "KNN":
            if self.k is None or self.k < 1:
                raise ValueError("KNN needs k >= 1")
        elif self.variant == "RandomForest":
            if self.estimators is None or self.estimators < 1:
                raise ValueError("RandomForest needs estimators >= 1")
        elif self.variant != "LinearSVM":
            raise ValueError(f"unknown classifier variant {self.variant!r}")

    @property
    def name(self) -> str:
        if self.variant == "KNN":
            return f"KNN{self.k}"
        if self.variant == "RandomForest":
            return f"Trees{self.estimators}"
        return "SVM"


def _as_xy(X, y=None):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise TrainingError("X must be 2-D")
    if y is None:
        return X
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (X.shape[0],):
        raise TrainingError("y must be parallel to X")
    if not np.isin(y, (0, 1)).all():
        raise TrainingError("labels must be 0/1")
    return X, y


def _need_both_classes(y: np.ndarray, what: str) -> None:
    if not (np.any(y == 1) and np.any(y == 0)):
        raise TrainingError(f"{what} needs at least one row of each class")


# --------------------------------------------------------------------------


class KNNClassifier:
    """Majority of the k nearest rows by Euclidean distance.

    Equal distances are ordered by row index; a tied vote is malicious.
    """

    kind = "KNN"

    def __init__(self, k: int, X, y):
        X, y = _as_xy(X, y)
        if X.shape[0] < k:
            raise TrainingError(f"KNN with k={k} needs at least {k} rows, got {X.shape[0]}")
        self.k = int(k)
        self.X = X
        self.y = y

    def neighbours(self, Q) -> np.ndarray:
        Q = _as_xy(Q)
        d2 = ((Q[:, None, :] - self.X[None, :, :]) ** 2).sum(axis=-1)
        return np.argsort(d2, axis=1, kind="stable")[:, : self.k]

    def predict(self, Q) -> np.ndarray:
        votes = self.y[self.neighbours(Q)].sum(axis=1)
        return (2 * votes >= self.k).astype(np.int64)

    def state(self) -> dict:
        return {"k": self.k, "X": self.X.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_state(cls, s: dict) -> "KNNClassifier":
        return cls(s["k"], np.array(s["X"], dtype=np.float64).reshape(len(s["y"]), -1), s["y"])


# --------------------------------------------------------------------------


def _gini_split(Xn: np.ndarray, yn: np.ndarray, feats: np.ndarray):
    """Best (impurity, feature, threshold) over ``feats`` or None if no split separates."""
    n = Xn.shape[0]
    cols = Xn[:, feats]
    order = np.argsort(cols, axis=0, kind="stable")
    sv = cols[order, np.arange(cols.shape[1])]
    sy = yn[order]
    pos_left = np.cumsum(sy, axis=0)[:-1].astype(np.float64)
    n_left = np.arange(1, n, dtype=np.float64)[:, None]
    n_right = n - n_left
    pos_right = sy.sum(axis=0) - pos_left
    # n * weighted gini = 2 * (pl*(nl-pl)/nl + pr*(nr-pr)/nr)
    imp = pos_left * (n_left - pos_left) / n_left + pos_right * (n_right - pos_right) / n_right
    valid = sv[1:] > sv[:-1]
    if not valid.any():
        return None
    imp = np.where(valid, imp, np.inf)
    # first minimum in candidate-feature order, then by position
    flat = np.argmin(imp.T)
    j, i = divmod(int(flat), n - 1)
    thr = 0.5 * (sv[i, j] + sv[i + 1, j])
    if not thr < sv[i + 1, j]:
        thr = sv[i, j]
    return float(imp[i, j]), int(feats[j]), float(thr)


class DecisionTree:
    """Gini tree grown until nodes are pure or hold fewer than two samples.

    Each split looks at ``max_features`` random candidate features; when none
    of them separates the node, the remaining features are tried before the
    node becomes a leaf.
    """

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.int64)

    @property
    def n_nodes(self) -> int:
        return len(self.value)

    @classmethod
    def grow(cls, X: np.ndarray, y: np.ndarray, max_features: int, rng: np.random.Generator) -> "DecisionTree":
        d = X.shape[1]
        feature, threshold, left, right, value = [], [], [], [], []

        def new_node() -> int:
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(0)
            return len(value) - 1

        root = new_node()
        stack = [(root, np.arange(X.shape[0]))]
        while stack:
            node, idx = stack.pop()
            yn = y[idx]
            pos = int(yn.sum())
            value[node] = 1 if 2 * pos >= len(idx) else 0
            if len(idx) < 2 or pos == 0 or pos == len(idx):
                continue
            Xn = X[idx]
            perm = rng.permutation(d)
            best = _gini_split(Xn, yn, perm[:max_features])
            if best is None and max_features < d:
                best = _gini_split(Xn, yn, perm[max_features:])
            if best is None:
                continue
            _, f, thr = best
            go_left = Xn[:, f] <= thr
            feature[node], threshold[node] = f, thr
            lnode, rnode = new_node(), new_node()
            left[node], right[node] = lnode, rnode
            stack.append((rnode, idx[~go_left]))
            stack.append((lnode, idx[go_left]))
        return cls(feature, threshold, left, right, value)

    def predict(self, Q: np.ndarray) -> np.ndarray:
        node = np.zeros(Q.shape[0], dtype=np.int64)
        rows = np.arange(Q.shape[0])
        while True:
            f = self.feature[node]
            inner = f >= 0
            if not inner.any():
                return self.value[node]
            r, nd = rows[inner], node[inner]
            go_left = Q[r, f[inner]] <= self.threshold[nd]
            node[inner] = np.where(go_left, self.left[nd], self.right[nd])

    def state(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_state(cls, s: dict) -> "DecisionTree":
        return cls(s["feature"], s["threshold"], s["left"], s["right"], s["value"])


class RandomForestClassifier:
    """Bootstrap-aggregated Gini trees with floor(sqrt(d)) candidate features per split."""

    kind = "RandomForest"

    def __init__(self, trees: list[DecisionTree]):
        self.trees = trees

    @classmethod
    def fit(cls, estimators: int, X, y, seed: int, bootstrap: bool = True) -> "RandomForestClassifier":
        X, y = _as_xy(X, y)
        _need_both_classes(y, "RandomForest")
        n, d = X.shape
        max_features = max(1, math.isqrt(d))
        trees = []
        for i in range(estimators):
            rng = np.random.default_rng(derive_seed(seed, "tree", i))
            idx = rng.integers(0, n, n) if bootstrap else np.arange(n)
            trees.append(DecisionTree.grow(X[idx], y[idx], max_features, rng))
        return cls(trees)

    def predict(self, Q) -> np.ndarray:
        Q = _as_xy(Q)
        votes = np.zeros(Q.shape[0], dtype=np.int64)
        for t in self.trees:
            votes += t.predict(Q)
        return (2 * votes >= len(self.trees)).astype(np.int64)

    def state(self) -> dict:
        return {"trees": [t.state() for t in self.trees]}

    @classmethod
    def from_state(cls, s: dict) -> "RandomForestClassifier":
        return cls([DecisionTree.from_state(t) for t in s["trees"]])


# --------------------------------------------------------------------------


class LinearSVMClassifier:
    """Linear SVM trained by full-batch hinge-loss subgradient descent.

    Minimises ``lam/2 |w|^2 + mean(max(0, 1 - y (w.x + b)))`` with labels
    mapped to -1/+1. The bias is folded into ``w`` as a constant input so it
    shares the L2 penalty. Epoch ``t`` (from 1) steps by ``1/(lam t)`` and
    then projects onto the ball of radius ``1/sqrt(lam)``. No randomness.
    """

    kind = "LinearSVM"

    def __init__(self, w: np.ndarray, b: float):
        self.w = np.asarray(w, dtype=np.float64)
        self.b = float(b)

    @classmethod
    def fit(cls, X, y, epochs: int = SVM_EPOCHS, lam: float = SVM_LAMBDA) -> "LinearSVMClassifier":
        X, y = _as_xy(X, y)
        _need_both_classes(y, "LinearSVM")
        n = X.shape[0]
        Xa = np.hstack([X, np.ones((n, 1))])
        s = 2.0 * y - 1.0
        w = np.zeros(Xa.shape[1])
        radius = 1.0 / math.sqrt(lam)
        for t in range(1, epochs + 1):
            eta = 1.0 / (lam * t)
            active = s * (Xa @ w) < 1.0
            grad = lam * w - (s[active, None] * Xa[active]).sum(axis=0) / n
            w = w - eta * grad
            norm = float(np.sqrt(w @ w))
            if norm > radius:
                w *= radius / norm
        return cls(w[:-1], w[-1])

    def decision_function(self, Q) -> np.ndarray:
        return _as_xy(Q) @ self.w + self.b

    def predict(self, Q) -> np.ndarray:
        return (self.decision_function(Q) >= 0).astype(np.int64)

    def state(self) -> dict:
        return {"w": self.w.tolist(), "b": self.b}

    @classmethod
    def from_state(cls, s: dict) -> "LinearSVMClassifier":
        return cls(np.array(s["w"], dtype=np.float64), s["b"])


def train(spec: ClassifierSpec, X, y):
    """Train one classifier on (already standardized) rows."""
    if spec.variant == "KNN":
        return KNNClassifier(spec.k, X, y)
    if spec.variant == "RandomForest":
        return RandomForestClassifier.fit(spec.estimators, X, y, spec.seed)
    return LinearSVMClassifier.fit(X, y)


def predict(classifier, x) -> int:
    """Label of a single feature row."""
    return int(classifier.predict(np.asarray(x, dtype=np.float64)[None, :])[0])
