from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Standardizer:
    """Per-feature mean and population standard deviation."""

    mean: np.ndarray
    std: np.ndarray

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.dim:
            raise ValueError(f"dimension mismatch: {X.shape[-1]} vs {self.dim}")
        safe = np.where(self.std > 0, self.std, 1.0)
        return np.where(self.std > 0, (X - self.mean) / safe, 0.0)

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(np.array(d["mean"], dtype=np.float64), np.array(d["std"], dtype=np.float64))


def fit_standardizer(X) -> Standardizer:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("cannot fit a standardizer on an empty matrix")
    std = X.std(axis=0)
    # a constant column can get a rounding-error std from an inexact mean
    std[np.ptp(X, axis=0) == 0] = 0.0
    return Standardizer(X.mean(axis=0), std)
