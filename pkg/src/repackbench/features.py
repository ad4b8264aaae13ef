"""Static, dynamic and hybrid feature vectors."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .categories import N_CATEGORIES, STATIC_SUBSET
from .corpus import MALICIOUS, SyntheticApp
from .stimulator import Trace

STATIC_KINDS = ("basic", "permission", "api", "all")
DYNAMIC_KINDS = ("dynamic", "hybrid")
KINDS = STATIC_KINDS + DYNAMIC_KINDS
KIND_LENGTH = {
    "basic": 6,
    "permission": 4,
    "api": STATIC_SUBSET,
    "all": 6 + 4 + STATIC_SUBSET,
    "dynamic": N_CATEGORIES,
    "hybrid": 6 + 4 + STATIC_SUBSET + N_CATEGORIES,
}


class FeatureError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureVector:
    kind: str
    values: tuple[float, ...]
    app_id: str

    def __post_init__(self):
        if self.kind not in KIND_LENGTH:
            raise FeatureError(f"unknown feature kind {self.kind!r}")
        if len(self.values) != KIND_LENGTH[self.kind]:
            raise FeatureError(f"{self.kind} vector needs {KIND_LENGTH[self.kind]} values, got {len(self.values)}")
        if not all(math.isfinite(v) for v in self.values):
            raise FeatureError("non-finite feature value")


@dataclass(frozen=True)
class FeatureMatrix:
    kind: str
    rows: tuple[FeatureVector, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.rows) != len(self.labels):
            raise FeatureError("labels not parallel to rows")
        for r in self.rows:
            if r.kind != self.kind:
                raise FeatureError(f"mixed kinds: {r.kind} in {self.kind} matrix")

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def app_ids(self) -> list[str]:
        return [r.app_id for r in self.rows]

    def to_array(self) -> np.ndarray:
        if not self.rows:
            return np.zeros((0, KIND_LENGTH[self.kind]))
        return np.array([r.values for r in self.rows], dtype=np.float64)

    def label_array(self) -> np.ndarray:
        """Labels as 0/1 with malicious = 1."""
        return np.array([1 if lab == MALICIOUS else 0 for lab in self.labels], dtype=np.int64)


def extract_static(app: SyntheticApp, kind: str) -> FeatureVector:
    m = app.manifest
    if kind == "basic":
        vals = [m.min_sdk, m.max_sdk, m.n_activities, m.n_services, m.n_receivers, m.n_providers]
    elif kind == "permission":
        total = len(m.permissions)
        if total == 0:
            vals = [0, 0.0, 0.0, 0.0]
        else:
            android = sum(1 for p in m.permissions if p.origin == "android")
            custom = sum(1 for p in m.permissions if p.origin == "custom")
            dangerous = sum(1 for p in m.permissions if p.dangerous)
            vals = [total, android / total, custom / total, dangerous / total]
    elif kind == "api":
        vals = list(m.static_api_counts)
    elif kind == "all":
        vals = [v for k in ("basic", "permission", "api") for v in extract_static(app, k).values]
    else:
        raise FeatureError(f"not a static kind: {kind!r}")
    return FeatureVector(kind, tuple(float(v) for v in vals), app.app_id)


def extract_dynamic(trace: Trace) -> FeatureVector:
    """Per-category call counts; calls with an unknown category are ignored."""
    counts = [0] * N_CATEGORIES
    for tc in trace.calls:
        c = tc.call.category
        if c is not None:
            counts[c] += 1
    return FeatureVector("dynamic", tuple(float(c) for c in counts), trace.app_id)


def make_hybrid(static_all: FeatureVector, dynamic: FeatureVector) -> FeatureVector:
    if static_all.kind != "all" or dynamic.kind != "dynamic":
        raise FeatureError(f"hybrid needs (all, dynamic), got ({static_all.kind}, {dynamic.kind})")
    if static_all.app_id != dynamic.app_id:
        raise FeatureError(f"app mismatch: {static_all.app_id} vs {dynamic.app_id}")
    return FeatureVector("hybrid", static_all.values + dynamic.values, static_all.app_id)


def app_vector(app: SyntheticApp, kind: str, trace: Optional[Trace] = None) -> Optional[FeatureVector]:
    """Feature vector of one app, or None when a needed trace is missing or empty."""
    if kind in STATIC_KINDS:
        return extract_static(app, kind)
    if kind not in DYNAMIC_KINDS:
        raise FeatureError(f"unknown feature kind {kind!r}")
    if trace is None or len(trace.calls) == 0:
        return None
    dyn = extract_dynamic(trace)
    if kind == "dynamic":
        return dyn
    return make_hybrid(extract_static(app, "all"), dyn)


def build_matrix(
    apps: Sequence[SyntheticApp],
    traces: Optional[Mapping[str, Trace]],
    kind: str,
) -> FeatureMatrix:
    """One row per app with a usable representation, in input order.

    ``traces`` maps app id to trace. Dynamic and hybrid kinds omit apps whose
    trace is missing or empty.
    """
    if kind in DYNAMIC_KINDS and traces is None:
        raise FeatureError(f"{kind} features need traces")
    rows, labels = [], []
    for app in apps:
        vec = app_vector(app, kind, traces.get(app.app_id) if traces is not None else None)
        if vec is not None:
            rows.append(vec)
            labels.append(app.label)
    return FeatureMatrix(kind, tuple(rows), tuple(labels))


def format_number(v: float) -> str:
    """Shortest decimal that round-trips to ``v``."""
    if float(v).is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(float(v))


def matrix_to_csv(matrix: FeatureMatrix) -> str:
    n = KIND_LENGTH[matrix.kind]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["app_id", "label"] + [f"f{i}" for i in range(n)])
    for row, label in zip(matrix.rows, matrix.labels):
        w.writerow([row.app_id, label] + [format_number(v) for v in row.values])
    return buf.getvalue()


def matrix_from_csv(text: str, kind: str) -> FeatureMatrix:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    n = KIND_LENGTH[kind]
    if header != ["app_id", "label"] + [f"f{i}" for i in range(n)]:
        raise FeatureError("unexpected CSV header")
    rows, labels = [], []
    for rec in reader:
        rows.append(FeatureVector(kind, tuple(float(v) for v in rec[2:]), rec[0]))
        labels.append(rec[1])
    return FeatureMatrix(kind, tuple(rows), tuple(labels))
