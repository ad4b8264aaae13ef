"""Split / stimulate / train / score loop with re-stimulation of misclassified apps."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .corpus import MALICIOUS, SyntheticApp
from .features import DYNAMIC_KINDS, KINDS, STATIC_KINDS, FeatureVector, app_vector
from .learn import CLASSIFIER_NAMES, ENSEMBLE_NAME, evaluate, majority_vote, train_ensemble
from .seeds import derive_seed
from .stimulator import StimulationConfig, restimulate

MODES = ("static", "dynamic", "active")
F1_INITIAL = -1.0
# absorbs rounding in ``f1_prev - epsilon`` so a drop of exactly epsilon continues
_EPS_SLACK = 1e-12


class ExperimentError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "active"
    feature_kind: str = "dynamic"
    split_ratio: float = 2 / 3
    t_max: int = 10
    epsilon: float = 0.01
    runs: int = 25
    master_seed: int = 0
    stimulation: StimulationConfig = field(default_factory=StimulationConfig)

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ExperimentError(f"mode: unknown mode {self.mode!r}")
        if self.feature_kind not in KINDS:
            raise ExperimentError(f"feature_kind: unknown kind {self.feature_kind!r}")
        if self.mode == "static" and self.feature_kind not in STATIC_KINDS:
            raise ExperimentError(f"feature_kind: static mode cannot use {self.feature_kind!r} features")
        if self.mode != "static" and self.feature_kind not in DYNAMIC_KINDS:
            raise ExperimentError(f"feature_kind: {self.mode} mode needs dynamic or hybrid features")
        if not 0.0 < self.split_ratio < 1.0:
            raise ExperimentError("split_ratio: must be in (0,1)")
        if self.t_max < 1:
            raise ExperimentError("t_max: must be >= 1")
        if not 0.0 <= self.epsilon < 1.0:
            raise ExperimentError("epsilon: must be in [0,1)")
        if self.runs < 1:
            raise ExperimentError("runs: must be >= 1")

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "feature_kind": self.feature_kind,
            "split_ratio": self.split_ratio,
            "t_max": self.t_max,
            "epsilon": self.epsilon,
            "runs": self.runs,
            "master_seed": self.master_seed,
            "stimulation": {
                "max_steps": self.stimulation.max_steps,
                "intent_broadcast_probability": self.stimulation.intent_broadcast_probability,
            },
        }


@dataclass
class IterationRecord:
    t: int
    f1_train: float
    spec_train: float
    f1_test: float
    spec_test: float
    misclassified_train_ids: list[str]
    misclassified_test_ids: list[str]
    rows_train: int
    rows_test: int
    # classifier name -> {"f1_train", "spec_train", "f1_test", "spec_test"}, 12 members + Ensemble
    scores: dict[str, dict[str, float]] = field(default_factory=dict)


@dataclass
class RunResult:
    run_index: int
    seed: int
    train_ids: list[str]
    test_ids: list[str]
    iterations: list[IterationRecord]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    runs: list[RunResult]


def split_dataset(apps: Sequence[SyntheticApp], ratio: float, seed: int):
    """Random split into (train, test); each part keeps corpus order.

    ``|train| = round(ratio * n)`` with halves rounded up.
    """
    n = len(apps)
    if n < 3:
        raise ExperimentError("need at least 3 apps to split")
    labels = {a.label for a in apps}
    if len(labels) < 2:
        raise ExperimentError("dataset needs both classes")
    order = list(range(n))
    random.Random(seed).shuffle(order)
    n_train = int(math.floor(ratio * n + 0.5))
    train_idx = set(order[:n_train])
    train = [a for i, a in enumerate(apps) if i in train_idx]
    test = [a for i, a in enumerate(apps) if i not in train_idx]
    return train, test


def should_continue(f1_curr: float, f1_prev: float, t: int, t_max: int, epsilon: float) -> bool:
    """Keep iterating while under the cap and training F1 has not dropped by more than epsilon."""
    return t < t_max and f1_curr >= f1_prev - epsilon - _EPS_SLACK


def run_seed(master_seed: int, run_index: int) -> int:
    return derive_seed(master_seed, "run", run_index)


Observer = Callable[[int, dict[str, Optional[FeatureVector]]], None]


def _score(pred: np.ndarray, truth: np.ndarray) -> tuple[float, float]:
    if len(truth) == 0:
        return 0.0, 0.0
    m = evaluate(pred, truth)
    return m.f1, m.specificity


def run_once(
    corpus: Sequence[SyntheticApp],
    config: ExperimentConfig,
    run_index: int = 0,
    observer: Optional[Observer] = None,
) -> RunResult:
    """One run of the workflow.

    Static mode never stimulates. Dynamic mode stimulates every app once and
    stops after the first iteration. Active mode re-stimulates the apps the
    ensemble misclassified (training and test) and loops while
    ``should_continue`` holds on training F1. ``observer`` sees the feature
    rows used at every iteration.
    """
    config.validate()
    seed = run_seed(config.master_seed, run_index)
    train_apps, test_apps = split_dataset(corpus, config.split_ratio, derive_seed(seed, "split", 0))
    kind = config.feature_kind

    apps = list(train_apps) + list(test_apps)
    vectors: dict[str, Optional[FeatureVector]] = {}
    if config.mode == "static":
        for a in apps:
            vectors[a.app_id] = app_vector(a, kind)
    else:
        for a in apps:
            vectors[a.app_id] = app_vector(a, kind, restimulate(a, config.stimulation, seed, 1))

    t_max = config.t_max if config.mode == "active" else 1
    ens_seed = derive_seed(seed, "ensemble", 0)
    f1_prev = F1_INITIAL
    t = 1
    records: list[IterationRecord] = []
    by_id = {a.app_id: a for a in apps}
    while True:
        if observer is not None:
            observer(t, dict(vectors))
        rec = _iterate(t, train_apps, test_apps, vectors, ens_seed)
        records.append(rec)
        if not should_continue(rec.f1_train, f1_prev, t, t_max, config.epsilon):
            break
        for app_id in rec.misclassified_train_ids + rec.misclassified_test_ids:
            app = by_id[app_id]
            new = app_vector(app, kind, restimulate(app, config.stimulation, seed, t + 1))
            if new is not None:
                vectors[app_id] = new
        f1_prev = rec.f1_train
        t += 1
    return RunResult(
        run_index,
        seed,
        [a.app_id for a in train_apps],
        [a.app_id for a in test_apps],
        records,
    )


def _rows(apps, vectors):
    ids, X, y = [], [], []
    for a in apps:
        v = vectors.get(a.app_id)
        if v is not None:
            ids.append(a.app_id)
            X.append(v.values)
            y.append(1 if a.label == MALICIOUS else 0)
    return ids, np.array(X, dtype=np.float64), np.array(y, dtype=np.int64)


def _iterate(t, train_apps, test_apps, vectors, ens_seed) -> IterationRecord:
    tr_ids, Xr, yr = _rows(train_apps, vectors)
    te_ids, Xe, ye = _rows(test_apps, vectors)
    if len(tr_ids) == 0:
        raise ExperimentError("no usable training rows")
    model = train_ensemble(Xr, yr, ens_seed)
    vr = model.votes(Xr)
    ve = model.votes(Xe) if len(te_ids) else np.zeros((0, vr.shape[1]), dtype=np.int64)
    pr, pe = majority_vote(vr), majority_vote(ve)

    scores = {}
    for j, name in enumerate(CLASSIFIER_NAMES):
        if name == ENSEMBLE_NAME:
            a, b = pr, pe
        else:
            a, b = vr[:, j], ve[:, j]
        f1r, spr = _score(a, yr)
        f1e, spe = _score(b, ye)
        scores[name] = {"f1_train": f1r, "spec_train": spr, "f1_test": f1e, "spec_test": spe}
    ens = scores[ENSEMBLE_NAME]
    return IterationRecord(
        t=t,
        f1_train=ens["f1_train"],
        spec_train=ens["spec_train"],
        f1_test=ens["f1_test"],
        spec_test=ens["spec_test"],
        misclassified_train_ids=[i for i, p, y in zip(tr_ids, pr, yr) if p != y],
        misclassified_test_ids=[i for i, p, y in zip(te_ids, pe, ye) if p != y],
        rows_train=len(tr_ids),
        rows_test=len(te_ids),
        scores=scores,
    )


def run_active_experiment(
    corpus: Sequence[SyntheticApp],
    config: ExperimentConfig,
    run_index: int = 0,
    observer: Optional[Observer] = None,
) -> ExperimentResult:
    if config.mode != "active":
        raise ExperimentError("mode: run_active_experiment needs mode=active")
    return ExperimentResult(config, [run_once(corpus, config, run_index, observer)])


def run_preliminary_experiment(
    corpus: Sequence[SyntheticApp],
    config: ExperimentConfig,
    run_index: int = 0,
) -> ExperimentResult:
    if config.mode not in ("static", "dynamic"):
        raise ExperimentError("mode: preliminary experiments are static or dynamic")
    return ExperimentResult(config, [run_once(corpus, config, run_index)])


def run_campaign(
    corpus: Sequence[SyntheticApp],
    config: ExperimentConfig,
    on_run: Optional[Callable[[RunResult], None]] = None,
) -> ExperimentResult:
    """``config.runs`` independent runs, each with its own split."""
    config.validate()
    runs = []
    for r in range(config.runs):
        res = run_once(corpus, config, r)
        if on_run is not None:
            on_run(res)
        runs.append(res)
    return ExperimentResult(config, runs)
