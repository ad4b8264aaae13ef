import statistics

import pytest
from hypothesis import given, strategies as st

from repackbench.activeloop import (
    ExperimentConfig,
    ExperimentError,
    run_active_experiment,
    run_campaign,
    run_once,
    run_preliminary_experiment,
    should_continue,
    split_dataset,
)
from repackbench.corpus import CorpusConfig, generate_corpus


def test_split_sizes(small_corpus):
    train, test = split_dataset(small_corpus[:9], 2 / 3, 1)
    assert (len(train), len(test)) == (6, 3)
    # halves round up: 0.5 * 9 = 4.5 -> 5
    assert len(split_dataset(small_corpus[:9], 0.5, 1)[0]) == 5


@given(st.integers(3, 60), st.integers(0, 2**40), st.floats(0.05, 0.95))
def test_split_partition(small_corpus, n, seed, ratio):
    apps = small_corpus[:n]
    if len({a.label for a in apps}) < 2:
        return
    train, test = split_dataset(apps, ratio, seed)
    ids = [a.app_id for a in apps]
    assert not {a.app_id for a in train} & {a.app_id for a in test}
    assert sorted(a.app_id for a in train + test) == sorted(ids)
    assert [a.app_id for a in train] == [i for i in ids if i in {a.app_id for a in train}]
    assert split_dataset(apps, ratio, seed) == (train, test)


def test_should_continue():
    assert should_continue(0.5, -1.0, 1, 10, 0.01)
    assert not should_continue(0.70, 0.80, 2, 10, 0.01)
    assert should_continue(0.79, 0.80, 2, 10, 0.01)
    assert not should_continue(0.99, 0.5, 10, 10, 0.01)


def test_config_validation():
    with pytest.raises(ExperimentError):
        ExperimentConfig(mode="static", feature_kind="dynamic").validate()
    with pytest.raises(ExperimentError):
        ExperimentConfig(mode="active", feature_kind="basic").validate()
    with pytest.raises(ExperimentError):
        ExperimentConfig(t_max=0).validate()
    assert ExperimentConfig().epsilon == 0.01


def test_static_permission_run(small_corpus):
    cfg = ExperimentConfig(mode="static", feature_kind="permission", runs=1)
    dims = []
    res = run_once(small_corpus, cfg, 0, observer=lambda t, v: dims.extend(len(x.values) for x in v.values()))
    assert len(res.iterations) == 1
    assert set(dims) == {4}
    with pytest.raises(ExperimentError):
        run_preliminary_experiment(small_corpus, ExperimentConfig(mode="active"))


def test_dynamic_mode_equals_first_active_iteration(small_corpus):
    dyn = run_preliminary_experiment(small_corpus, ExperimentConfig(mode="dynamic", master_seed=3)).runs[0]
    act = run_active_experiment(small_corpus, ExperimentConfig(mode="active", master_seed=3)).runs[0]
    assert len(dyn.iterations) == 1
    assert dyn.iterations[0] == act.iterations[0]
    assert dyn.train_ids == act.train_ids


def test_active_run_bounds_and_determinism(small_corpus):
    cfg = ExperimentConfig(mode="active", feature_kind="hybrid", master_seed=5)
    a = run_active_experiment(small_corpus, cfg, 1)
    b = run_active_experiment(small_corpus, cfg, 1)
    assert 1 <= len(a.runs[0].iterations) <= 10
    assert a == b
    rec = a.runs[0].iterations[0]
    assert set(rec.scores) == {"KNN10", "KNN25", "KNN50", "KNN100", "KNN250", "KNN500", "Trees10",
                               "Trees25", "Trees50", "Trees75", "Trees100", "SVM", "Ensemble"}


def test_only_misclassified_rows_change(small_corpus):
    cfg = ExperimentConfig(mode="active", master_seed=2)
    seen = []
    res = run_once(small_corpus, cfg, 0, observer=lambda t, v: seen.append(v))
    its = res.iterations
    assert len(seen) == len(its)
    for prev, cur, rec in zip(seen, seen[1:], its):
        changed = {k for k in cur if cur[k] != prev[k]}
        assert changed <= set(rec.misclassified_train_ids) | set(rec.misclassified_test_ids)


def test_tmax_one_stops_immediately(small_corpus):
    res = run_once(small_corpus, ExperimentConfig(mode="active", t_max=1), 0)
    assert len(res.iterations) == 1


def test_probabilistic_corpus_gain():
    mix = (("Null", 0.0), ("Probabilistic", 1.0), ("Intent", 0.0), ("State", 0.0))
    corpus = generate_corpus(CorpusConfig(trigger_mix=mix), 21)
    res = run_campaign(corpus, ExperimentConfig(mode="active", runs=11, master_seed=4))
    first = statistics.median(r.iterations[0].f1_test for r in res.runs)
    final = statistics.median(r.iterations[-1].f1_test for r in res.runs)
    print(f"probabilistic corpus: iteration-1 F1 {first:.3f}, final F1 {final:.3f}")
    assert final >= first + 0.05
