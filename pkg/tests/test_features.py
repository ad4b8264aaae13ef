import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import CIPHER, SMS, chain_app, manifest
from repackbench.categories import N_CATEGORIES, category_index
from repackbench.corpus import Permission, SyntheticApp
from repackbench.features import (
    KIND_LENGTH,
    FeatureError,
    FeatureVector,
    app_vector,
    build_matrix,
    extract_dynamic,
    extract_static,
    make_hybrid,
    matrix_from_csv,
    matrix_to_csv,
)
from repackbench.stimulator import StimulationConfig, Trace, TraceCall, restimulate


def test_kind_lengths():
    assert KIND_LENGTH == {"basic": 6, "permission": 4, "api": 27, "all": 37, "dynamic": 37, "hybrid": 74}


def test_basic_read_off():
    app = chain_app([[SMS]], min_sdk=9, max_sdk=23, n_activities=3, n_services=1, n_receivers=0, n_providers=2)
    assert extract_static(app, "basic").values == (9, 23, 3, 1, 0, 2)


def test_permission_ratios():
    perms = (
        [Permission(f"android.permission.D{i}", "android", True) for i in range(3)]
        + [Permission(f"android.permission.N{i}", "android", False) for i in range(3)]
        + [Permission(f"com.x.C{i}", "custom", False) for i in range(4)]
    )
    app = chain_app([[SMS]], permissions=tuple(perms))
    assert extract_static(app, "permission").values == pytest.approx((10, 0.6, 0.4, 0.3), abs=1e-15)
    assert extract_static(chain_app([[SMS]]), "permission").values == (0, 0, 0, 0)


def test_all_is_concatenation(small_corpus):
    for app in small_corpus[:5]:
        v = extract_static(app, "all").values
        assert len(v) == 37
        assert v == sum((extract_static(app, k).values for k in ("basic", "permission", "api")), ())


def test_dynamic_counts():
    t = Trace("a", 1, (TraceCall(0, SMS), TraceCall(1, CIPHER), TraceCall(2, SMS)))
    v = extract_dynamic(t).values
    assert v[category_index("android.telephony.SmsManager")] == 2
    assert v[category_index("javax.crypto.Cipher")] == 1
    assert sum(v) == 3
    assert extract_dynamic(Trace("a", 1, ())).values == (0.0,) * N_CATEGORIES


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 59), st.integers(1, 5))
def test_dynamic_sum_matches_recount(small_corpus, idx, it):
    trace = restimulate(small_corpus[idx], StimulationConfig(), 3, it)
    v = extract_dynamic(trace).values
    counts = [0] * N_CATEGORIES
    for tc in trace.calls:
        counts[category_index(tc.call.class_name)] += 1
    assert list(v) == counts


def test_hybrid():
    app = chain_app([[SMS]])
    t = Trace(app.app_id, 1, (TraceCall(0, SMS),))
    h = make_hybrid(extract_static(app, "all"), extract_dynamic(t))
    assert len(h.values) == 74
    assert h.values[:37] == extract_static(app, "all").values
    with pytest.raises(FeatureError):
        make_hybrid(extract_static(app, "all"), extract_dynamic(Trace("other", 1, ())))


def test_vector_length_checked():
    with pytest.raises(FeatureError):
        FeatureVector("basic", (1.0,), "a")


def test_build_matrix_omission(small_corpus):
    apps = small_corpus[:20]
    traces = {a.app_id: restimulate(a, StimulationConfig(), 1, 1) for a in apps}
    traces[apps[3].app_id] = Trace(apps[3].app_id, 1, ())
    del traces[apps[7].app_id]
    m = build_matrix(apps, traces, "dynamic")
    assert len(m) == 18
    assert apps[3].app_id not in m.app_ids and apps[7].app_id not in m.app_ids
    kept = [a for a in apps if a.app_id in m.app_ids]
    assert list(m.labels) == [a.label for a in kept]
    assert int(m.label_array().sum()) == sum(a.is_malicious for a in kept)
    assert len(build_matrix(apps, None, "basic")) == 20
    assert m.to_array().shape == (18, 37)


def test_csv_round_trip(small_corpus):
    m = build_matrix(small_corpus, None, "all")
    back = matrix_from_csv(matrix_to_csv(m), "all")
    assert back == m
    assert matrix_to_csv(m).splitlines()[0].startswith("app_id,label,f0,f1")


def test_app_vector_none_for_missing_trace():
    app = chain_app([[SMS]])
    assert app_vector(app, "dynamic", None) is None
    assert app_vector(app, "hybrid", Trace(app.app_id, 1, ())) is None
    assert np.asarray(app_vector(app, "basic").values).shape == (6,)
