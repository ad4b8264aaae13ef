import io
import json

import pytest
from hypothesis import given, settings, strategies as st

from conftest import CIPHER, SMS
from repackbench.categories import CATEGORIES, map_call_to_category
from repackbench.corpus import ApiCallId
from repackbench.stimulator import Trace, TraceCall
from repackbench.traces import TraceParseError, parse_trace_log, trace_to_bytes, write_trace

KEYS = ["app", "run", "step", "class", "method", "args", "result"]

monitored = st.sampled_from([(c.index, m) for c in CATEGORIES for m in c.methods]).map(
    lambda cm: ApiCallId.of(*cm)
)
unmonitored = st.tuples(
    st.from_regex(r"[a-z]{1,6}(\.[A-Za-z]{1,6}){1,3}", fullmatch=True),
    st.from_regex(r"[a-z][A-Za-z0-9]{0,8}", fullmatch=True),
).map(lambda t: ApiCallId(map_call_to_category(t[0], t[1]), f"{t[0]}.{t[1]}"))
text = st.text(st.characters(blacklist_categories=("Cs",)), max_size=8)


@st.composite
def traces(draw):
    n = draw(st.integers(0, 12))
    steps = sorted(draw(st.lists(st.integers(0, 500), min_size=n, max_size=n)))
    calls = tuple(
        TraceCall(s, draw(st.one_of(monitored, unmonitored)), tuple(draw(st.lists(text, max_size=3))),
                  draw(st.one_of(st.none(), text)))
        for s in steps
    )
    app = draw(st.text(st.characters(blacklist_categories=("Cs",)), min_size=1, max_size=10))
    return Trace(app, draw(st.integers(0, 50)), calls)


def three_calls():
    return Trace("a1", 2, (TraceCall(0, SMS), TraceCall(1, CIPHER, ("k",), "ok"), TraceCall(2, SMS)))


def test_line_per_call_and_key_order():
    raw = trace_to_bytes(three_calls())
    lines = raw.splitlines()
    assert len(lines) == 3
    assert list(json.loads(lines[1])) == KEYS
    assert json.loads(lines[1])["class"] == "javax.crypto.Cipher"


def test_empty_trace_writes_nothing():
    buf = io.BytesIO()
    write_trace(Trace("a", 0, ()), buf)
    assert buf.getvalue() == b""


@settings(max_examples=300, deadline=None)
@given(traces())
def test_round_trip(trace):
    res = parse_trace_log(trace_to_bytes(trace))
    if not trace.calls:
        assert res.traces == []
    else:
        assert res.traces == [trace]
    assert res.skipped == 0


def test_two_runs_grouped():
    a = Trace("app", 1, (TraceCall(0, SMS),))
    b = Trace("app", 2, (TraceCall(0, CIPHER), TraceCall(1, SMS)))
    res = parse_trace_log(trace_to_bytes(b) + trace_to_bytes(a))
    assert [(t.app_id, t.run_index, len(t)) for t in res.traces] == [("app", 1, 1), ("app", 2, 2)]


def test_tolerant_skips_junk():
    data = b"not-json\n" + trace_to_bytes(three_calls()) + b'{"class": 3}\n[1,2]\n'
    res = parse_trace_log(data)
    assert res.accepted == 3 and res.skipped == 3
    assert res.skipped_lines == [1, 5, 6]
    assert res.traces == [three_calls()]


def test_strict_names_line():
    data = trace_to_bytes(three_calls()) + b"\n" + b"garbage\n"
    with pytest.raises(TraceParseError) as exc:
        parse_trace_log(data, strict=True)
    assert exc.value.line_no == 5


def test_droidmon_minimal_line_uses_defaults():
    line = b'{"class": "android.telephony.TelephonyManager", "method": "getDeviceId"}\n'
    res = parse_trace_log(b"\n\n" + line, app="com.demo", run=4)
    (trace,) = res.traces
    assert (trace.app_id, trace.run_index) == ("com.demo", 4)
    tc = trace.calls[0]
    assert tc.step == 3
    assert tc.call.category == map_call_to_category("android.telephony.TelephonyManager")
    assert tc.call.method == "android.telephony.TelephonyManager.getDeviceId"


def test_missing_app_without_default_is_malformed():
    line = b'{"class": "java.lang.Runtime", "method": "exec"}\n'
    assert parse_trace_log(line).skipped == 1
    with pytest.raises(TraceParseError):
        parse_trace_log(line, strict=True)


junk = st.one_of(
    st.binary(max_size=40),
    st.sampled_from([b"{}", b"null", b'{"class":"","method":"x","app":"a"}', b'{"class":"a.B","app":"a"}',
                     b'{"class":"a.B","method":"m","app":"a","run":-1}',
                     b'{"class":"a.B","method":"m","app":"a","step":true}',
                     b'{"class":"a.B","method":"m","app":"a","args":[1]}',
                     b'{"class":"a.B","method":"m","app":"a","result":5}',
                     b'{"class":"a.B","method":"m","app":7}']),
)


@settings(max_examples=200, deadline=None)
@given(traces(), st.lists(junk, max_size=6))
def test_fuzzed_junk_never_accepted(trace, junk_lines):
    good = trace_to_bytes(trace).splitlines()
    # junk line that happens to be a valid record for this app would be legitimate; drop those
    clean = []
    for j in junk_lines:
        j = j.replace(b"\n", b" ").replace(b"\r", b" ")
        if parse_trace_log(j, app=None).accepted == 0:
            clean.append(j)
    data = b"\n".join(clean + good) + b"\n"
    res = parse_trace_log(data)
    assert res.accepted == len(good)
    assert res.skipped == sum(1 for j in clean if j.strip())
    assert res.traces == ([trace] if trace.calls else [])
