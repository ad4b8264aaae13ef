"""Trace log I/O.

One JSON object per line, UTF-8, LF endings, keys in this order::

    {"app": str, "run": int, "step": int, "class": str, "method": str,
     "args": [str, ...], "result": str | null}

Tolerant parsing skips anything that is not a well-formed record (logcat
prefixes, noise, truncated JSON). Only ``class`` and ``method`` are mandatory
on an accepted line; ``app`` and ``run`` fall back to file-level defaults and
``step`` to the 1-based line number. Strict parsing raises on the first
malformed line instead.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Optional, Union

from .categories import map_call_to_category
from .corpus import ApiCallId
from .stimulator import Trace, TraceCall

TRACE_SUFFIX = ".trace.jsonl"


class TraceParseError(ValueError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


@dataclass
class ParseResult:
    traces: list[Trace]
    accepted: int = 0
    skipped: int = 0
    skipped_lines: list[int] = field(default_factory=list)


def encode_call(app_id: str, run: int, tc: TraceCall) -> bytes:
    cls, _, meth = tc.call.method.rpartition(".")
    record = {
        "app": app_id,
        "run": run,
        "step": tc.step,
        "class": cls,
        "method": meth,
        "args": list(tc.args),
        "result": tc.result,
    }
    return json.dumps(record, ensure_ascii=False, separators=(",", ":")).encode("utf-8") + b"\n"


def write_trace(trace: Trace, sink: BinaryIO) -> None:
    for tc in trace.calls:
        sink.write(encode_call(trace.app_id, trace.run_index, tc))


def trace_to_bytes(trace: Trace) -> bytes:
    buf = io.BytesIO()
    write_trace(trace, buf)
    return buf.getvalue()


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _record(obj, line_no: int, default_app: Optional[str], default_run: int):
    """Validate one decoded line. Returns ((app, run), TraceCall) or a reason string."""
    if not isinstance(obj, dict):
        return "not a JSON object"
    cls = obj.get("class")
    meth = obj.get("method")
    if not isinstance(cls, str) or not cls:
        return "missing or empty 'class'"
    if not isinstance(meth, str) or not meth:
        return "missing or empty 'method'"
    app = obj.get("app", default_app)
    if app is None:
        return "missing 'app' and no file-level default"
    if not isinstance(app, str) or not app:
        return "bad 'app'"
    run = obj.get("run", default_run)
    if not _is_int(run) or run < 0:
        return "bad 'run'"
    step = obj.get("step", line_no)
    if not _is_int(step) or step < 0:
        return "bad 'step'"
    args = obj.get("args", [])
    if not isinstance(args, list) or not all(isinstance(a, str) for a in args):
        return "bad 'args'"
    result = obj.get("result")
    if result is not None and not isinstance(result, str):
        return "bad 'result'"
    call = ApiCallId(map_call_to_category(cls, meth), f"{cls}.{meth}")
    return (app, run), TraceCall(step, call, tuple(args), result)


def parse_trace_log(
    source: Union[BinaryIO, bytes, Iterable[bytes]],
    *,
    strict: bool = False,
    app: Optional[str] = None,
    run: int = 0,
) -> ParseResult:
    """Parse a trace log into traces grouped by (app, run).

    Traces come back sorted by (app, run); calls within one trace are ordered
    by step, then by input order.
    """
    if isinstance(source, (bytes, bytearray)):
        lines: Iterable[bytes] = bytes(source).split(b"\n")
    else:
        lines = source
    groups: dict[tuple[str, int], list[tuple[int, int, TraceCall]]] = {}
    out = ParseResult([])
    for line_no, raw in enumerate(lines, 1):
        raw = raw.rstrip(b"\n")
        if raw.endswith(b"\r"):
            raw = raw[:-1]
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, ValueError) as exc:
            rec = f"invalid JSON ({type(exc).__name__})"
        else:
            rec = _record(obj, line_no, app, run)
        if isinstance(rec, str):
            if strict:
                raise TraceParseError(line_no, rec)
            out.skipped += 1
            out.skipped_lines.append(line_no)
            continue
        key, tc = rec
        groups.setdefault(key, []).append((tc.step, line_no, tc))
        out.accepted += 1
    for (app_id, run_index) in sorted(groups):
        items = sorted(groups[(app_id, run_index)], key=lambda t: (t[0], t[1]))
        out.traces.append(Trace(app_id, run_index, tuple(tc for _, _, tc in items)))
    return out
