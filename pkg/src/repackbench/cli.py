"""Command-line front end.

Exit codes: 0 ok, 2 usage/config, 3 output I/O, 4 input parse.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import re
import statistics
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .activeloop import ExperimentConfig, ExperimentError, RunResult, run_once, run_seed
from .corpus import INDEX_FILE, ConfigError, CorpusConfig, generate_corpus, load_corpus, save_corpus
from .features import KINDS
from .learn import CLASSIFIER_NAMES, ENSEMBLE_NAME
from .stimulator import StimulationConfig, Trace
from .traces import TRACE_SUFFIX, TraceParseError, parse_trace_log, trace_to_bytes

log = logging.getLogger("repackbench")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_OUTPUT = 3
EXIT_INPUT = 4

METRICS = ("f1_train", "spec_train", "f1_test", "spec_test")
SUMMARY_HEADER = ["classifier", "feature_kind", "iteration", "metric", "median"]
MANIFEST_FILE = "manifest.json"
DEFAULT_EPSILON = 0.01
DEFAULT_TMAX = 10


def _fail(code: int, msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _nonempty(path: Path) -> bool:
    if path.is_dir():
        return any(path.iterdir())
    return path.exists() and path.stat().st_size > 0


# --------------------------------------------------------------------------


def cmd_gen_corpus(args) -> int:
    try:
        text = Path(args.config).read_text(encoding="utf-8")
        config = CorpusConfig.from_kv(text)
    except ConfigError as exc:
        return _fail(EXIT_USAGE, f"invalid config: {exc}")
    except (OSError, UnicodeDecodeError) as exc:
        return _fail(EXIT_USAGE, f"cannot read config: {exc}")
    out = Path(args.out)
    if _nonempty(out) and not args.force:
        return _fail(EXIT_OUTPUT, f"{out} exists and is not empty (use --force)")
    apps = generate_corpus(config, args.seed)
    try:
        save_corpus(apps, out, force=args.force)
    except OSError as exc:
        return _fail(EXIT_OUTPUT, f"cannot write corpus: {exc}")
    n_mal = sum(a.is_malicious for a in apps)
    print(f"wrote {len(apps)} apps ({n_mal} malicious) to {out}")
    return EXIT_OK


# --------------------------------------------------------------------------


def result_lines(config: ExperimentConfig, run: RunResult) -> list[str]:
    """One JSON line per iteration per classifier (12 members, then Ensemble)."""
    lines = []
    for rec in run.iterations:
        for name in CLASSIFIER_NAMES:
            s = rec.scores[name]
            obj = {
                "mode": config.mode,
                "feature_kind": config.feature_kind,
                "run": run.run_index,
                "run_seed": run.seed,
                "iteration": rec.t,
                "classifier": name,
                "f1_train": s["f1_train"],
                "spec_train": s["spec_train"],
                "f1_test": s["f1_test"],
                "spec_test": s["spec_test"],
                "rows_train": rec.rows_train,
                "rows_test": rec.rows_test,
            }
            if name == ENSEMBLE_NAME:
                obj["misclassified_train"] = rec.misclassified_train_ids
                obj["misclassified_test"] = rec.misclassified_test_ids
            lines.append(json.dumps(obj, separators=(",", ":")))
    return lines


def write_manifest(results: Path, campaign: dict) -> Path:
    """Record a campaign in ``manifest.json`` next to the results file."""
    path = results.parent / MANIFEST_FILE
    manifest = None
    if path.exists():
        try:
            manifest = json.loads(path.read_text(encoding="utf-8"))
        except ValueError:
            log.warning("replacing unreadable %s", path)
    if not isinstance(manifest, dict) or manifest.get("results") != results.name:
        manifest = {"tool": "repackbench", "results": results.name, "campaigns": []}
    manifest["tool_version"] = __version__
    manifest.setdefault("campaigns", []).append(campaign)
    path.write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return path


def cmd_run(args) -> int:
    t_max = args.tmax if args.tmax is not None else DEFAULT_TMAX
    if args.mode != "active" and args.tmax is not None:
        log.warning("--tmax is ignored in %s mode (one iteration)", args.mode)
    epsilon = args.eps if args.eps is not None else DEFAULT_EPSILON
    try:
        config = ExperimentConfig(
            mode=args.mode,
            feature_kind=args.feature_kind,
            split_ratio=args.split_ratio,
            t_max=t_max,
            epsilon=epsilon,
            runs=args.runs,
            master_seed=args.seed,
            stimulation=StimulationConfig(args.max_steps, args.intent_prob),
        )
        config.validate()
    except (ExperimentError, ValueError) as exc:
        return _fail(EXIT_USAGE, str(exc))

    corpus_dir = Path(args.corpus)
    try:
        apps = load_corpus(corpus_dir)
        corpus_hash = hashlib.sha256((corpus_dir / INDEX_FILE).read_bytes()).hexdigest()
    except (OSError, ValueError, KeyError, TypeError) as exc:
        return _fail(EXIT_INPUT, f"cannot read corpus {corpus_dir}: {exc}")

    out = Path(args.out)
    started = datetime.now(timezone.utc).isoformat()
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        # append-only: earlier campaigns in the same file are kept
        with open(out, "a", encoding="utf-8", newline="\n") as fh:
            for r in range(config.runs):
                try:
                    run = run_once(apps, config, r)
                except ExperimentError as exc:
                    return _fail(EXIT_INPUT, f"run {r}: {exc}")
                for line in result_lines(config, run):
                    fh.write(line + "\n")
                fh.flush()
                log.info("run %d: %d iterations", r, len(run.iterations))
        campaign = {
            "config": config.to_dict(),
            "corpus": str(corpus_dir),
            "corpus_hash": corpus_hash,
            "run_seeds": [run_seed(config.master_seed, r) for r in range(config.runs)],
            "started": started,
            "finished": datetime.now(timezone.utc).isoformat(),
        }
        write_manifest(out, campaign)
    except OSError as exc:
        return _fail(EXIT_OUTPUT, f"cannot write results: {exc}")
    print(f"wrote {config.runs} runs to {out}")
    return EXIT_OK


# --------------------------------------------------------------------------


def median(values: Sequence[float]) -> float:
    """Median; an even count averages the two middle values."""
    return float(statistics.median(values))


def read_results(path: Path) -> list[dict]:
    """Parse a results file; raises ValueError on any malformed line."""
    records = []
    with open(path, "rb") as fh:
        for n, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except ValueError:
                raise ValueError(f"line {n}: invalid JSON") from None
            if not isinstance(obj, dict):
                raise ValueError(f"line {n}: not an object")
            for key in ("feature_kind", "classifier"):
                if not isinstance(obj.get(key), str):
                    raise ValueError(f"line {n}: bad {key!r}")
            for key in ("run", "iteration"):
                if not isinstance(obj.get(key), int) or isinstance(obj.get(key), bool):
                    raise ValueError(f"line {n}: bad {key!r}")
            for key in METRICS:
                v = obj.get(key)
                if not isinstance(v, (int, float)) or isinstance(v, bool) or not 0.0 <= v <= 1.0:
                    raise ValueError(f"line {n}: bad {key!r}")
            records.append(obj)
    return records


def summarize(records: list[dict], per_iteration: bool = False) -> list[list[str]]:
    """Median-over-runs rows, header excluded.

    By default each run contributes its final iteration (iteration column
    ``final``). With ``per_iteration`` every iteration index gets its own
    medians over the runs that reached it.
    """
    series: dict[tuple[str, str, int], dict[int, dict]] = {}
    for rec in records:
        key = (rec["classifier"], rec["feature_kind"], rec["run"])
        series.setdefault(key, {})[rec["iteration"]] = rec

    groups: dict[tuple[str, str, object, str], list[float]] = {}
    for (clf, kind, _run), by_iter in series.items():
        if per_iteration:
            chosen = sorted(by_iter.items())
        else:
            last = max(by_iter)
            chosen = [("final", by_iter[last])]
        for it, rec in chosen:
            for metric in METRICS:
                groups.setdefault((clf, kind, it, metric), []).append(float(rec[metric]))

    order = {name: i for i, name in enumerate(CLASSIFIER_NAMES)}

    def sort_key(k):
        clf, kind, it, metric = k
        return (order.get(clf, len(order)), clf, kind, 0 if it == "final" else it, METRICS.index(metric))

    return [
        [clf, kind, str(it), metric, repr(median(groups[(clf, kind, it, metric)]))]
        for (clf, kind, it, metric) in sorted(groups, key=sort_key)
    ]


def cmd_report(args) -> int:
    try:
        records = read_results(Path(args.input))
    except (OSError, ValueError) as exc:
        return _fail(EXIT_INPUT, f"cannot read results {args.input}: {exc}")
    rows = summarize(records, args.per_iteration)
    try:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SUMMARY_HEADER)
            w.writerows(rows)
    except OSError as exc:
        return _fail(EXIT_OUTPUT, f"cannot write summary: {exc}")
    print(f"wrote {len(rows)} summary rows to {args.out}")
    return EXIT_OK


# --------------------------------------------------------------------------

_UNSAFE = re.compile(r"[^A-Za-z0-9._-]")


def trace_file_name(trace: Trace) -> str:
    return f"{_UNSAFE.sub('_', trace.app_id)}.{trace.run_index}{TRACE_SUFFIX}"


def _default_app(path: Path) -> str:
    name = path.name
    for suffix in (TRACE_SUFFIX, ".jsonl", ".log", ".txt"):
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return path.stem


def cmd_ingest(args) -> int:
    logs = Path(args.logs)
    if not logs.is_dir():
        return _fail(EXIT_INPUT, f"{logs} is not a directory")
    merged: dict[tuple[str, int], list] = {}
    total_skipped = 0
    for path in sorted(p for p in logs.iterdir() if p.is_file()):
        try:
            with open(path, "rb") as fh:
                res = parse_trace_log(fh, strict=args.strict, app=_default_app(path))
        except TraceParseError as exc:
            return _fail(EXIT_INPUT, f"{path}: {exc}")
        except OSError as exc:
            return _fail(EXIT_INPUT, f"cannot read {path}: {exc}")
        total_skipped += res.skipped
        print(f"{path.name}: accepted {res.accepted}, skipped: {res.skipped}")
        for t in res.traces:
            merged.setdefault((t.app_id, t.run_index), []).extend(t.calls)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for (app_id, run), calls in sorted(merged.items()):
            calls = sorted(calls, key=lambda c: c.step)
            trace = Trace(app_id, run, tuple(calls))
            (out / trace_file_name(trace)).write_bytes(trace_to_bytes(trace))
    except OSError as exc:
        return _fail(EXIT_OUTPUT, f"cannot write traces: {exc}")
    print(f"traces: {len(merged)}, skipped: {total_skipped}")
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="repackbench", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-corpus", help="generate a synthetic corpus")
    g.add_argument("--config", required=True, help="key=value corpus config file")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--force", action="store_true", help="replace a non-empty output directory")
    g.set_defaults(func=cmd_gen_corpus)

    r = sub.add_parser("run", help="run seeded experiment repetitions")
    r.add_argument("--mode", choices=("static", "dynamic", "active"), required=True)
    r.add_argument("--corpus", required=True)
    r.add_argument("--feature-kind", choices=KINDS, required=True)
    r.add_argument("--runs", type=int, default=25)
    r.add_argument("--tmax", type=int, default=None, help=f"iteration cap (default {DEFAULT_TMAX})")
    r.add_argument("--eps", type=float, default=None, help=f"allowed training-F1 drop (default {DEFAULT_EPSILON})")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--split-ratio", type=float, default=2 / 3)
    r.add_argument("--max-steps", type=int, default=StimulationConfig.max_steps)
    r.add_argument("--intent-prob", type=float, default=StimulationConfig.intent_broadcast_probability)
    r.add_argument("--out", required=True, help="results file; new lines are appended")
    r.set_defaults(func=cmd_run)

    rep = sub.add_parser("report", help="median summary CSV from a results file")
    rep.add_argument("--in", dest="input", required=True)
    rep.add_argument("--out", required=True)
    rep.add_argument("--per-iteration", action="store_true")
    rep.set_defaults(func=cmd_report)

    i = sub.add_parser("ingest", help="convert droidmon-style logs to canonical traces")
    i.add_argument("--logs", required=True)
    i.add_argument("--out", required=True)
    i.add_argument("--strict", action="store_true")
    i.set_defaults(func=cmd_ingest)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
