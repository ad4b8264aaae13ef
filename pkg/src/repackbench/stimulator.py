"""Random-walk stimulation of synthetic apps.

A session starts at the entry block and runs ``max_steps`` walk steps. Each
visited block appends its calls to the trace. Before every transition an
intent may be broadcast; the walk then picks uniformly among the enabled
out-edges of the current block, restarting at the entry block when none is
enabled.

The graft edge is special. Each arrival at the graft block evaluates the
trigger once, and a trigger that fires transfers control to the payload.
A Null trigger is an unconditional branch, so it always fires.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .corpus import INTENT_GUARDED, UNGUARDED, ApiCallId, SyntheticApp, validate_app
from .seeds import derive_seed

__all__ = [
    "StimulationConfig",
    "TraceCall",
    "Trace",
    "StimulationError",
    "stimulate",
    "restimulate",
    "path_divergence",
    "derive_seed",
    "call_placeholders",
]


class StimulationError(ValueError):
    pass


@dataclass(frozen=True)
class StimulationConfig:
    max_steps: int = 30
    intent_broadcast_probability: float = 0.2

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if not 0.0 <= self.intent_broadcast_probability <= 1.0:
            raise ValueError("intent_broadcast_probability must be in [0,1]")


@dataclass(frozen=True)
class TraceCall:
    step: int
    call: ApiCallId
    args: tuple[str, ...] = ()
    result: Optional[str] = None


@dataclass(frozen=True)
class Trace:
    app_id: str
    run_index: int
    calls: tuple[TraceCall, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.calls)

    def methods(self) -> list[str]:
        return [c.call.method for c in self.calls]


def call_placeholders(call: ApiCallId) -> tuple[tuple[str, ...], Optional[str]]:
    """Fixed placeholder args/result recorded for a call template."""
    name = call.method.rpartition(".")[2]
    return (f"<{name}:arg0>",), None


def _check(app: SyntheticApp) -> None:
    problems = validate_app(app)
    if problems:
        raise StimulationError(f"malformed app {app.app_id}: {problems[0]}")


def stimulate(
    app: SyntheticApp,
    config: StimulationConfig,
    session_seed: int,
    run_index: int = 0,
    *,
    check: bool = True,
) -> Trace:
    """Run one random-walk session and return its trace."""
    if check:
        _check(app)
    rng = random.Random(session_seed)
    cfg = app.cfg
    emits = {b.id: b.emits for b in cfg.blocks}
    succ = cfg.successors()
    intents = app.manifest.declared_intents

    payload = app.payload
    graft_src = payload.entry_edge_from if payload else None
    graft_dst = payload.blocks[0].id if payload else None
    trigger = payload.trigger if payload else None
    graft_arrivals = 0

    calls: list[TraceCall] = []

    def visit(block_id: int, step: int) -> None:
        for call in emits[block_id]:
            args, result = call_placeholders(call)
            calls.append(TraceCall(step, call, args, result))

    current = cfg.entry
    for step in range(config.max_steps):
        if step > 0:
            broadcast = None
            if intents and rng.random() < config.intent_broadcast_probability:
                broadcast = rng.choice(intents)
            nxt = None
            if current == graft_src:
                graft_arrivals += 1
                if _fires(trigger, rng, broadcast, graft_arrivals - 1):
                    nxt = graft_dst
            if nxt is None:
                enabled = []
                for e in succ[current]:
                    if e.src == graft_src and e.dst == graft_dst:
                        continue
                    if e.guard == UNGUARDED or (e.guard == INTENT_GUARDED and e.intent == broadcast):
                        enabled.append(e.dst)
                nxt = rng.choice(enabled) if enabled else cfg.entry
            current = nxt
        visit(current, step)
    return Trace(app.app_id, run_index, tuple(calls))


def _fires(trigger, rng: random.Random, broadcast: Optional[str], reentries: int) -> bool:
    v = trigger.variant
    if v == "Null":
        return True
    if v == "Probabilistic":
        return rng.random() < trigger.p
    if v == "Intent":
        return broadcast is not None and broadcast == trigger.name
    if v == "State":
        return reentries >= trigger.counter_threshold
    raise StimulationError(f"unknown trigger variant {v!r}")


def restimulate(
    app: SyntheticApp,
    config: StimulationConfig,
    master_seed: int,
    iteration: int,
    *,
    check: bool = True,
) -> Trace:
    """Session ``iteration`` (>= 1) of ``app``: a fresh walk seeded from the master seed."""
    if iteration < 1:
        raise StimulationError("iteration must be >= 1")
    seed = derive_seed(master_seed, app.app_id, iteration)
    return stimulate(app, config, seed, run_index=iteration, check=check)


def path_divergence(t1: Trace, t2: Trace) -> int:
    """Size of the symmetric multiset difference of the two traces' method names."""
    a = Counter(t1.methods())
    b = Counter(t2.methods())
    return sum(((a - b) + (b - a)).values())
