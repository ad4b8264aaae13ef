"""Synthetic apps: manifest metadata plus a control-flow graph of call-emitting blocks.

A repackaged (malicious) app is a benign host CFG with a payload grafted onto one
host block. The graft edge is guarded by the payload's trigger; payload blocks
are reachable through that edge only.
"""

from __future__ import annotations

import json
import math
import random
import shutil
from collections import deque
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .categories import (
    CATEGORIES,
    CATEGORY_NAMES,
    N_CATEGORIES,
    STATIC_SUBSET,
    category_index,
    map_call_to_category,
    split_method,
)
from .seeds import derive_seed

MALICIOUS = "malicious"
BENIGN = "benign"
LABELS = (MALICIOUS, BENIGN)

UNGUARDED = "unguarded"
INTENT_GUARDED = "intent"
TRIGGER_GUARDED = "trigger"
GUARDS = (UNGUARDED, INTENT_GUARDED, TRIGGER_GUARDED)

TRIGGER_VARIANTS = ("Null", "Probabilistic", "Intent", "State")

INDEX_FILE = "index.json"
GROUND_TRUTH_FILE = "ground_truth.json"


class CorpusError(ValueError):
    """Raised for structurally invalid apps or payloads."""


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


# --------------------------------------------------------------------------
# Domain types


@dataclass(frozen=True)
class ApiCallId:
    """One monitored call: its category index and ``package.class.method``.

    ``category`` is None only for unmonitored calls ingested from external logs.
    """

    category: Optional[int]
    method: str

    @classmethod
    def of(cls, category: int, method: str) -> "ApiCallId":
        return cls(category, f"{CATEGORY_NAMES[category]}.{method}")

    @property
    def class_name(self) -> str:
        return split_method(self.method)[0]

    @property
    def method_name(self) -> str:
        return split_method(self.method)[1]

    def to_dict(self) -> dict:
        return {"category": self.category, "method": self.method}

    @classmethod
    def from_dict(cls, d: dict) -> "ApiCallId":
        return cls(d["category"], d["method"])


@dataclass(frozen=True)
class Block:
    id: int
    emits: tuple[ApiCallId, ...] = ()
    is_payload: bool = False

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "emits": [c.to_dict() for c in self.emits],
            "is_payload": self.is_payload,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Block":
        return cls(int(d["id"]), tuple(ApiCallId.from_dict(c) for c in d["emits"]), bool(d["is_payload"]))


@dataclass(frozen=True)
class Trigger:
    variant: str
    p: Optional[float] = None
    name: Optional[str] = None
    counter_threshold: Optional[int] = None

    @classmethod
    def null(cls) -> "Trigger":
        return cls("Null")

    @classmethod
    def probabilistic(cls, p: float) -> "Trigger":
        return cls("Probabilistic", p=float(p))

    @classmethod
    def intent(cls, name: str) -> "Trigger":
        return cls("Intent", name=name)

    @classmethod
    def state(cls, counter_threshold: int) -> "Trigger":
        return cls("State", counter_threshold=int(counter_threshold))

    def problems(self) -> list[str]:
        if self.variant not in TRIGGER_VARIANTS:
            return [f"unknown variant {self.variant!r}"]
        if self.variant == "Probabilistic":
            if self.p is None or not (0.0 <= self.p <= 1.0):
                return [f"probability {self.p!r} outside [0,1]"]
        elif self.variant == "Intent":
            if not self.name:
                return ["empty intent name"]
        elif self.variant == "State":
            if self.counter_threshold is None or self.counter_threshold < 0:
                return [f"negative counter threshold {self.counter_threshold!r}"]
        return []

    def to_dict(self) -> dict:
        d: dict = {"variant": self.variant}
        if self.variant == "Probabilistic":
            d["p"] = self.p
        elif self.variant == "Intent":
            d["name"] = self.name
        elif self.variant == "State":
            d["counter_threshold"] = self.counter_threshold
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Trigger":
        return cls(d["variant"], d.get("p"), d.get("name"), d.get("counter_threshold"))


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    guard: str = UNGUARDED
    intent: Optional[str] = None

    def to_dict(self) -> dict:
        return {"src": self.src, "dst": self.dst, "guard": self.guard, "intent": self.intent}

    @classmethod
    def from_dict(cls, d: dict) -> "Edge":
        return cls(int(d["src"]), int(d["dst"]), d["guard"], d.get("intent"))


@dataclass(frozen=True)
class CFG:
    entry: int
    blocks: tuple[Block, ...]
    edges: tuple[Edge, ...]

    def block_ids(self) -> list[int]:
        return [b.id for b in self.blocks]

    def block(self, block_id: int) -> Block:
        for b in self.blocks:
            if b.id == block_id:
                return b
        raise KeyError(block_id)

    def successors(self) -> dict[int, list[Edge]]:
        out: dict[int, list[Edge]] = {b.id: [] for b in self.blocks}
        for e in self.edges:
            out.setdefault(e.src, []).append(e)
        return out

    def to_dict(self) -> dict:
        return {
            "entry": self.entry,
            "blocks": [b.to_dict() for b in self.blocks],
            "edges": [e.to_dict() for e in self.edges],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CFG":
        return cls(
            int(d["entry"]),
            tuple(Block.from_dict(b) for b in d["blocks"]),
            tuple(Edge.from_dict(e) for e in d["edges"]),
        )


@dataclass(frozen=True)
class PayloadSpec:
    """Payload blocks (chained in list order) grafted after ``entry_edge_from``."""

    blocks: tuple[Block, ...]
    entry_edge_from: int
    trigger: Trigger

    def to_dict(self) -> dict:
        return {
            "blocks": [b.to_dict() for b in self.blocks],
            "entry_edge_from": self.entry_edge_from,
            "trigger": self.trigger.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PayloadSpec":
        return cls(
            tuple(Block.from_dict(b) for b in d["blocks"]),
            int(d["entry_edge_from"]),
            Trigger.from_dict(d["trigger"]),
        )


@dataclass(frozen=True)
class Permission:
    name: str
    origin: str  # "android" | "custom"
    dangerous: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "origin": self.origin, "dangerous": self.dangerous}

    @classmethod
    def from_dict(cls, d: dict) -> "Permission":
        return cls(d["name"], d["origin"], bool(d["dangerous"]))


@dataclass(frozen=True)
class Manifest:
    min_sdk: int
    max_sdk: int
    n_activities: int
    n_services: int
    n_receivers: int
    n_providers: int
    permissions: tuple[Permission, ...] = ()
    declared_intents: tuple[str, ...] = ()
    static_api_counts: tuple[int, ...] = (0,) * STATIC_SUBSET

    def problems(self) -> list[str]:
        out = []
        if self.min_sdk > self.max_sdk:
            out.append(f"min_sdk {self.min_sdk} > max_sdk {self.max_sdk}")
        for name in ("n_activities", "n_services", "n_receivers", "n_providers"):
            if getattr(self, name) < 0:
                out.append(f"negative {name}")
        for perm in self.permissions:
            if perm.origin not in ("android", "custom"):
                out.append(f"permission {perm.name}: bad origin {perm.origin!r}")
            if perm.dangerous and perm.origin != "android":
                out.append(f"permission {perm.name}: dangerous but not an android permission")
        if len(self.static_api_counts) != STATIC_SUBSET:
            out.append(f"static_api_counts has {len(self.static_api_counts)} entries, expected {STATIC_SUBSET}")
        elif any(c < 0 for c in self.static_api_counts):
            out.append("negative static api count")
        return out

    def to_dict(self) -> dict:
        return {
            "min_sdk": self.min_sdk,
            "max_sdk": self.max_sdk,
            "n_activities": self.n_activities,
            "n_services": self.n_services,
            "n_receivers": self.n_receivers,
            "n_providers": self.n_providers,
            "permissions": [p.to_dict() for p in self.permissions],
            "declared_intents": list(self.declared_intents),
            "static_api_counts": list(self.static_api_counts),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Manifest":
        return cls(
            int(d["min_sdk"]),
            int(d["max_sdk"]),
            int(d["n_activities"]),
            int(d["n_services"]),
            int(d["n_receivers"]),
            int(d["n_providers"]),
            tuple(Permission.from_dict(p) for p in d["permissions"]),
            tuple(d["declared_intents"]),
            tuple(int(c) for c in d["static_api_counts"]),
        )


@dataclass(frozen=True)
class SyntheticApp:
    app_id: str
    manifest: Manifest
    cfg: CFG
    label: str
    payload: Optional[PayloadSpec] = None

    @property
    def is_malicious(self) -> bool:
        return self.label == MALICIOUS

    def payload_block_ids(self) -> list[int]:
        return [b.id for b in self.payload.blocks] if self.payload else []

    def to_dict(self) -> dict:
        return {
            "app_id": self.app_id,
            "manifest": self.manifest.to_dict(),
            "cfg": self.cfg.to_dict(),
            "label": self.label,
            "payload": self.payload.to_dict() if self.payload else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticApp":
        return cls(
            d["app_id"],
            Manifest.from_dict(d["manifest"]),
            CFG.from_dict(d["cfg"]),
            d["label"],
            PayloadSpec.from_dict(d["payload"]) if d.get("payload") else None,
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, ensure_ascii=False) + "\n"


# --------------------------------------------------------------------------
# Configuration

BENIGN_PROFILE = (
    "android.app.Activity",
    "android.app.ActivityManager",
    "android.app.ActivityThread",
    "android.app.ApplicationPackageManager",
    "android.app.ContextImpl",
    "android.app.NotificationManager",
    "android.app.SharedPreferencesImpl$EditorImpl",
    "android.content.BroadcastReceiver",
    "android.content.ContentResolver",
    "android.content.ContentValues",
    "android.location.Location",
    "android.net.ConnectivityManager",
    "android.system.PathClassLoader",
    "java.io.FileInputStream",
    "java.io.FileOutputStream",
    "java.net.URL",
    "libcore.io.IoBridge",
    "org.apache.http.impl.client.AbstractHttpClient",
)

PAYLOAD_PROFILE = (
    "android.accounts.AccountManager",
    "android.media.AudioRecord",
    "android.net.wifi.WifiInfo",
    "android.os.SystemProperties",
    "android.telephony.SmsManager",
    "android.telephony.TelephonyManager",
    "android.util.Base64",
    "android.system.DexClassLoader",
    "java.lang.Runtime",
    "java.lang.reflect.Method",
    "javax.crypto.Cipher",
    "javax.crypto.spec.SecretKeySpec",
)


@dataclass(frozen=True)
class CorpusConfig:
    """Knobs for ``generate_corpus``.

    ``payload_ratio`` is payload blocks per host block (default 1:5).
    ``benign_sensitive_rate`` is the share of benign call sites drawn from the
    payload profile, so sensitive calls alone do not give the label away.
    """

    n_benign: int = 100
    n_malicious: int = 100
    min_blocks: int = 8
    max_blocks: int = 16
    payload_ratio: float = 0.2
    trigger_mix: tuple[tuple[str, float], ...] = (
        ("Null", 0.25),
        ("Probabilistic", 0.25),
        ("Intent", 0.25),
        ("State", 0.25),
    )
    probabilistic_p: float = 0.3
    state_threshold_max: int = 3
    payload_categories: tuple[str, ...] = PAYLOAD_PROFILE
    benign_categories: tuple[str, ...] = BENIGN_PROFILE
    benign_sensitive_rate: float = 0.05
    empty_block_rate: float = 0.2
    intent_edge_rate: float = 0.1
    paired: bool = True

    def validate(self) -> None:
        if self.n_benign <= 0:
            raise ConfigError("n_benign", "must be > 0")
        if self.n_malicious <= 0:
            raise ConfigError("n_malicious", "must be > 0")
        if self.min_blocks < 1:
            raise ConfigError("min_blocks", "must be >= 1")
        if self.max_blocks < self.min_blocks:
            raise ConfigError("max_blocks", "must be >= min_blocks")
        if not self.payload_ratio > 0:
            raise ConfigError("payload_ratio", "must be > 0")
        names = [n for n, _ in self.trigger_mix]
        for n in names:
            if n not in TRIGGER_VARIANTS:
                raise ConfigError("trigger_mix", f"unknown trigger variant {n!r}")
        if any(w < 0 for _, w in self.trigger_mix):
            raise ConfigError("trigger_mix", "negative proportion")
        total = sum(w for _, w in self.trigger_mix)
        if abs(total - 1.0) > 1e-9:
            raise ConfigError("trigger_mix", f"proportions sum to {total!r}, expected 1")
        if not 0.0 <= self.probabilistic_p <= 1.0:
            raise ConfigError("probabilistic_p", "must be in [0,1]")
        if self.state_threshold_max < 0:
            raise ConfigError("state_threshold_max", "must be >= 0")
        for fname in ("payload_categories", "benign_categories"):
            cats = getattr(self, fname)
            if not cats:
                raise ConfigError(fname, "must not be empty")
            for c in cats:
                if c not in CATEGORY_NAMES:
                    raise ConfigError(fname, f"unknown category {c!r}")
        for fname in ("benign_sensitive_rate", "empty_block_rate", "intent_edge_rate"):
            if not 0.0 <= getattr(self, fname) <= 1.0:
                raise ConfigError(fname, "must be in [0,1]")

    @classmethod
    def from_kv(cls, text: str) -> "CorpusConfig":
        """Parse flat ``key=value`` lines; ``#`` starts a comment.

        Trigger proportions use keys ``trigger_null``, ``trigger_probabilistic``,
        ``trigger_intent``, ``trigger_state``; category lists are comma separated.
        """
        base = cls()
        mix = dict(base.trigger_mix)
        kw: dict = {}
        ints = {"n_benign", "n_malicious", "min_blocks", "max_blocks", "state_threshold_max"}
        floats = {"payload_ratio", "probabilistic_p", "benign_sensitive_rate", "empty_block_rate", "intent_edge_rate"}
        lists = {"payload_categories", "benign_categories"}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep:
                raise ConfigError(key or f"line {lineno}", "expected key=value")
            try:
                if key in ints:
                    kw[key] = int(value)
                elif key in floats:
                    kw[key] = float(value)
                elif key in lists:
                    kw[key] = tuple(v.strip() for v in value.split(",") if v.strip())
                elif key == "paired":
                    if value.lower() not in ("true", "false", "1", "0"):
                        raise ValueError(value)
                    kw[key] = value.lower() in ("true", "1")
                elif key.startswith("trigger_") and key[8:].capitalize() in mix:
                    mix[key[8:].capitalize()] = float(value)
                else:
                    raise ConfigError(key, "unknown key")
            except ValueError as exc:
                if isinstance(exc, ConfigError):
                    raise
                raise ConfigError(key, f"bad value {value!r}") from None
        kw["trigger_mix"] = tuple((n, mix[n]) for n in TRIGGER_VARIANTS)
        cfg = cls(**kw)
        cfg.validate()
        return cfg


# --------------------------------------------------------------------------
# Validation


def validate_app(app: SyntheticApp) -> list[str]:
    """Return every invariant violation of ``app``; empty iff well-formed."""
    report: list[str] = []
    cfg = app.cfg
    ids = cfg.block_ids()
    id_set = set(ids)
    if len(id_set) != len(ids):
        seen: set[int] = set()
        dups = sorted({i for i in ids if i in seen or seen.add(i)})
        report.append(f"duplicate block id: {dups}")
    if cfg.entry not in id_set:
        report.append(f"missing entry block: {cfg.entry}")
    for e in cfg.edges:
        if e.src not in id_set or e.dst not in id_set:
            report.append(f"dangling edge: {e.src}->{e.dst}")
        if e.guard not in GUARDS:
            report.append(f"bad edge guard: {e.src}->{e.dst} {e.guard!r}")
        elif e.guard == INTENT_GUARDED and not e.intent:
            report.append(f"intent-guarded edge without intent: {e.src}->{e.dst}")

    for b in cfg.blocks:
        for call in b.emits:
            if call.category is None or not 0 <= call.category < N_CATEGORIES:
                report.append(f"bad call category: block {b.id} {call.method}")
                continue
            try:
                cls_name, _ = split_method(call.method)
            except ValueError:
                report.append(f"bad call method: block {b.id} {call.method!r}")
                continue
            if map_call_to_category(cls_name) != call.category:
                report.append(f"inconsistent call category: block {b.id} {call.method}")

    if cfg.entry in id_set:
        reach = _reachable(cfg)
        for b in cfg.blocks:
            if b.id not in reach:
                report.append(f"unreachable block: {b.id}")

    if (app.label == MALICIOUS) != (app.payload is not None) or app.label not in LABELS:
        report.append("label/payload mismatch")

    flagged = {b.id for b in cfg.blocks if b.is_payload}
    if app.payload is None:
        if flagged:
            report.append(f"payload blocks without payload: {sorted(flagged)}")
        for e in cfg.edges:
            if e.guard == TRIGGER_GUARDED:
                report.append(f"trigger-guarded edge without payload: {e.src}->{e.dst}")
    else:
        report.extend(_payload_problems(app, flagged))

    report.extend(f"manifest: {p}" for p in app.manifest.problems())
    for e in cfg.edges:
        if e.guard == INTENT_GUARDED and e.intent and e.intent not in app.manifest.declared_intents:
            report.append(f"undeclared intent on edge: {e.src}->{e.dst} {e.intent}")
    return report


def _payload_problems(app: SyntheticApp, flagged: set[int]) -> list[str]:
    out = []
    payload = app.payload
    assert payload is not None
    pids = [b.id for b in payload.blocks]
    if not pids:
        out.append("empty payload")
        return out
    out.extend(f"bad trigger: {p}" for p in payload.trigger.problems())
    if payload.trigger.variant == "Intent" and payload.trigger.name and (
        payload.trigger.name not in app.manifest.declared_intents
    ):
        out.append(f"bad trigger: intent {payload.trigger.name} not declared")
    if set(pids) != flagged:
        out.append("payload block flags disagree with payload spec")
    for b in payload.blocks:
        if not b.is_payload:
            out.append(f"payload block {b.id} not flagged is_payload")
        try:
            if app.cfg.block(b.id) != b:
                out.append(f"payload block {b.id} differs from cfg block")
        except KeyError:
            out.append(f"payload block {b.id} missing from cfg")
    pset = set(pids)
    host_ids = {b.id for b in app.cfg.blocks} - pset
    if payload.entry_edge_from not in host_ids:
        out.append(f"graft source {payload.entry_edge_from} not a host block")
    into = [e for e in app.cfg.edges if e.dst in pset and e.src not in pset]
    expected_guard = UNGUARDED if payload.trigger.variant == "Null" else TRIGGER_GUARDED
    if len(into) != 1 or into[0].src != payload.entry_edge_from or into[0].dst != pids[0]:
        out.append("payload reachable other than through the graft edge")
    elif into[0].guard != expected_guard:
        out.append(f"graft edge guard {into[0].guard!r}, expected {expected_guard!r}")
    for e in app.cfg.edges:
        if e.guard == TRIGGER_GUARDED and not (e.src == payload.entry_edge_from and e.dst == pids[0]):
            out.append(f"stray trigger-guarded edge: {e.src}->{e.dst}")
    return out


def _reachable(cfg: CFG) -> set[int]:
    succ = cfg.successors()
    seen = {cfg.entry}
    todo = deque([cfg.entry])
    while todo:
        cur = todo.popleft()
        for e in succ.get(cur, ()):
            if e.dst not in seen:
                seen.add(e.dst)
                todo.append(e.dst)
    return seen


# --------------------------------------------------------------------------
# Grafting


def inject_payload(base: SyntheticApp, payload: PayloadSpec, seed: int = 0) -> SyntheticApp:
    """Graft ``payload`` onto a benign ``base``.

    Payload blocks are chained in list order. The graft edge runs from
    ``payload.entry_edge_from`` to the first payload block and is unguarded for
    a Null trigger, trigger-guarded otherwise. The last payload block falls
    through to the graft source's host successors, so the host keeps running
    after the payload. An Intent trigger's action is added to the declared
    intents if missing. ``seed`` is unused because grafting is fully
    determined by its inputs; it is kept for call-site symmetry with the
    generator.
    """
    del seed
    if base.label != BENIGN or base.payload is not None:
        raise CorpusError("base app must be benign")
    if not payload.blocks:
        raise CorpusError("payload has no blocks")
    base_ids = set(base.cfg.block_ids())
    if payload.entry_edge_from not in base_ids:
        raise CorpusError(f"graft source block {payload.entry_edge_from} not in base app")
    pids = [b.id for b in payload.blocks]
    clash = sorted(base_ids.intersection(pids))
    if clash or len(set(pids)) != len(pids):
        raise CorpusError(f"payload block id collision: {clash or pids}")
    problems = payload.trigger.problems()
    if problems:
        raise CorpusError(f"bad trigger: {problems[0]}")

    blocks = tuple(replace(b, is_payload=True) for b in payload.blocks)
    payload = replace(payload, blocks=blocks)
    guard = UNGUARDED if payload.trigger.variant == "Null" else TRIGGER_GUARDED
    new_edges = [Edge(payload.entry_edge_from, pids[0], guard)]
    new_edges += [Edge(a, b) for a, b in zip(pids, pids[1:])]
    continuation = sorted(
        {e.dst for e in base.cfg.edges if e.src == payload.entry_edge_from and e.guard == UNGUARDED}
    )
    new_edges += [Edge(pids[-1], dst) for dst in continuation]

    manifest = base.manifest
    if payload.trigger.variant == "Intent" and payload.trigger.name not in manifest.declared_intents:
        manifest = replace(
            manifest,
            declared_intents=manifest.declared_intents + (payload.trigger.name,),
        )
    cfg = CFG(base.cfg.entry, base.cfg.blocks + blocks, base.cfg.edges + tuple(new_edges))
    return SyntheticApp(base.app_id, manifest, cfg, MALICIOUS, payload)


def strip_payload(app: SyntheticApp) -> SyntheticApp:
    """Remove payload blocks and every edge touching them (inverse of grafting on the CFG)."""
    if app.payload is None:
        return app
    pset = set(app.payload_block_ids())
    blocks = tuple(b for b in app.cfg.blocks if b.id not in pset)
    edges = tuple(e for e in app.cfg.edges if e.src not in pset and e.dst not in pset)
    return SyntheticApp(app.app_id, app.manifest, CFG(app.cfg.entry, blocks, edges), BENIGN, None)


# --------------------------------------------------------------------------
# Generation

ANDROID_PERMISSIONS = (
    ("android.permission.INTERNET", False),
    ("android.permission.ACCESS_NETWORK_STATE", False),
    ("android.permission.ACCESS_WIFI_STATE", False),
    ("android.permission.VIBRATE", False),
    ("android.permission.WAKE_LOCK", False),
    ("android.permission.RECEIVE_BOOT_COMPLETED", False),
    ("android.permission.GET_ACCOUNTS", True),
    ("android.permission.ACCESS_FINE_LOCATION", True),
    ("android.permission.ACCESS_COARSE_LOCATION", True),
    ("android.permission.CAMERA", True),
    ("android.permission.RECORD_AUDIO", True),
    ("android.permission.READ_CONTACTS", True),
    ("android.permission.WRITE_EXTERNAL_STORAGE", True),
    ("android.permission.READ_PHONE_STATE", True),
    ("android.permission.SEND_SMS", True),
    ("android.permission.RECEIVE_SMS", True),
    ("android.permission.READ_SMS", True),
    ("android.permission.CALL_PHONE", True),
)
_PERMISSION_DANGER = dict(ANDROID_PERMISSIONS)
# permission a call into the category needs at runtime
CATEGORY_PERMISSIONS = {
    "android.accounts.AccountManager": "android.permission.GET_ACCOUNTS",
    "android.location.Location": "android.permission.ACCESS_FINE_LOCATION",
    "android.media.AudioRecord": "android.permission.RECORD_AUDIO",
    "android.media.MediaRecorder": "android.permission.RECORD_AUDIO",
    "android.net.wifi.WifiInfo": "android.permission.ACCESS_WIFI_STATE",
    "android.telephony.SmsManager": "android.permission.SEND_SMS",
    "android.telephony.TelephonyManager": "android.permission.READ_PHONE_STATE",
    "java.net.URL": "android.permission.INTERNET",
    "org.apache.http.impl.client.AbstractHttpClient": "android.permission.INTERNET",
}

SYSTEM_INTENTS = (
    "android.intent.action.BOOT_COMPLETED",
    "android.provider.Telephony.SMS_RECEIVED",
    "android.intent.action.USER_PRESENT",
    "android.net.conn.CONNECTIVITY_CHANGE",
    "android.intent.action.PACKAGE_ADDED",
    "android.intent.action.BATTERY_LOW",
    "android.intent.action.SCREEN_ON",
    "android.intent.action.PHONE_STATE",
)


def _draw_call(rng: random.Random, categories: Sequence[str]) -> ApiCallId:
    cat = CATEGORIES[category_index(rng.choice(categories))]
    return ApiCallId.of(cat.index, rng.choice(cat.methods))


def _benign_emits(rng: random.Random, config: CorpusConfig) -> tuple[ApiCallId, ...]:
    if rng.random() < config.empty_block_rate:
        return ()
    calls = []
    for _ in range(rng.randint(1, 3)):
        profile = config.payload_categories if rng.random() < config.benign_sensitive_rate else config.benign_categories
        calls.append(_draw_call(rng, profile))
    return tuple(calls)


def static_counts_from_cfg(cfg: CFG) -> list[int]:
    """Call-site counts per static API category over every block of ``cfg``."""
    counts = [0] * STATIC_SUBSET
    for b in cfg.blocks:
        for call in b.emits:
            if call.category is not None and call.category < STATIC_SUBSET:
                counts[call.category] += 1
    return counts


def generate_benign(app_id: str, config: CorpusConfig, seed: int) -> SyntheticApp:
    """One benign app: a random spanning tree from the entry block plus extra edges."""
    rng = random.Random(seed)
    n = rng.randint(config.min_blocks, config.max_blocks)

    min_sdk = rng.randint(8, 21)
    max_sdk = rng.randint(max(min_sdk, 19), 28)
    n_perm = rng.randint(2, 10)
    chosen = rng.sample(ANDROID_PERMISSIONS, n_perm)
    perms = [Permission(name, "android", danger) for name, danger in chosen]
    for k in range(rng.choice((0, 0, 1, 2))):
        perms.append(Permission(f"com.{app_id}.permission.CUSTOM{k}", "custom", False))
    intents = tuple(rng.sample(SYSTEM_INTENTS, rng.randint(0, 3)))

    blocks = [Block(i, _benign_emits(rng, config)) for i in range(n)]
    edges: list[Edge] = []
    for i in range(1, n):
        parent = rng.randrange(i)
        if intents and rng.random() < config.intent_edge_rate:
            edges.append(Edge(parent, i, INTENT_GUARDED, rng.choice(intents)))
        else:
            edges.append(Edge(parent, i))
    existing = {(e.src, e.dst) for e in edges}
    for i in range(n):
        if rng.random() < 0.3:
            j = rng.randrange(n)
            if (i, j) not in existing:
                existing.add((i, j))
                edges.append(Edge(i, j))
    cfg = CFG(0, tuple(blocks), tuple(edges))

    library = [rng.choice((0, 0, 0, 1, 2)) for _ in range(STATIC_SUBSET)]
    static = [a + b for a, b in zip(library, static_counts_from_cfg(cfg))]
    manifest = Manifest(
        min_sdk=min_sdk,
        max_sdk=max_sdk,
        n_activities=rng.randint(1, 15),
        n_services=rng.randint(0, 5),
        n_receivers=rng.randint(0, 4) + len(intents),
        n_providers=rng.randint(0, 3),
        permissions=tuple(perms),
        declared_intents=intents,
        static_api_counts=tuple(static),
    )
    return SyntheticApp(app_id, manifest, cfg, BENIGN)


def _pick_trigger(rng: random.Random, config: CorpusConfig, base: SyntheticApp) -> Trigger:
    r = rng.random()
    acc = 0.0
    variant = config.trigger_mix[-1][0]
    for name, weight in config.trigger_mix:
        acc += weight
        if r < acc:
            variant = name
            break
    if variant == "Null":
        return Trigger.null()
    if variant == "Probabilistic":
        return Trigger.probabilistic(config.probabilistic_p)
    if variant == "Intent":
        pool = base.manifest.declared_intents or SYSTEM_INTENTS
        return Trigger.intent(rng.choice(pool))
    return Trigger.state(rng.randint(min(1, config.state_threshold_max), config.state_threshold_max))


def repackage(base: SyntheticApp, app_id: str, config: CorpusConfig, seed: int) -> SyntheticApp:
    """Build a malicious twin of ``base``: graft a random payload and update the manifest.

    Static API counts grow by the payload's call sites, permissions the
    payload's calls need are requested if missing, and an Intent trigger
    registers one more receiver.
    """
    rng = random.Random(seed)
    host = replace(base, app_id=app_id)
    n_host = len(host.cfg.blocks)
    k = max(1, int(math.floor(n_host * config.payload_ratio + 0.5)))
    first = max(host.cfg.block_ids()) + 1
    pblocks = tuple(
        Block(first + i, tuple(_draw_call(rng, config.payload_categories) for _ in range(rng.randint(1, 3))), True)
        for i in range(k)
    )
    graft = rng.choice(host.cfg.block_ids())
    trigger = _pick_trigger(rng, config, host)
    app = inject_payload(host, PayloadSpec(pblocks, graft, trigger))

    m = app.manifest
    static = list(m.static_api_counts)
    for b in pblocks:
        for call in b.emits:
            if call.category < STATIC_SUBSET:
                static[call.category] += 1
    perms = list(m.permissions)
    have = {p.name for p in perms}
    for b in pblocks:
        for call in b.emits:
            needed = CATEGORY_PERMISSIONS.get(CATEGORY_NAMES[call.category])
            if needed and needed not in have:
                have.add(needed)
                perms.append(Permission(needed, "android", _PERMISSION_DANGER[needed]))
    n_receivers = m.n_receivers + (1 if trigger.variant == "Intent" else 0)
    manifest = replace(m, permissions=tuple(perms), static_api_counts=tuple(static), n_receivers=n_receivers)
    return replace(app, manifest=manifest)


def generate_corpus(config: CorpusConfig, seed: int) -> list[SyntheticApp]:
    """Generate ``n_benign`` benign apps and ``n_malicious`` repackaged ones.

    With ``config.paired`` the i-th malicious app repackages benign app
    ``i % n_benign`` (original/repackaged pairs); otherwise each malicious app
    gets a fresh host. App ids are assigned after a seeded shuffle so they
    carry no label information. Output order is by app id.
    """
    config.validate()
    n_total = config.n_benign + config.n_malicious
    order = list(range(n_total))
    random.Random(derive_seed(seed, "ids", 0)).shuffle(order)
    width = max(4, len(str(n_total)))
    ids = [f"app{k:0{width}d}" for k in order]

    apps = []
    benign = []
    for i in range(config.n_benign):
        app = generate_benign(ids[i], config, derive_seed(seed, "benign", i))
        benign.append(app)
        apps.append(app)
    for j in range(config.n_malicious):
        app_id = ids[config.n_benign + j]
        if config.paired:
            host = benign[j % config.n_benign]
        else:
            host = generate_benign(app_id, config, derive_seed(seed, "host", j))
        apps.append(repackage(host, app_id, config, derive_seed(seed, "payload", j)))
    apps.sort(key=lambda a: a.app_id)
    return apps


# --------------------------------------------------------------------------
# Persistence


def save_corpus(apps: Iterable[SyntheticApp], out_dir: Path | str, force: bool = False) -> Path:
    """Write one JSON file per app, ``index.json`` and ``ground_truth.json``.

    Raises FileExistsError if ``out_dir`` is non-empty and ``force`` is False.
    """
    out = Path(out_dir)
    if out.exists() and any(out.iterdir()):
        if not force:
            raise FileExistsError(f"{out} is not empty")
        shutil.rmtree(out)
    out.mkdir(parents=True, exist_ok=True)
    index = []
    truth = {}
    for app in apps:
        fname = f"{app.app_id}.json"
        (out / fname).write_text(app.to_json(), encoding="utf-8")
        index.append({"app_id": app.app_id, "label": app.label, "file": fname})
        truth[app.app_id] = app.payload_block_ids()
    (out / INDEX_FILE).write_text(json.dumps(index, indent=1) + "\n", encoding="utf-8")
    (out / GROUND_TRUTH_FILE).write_text(json.dumps(truth, indent=1) + "\n", encoding="utf-8")
    return out


def load_corpus(corpus_dir: Path | str) -> list[SyntheticApp]:
    """Load apps in index order. Errors surface as OSError / ValueError / KeyError."""
    root = Path(corpus_dir)
    index = json.loads((root / INDEX_FILE).read_text(encoding="utf-8"))
    apps = []
    for entry in index:
        app = SyntheticApp.from_dict(json.loads((root / entry["file"]).read_text(encoding="utf-8")))
        if app.app_id != entry["app_id"] or app.label != entry["label"]:
            raise ValueError(f"index entry disagrees with {entry['file']}")
        apps.append(app)
    return apps


def load_ground_truth(corpus_dir: Path | str) -> dict[str, list[int]]:
    return json.loads((Path(corpus_dir) / GROUND_TRUTH_FILE).read_text(encoding="utf-8"))
