"""Monitored API category table.

The table is pinned in ``data/api_categories.json``: 37 class prefixes, each with
the methods hooked for it. Dynamic features count calls per category; static
API features use the first ``STATIC_SUBSET`` categories in table order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Optional


@dataclass(frozen=True)
class Category:
    index: int
    name: str
    methods: tuple[str, ...]


@lru_cache(maxsize=None)
def _load() -> tuple[int, int, tuple[Category, ...]]:
    raw = resources.files("repackbench").joinpath("data/api_categories.json").read_text("utf-8")
    doc = json.loads(raw)
    cats = tuple(
        Category(i, entry["class"], tuple(entry["methods"]))
        for i, entry in enumerate(doc["categories"])
    )
    return doc["version"], doc["static_subset"], cats


TABLE_VERSION, STATIC_SUBSET, CATEGORIES = _load()
N_CATEGORIES = len(CATEGORIES)
CATEGORY_NAMES: tuple[str, ...] = tuple(c.name for c in CATEGORIES)
_BY_NAME = {c.name: c.index for c in CATEGORIES}

assert N_CATEGORIES == 37 and STATIC_SUBSET == 27


def category_index(name: str) -> int:
    """Index of an exact category name; raises KeyError if absent."""
    return _BY_NAME[name]


def map_call_to_category(cls: str, method: str = "") -> Optional[int]:
    """Map a call's class to the category with the longest matching prefix.

    A prefix only matches on a name boundary: the class equals the category
    name or continues with ``.`` or ``$`` (nested classes). ``method`` is
    accepted for signature symmetry with log records but does not affect the
    result. Returns None for unmonitored classes.
    """
    best: Optional[int] = None
    best_len = -1
    for cat in CATEGORIES:
        name = cat.name
        if len(name) <= best_len:
            continue
        if cls == name or (
            cls.startswith(name) and cls[len(name)] in ".$"
        ):
            best, best_len = cat.index, len(name)
    return best


def split_method(full: str) -> tuple[str, str]:
    """Split ``package.module.class.method`` into (class, method)."""
    cls, sep, meth = full.rpartition(".")
    if not sep or not cls or not meth:
        raise ValueError(f"not a qualified method name: {full!r}")
    return cls, meth
