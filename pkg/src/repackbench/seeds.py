"""Deterministic seed derivation."""

from __future__ import annotations

import hashlib

SEED_BITS = 63


def derive_seed(master_seed: int, key: str, index: int) -> int:
    """Mix ``(master_seed, key, index)`` into a 63-bit seed.

    The digest is SHA-256 over the UTF-8 string ``"{master_seed}:{key}:{index}"``;
    the first 8 bytes are read big-endian and the top bit is dropped.
    ``key`` is the app id for stimulation seeds, or a role name such as
    ``"run"`` for harness seeds.
    """
    msg = f"{int(master_seed)}:{key}:{int(index)}".encode("utf-8")
    digest = hashlib.sha256(msg).digest()
    return int.from_bytes(digest[:8], "big") >> (64 - SEED_BITS)
