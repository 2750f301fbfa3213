"""Seed derivation.

Every random stream in the package is derived from one root seed with
splitmix64. ``derive_seed(root, *keys)`` folds each key into the state in
order, so ``derive_seed(42, "train", 3)`` is stable across runs and
platforms. String keys are hashed with FNV-1a (not Python's salted ``hash``).
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _key_int(key: int | str) -> int:
    if isinstance(key, (int, np.integer)):
        return int(key) & MASK64
    h = 0xCBF29CE484222325
    for b in str(key).encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) & MASK64
    return h


def derive_seed(root: int, *keys: int | str) -> int:
    """Derive a 63-bit child seed from ``root`` and a path of keys."""
    s = splitmix64(int(root) & MASK64)
    for k in keys:
        s = splitmix64(s ^ _key_int(k))
    return s >> 1


def rng_for(root: int, *keys: int | str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(root, *keys))
