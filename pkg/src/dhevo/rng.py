"""Deterministic RNG stream derivation.

Child streams are named, not positional: the seed of a stream depends only
on the root seed and the path of names leading to it, so adding or
reordering sibling streams never perturbs the others.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(base_seed: int, *path: object) -> int:
    """Map (base_seed, path...) to a stable 64-bit child seed."""
    text = ":".join([str(int(base_seed))] + [str(p) for p in path])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big", signed=False)


def stream(base_seed: int, *path: object) -> np.random.Generator:
    """A fresh generator for the named child stream."""
    return np.random.default_rng(derive_seed(base_seed, *path))
