"""Named child random streams derived from one run seed.

Every source of randomness (init, data order, modality dropout, ...)
pulls from its own named stream so that changing one factor — say,
disabling dropout — never shifts the draws consumed by the others.
"""

from __future__ import annotations

import numpy as np

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash."""
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def child_rng(seed: int, name: str) -> np.random.Generator:
    """Deterministic per-name generator for the given run seed."""
    tag = fnv1a64(name.encode("utf-8"))
    key = (tag & 0xFFFFFFFF, tag >> 32)
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))
