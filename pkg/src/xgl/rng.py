"""Reproducible, splittable random streams.

Every stream is a Philox generator keyed by (seed, *path).  Work is
split by key, never by thread, so results do not depend on how many
workers consume the streams.
"""
from __future__ import annotations

import numpy as np


def stream(seed: int, *path: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def chunks(total: int, size: int):
    """Yield (index, count) pieces covering ``total`` items."""
    for i, start in enumerate(range(0, total, size)):
        yield i, min(size, total - start)
