"""Seeded, splittable random streams.

Every consumer asks for a generator by (seed, tag...). Distinct tags give
statistically independent streams, and the same (seed, tags) always gives
the same stream, independently of call order.
"""
from __future__ import annotations

import zlib

import numpy as np

DEFAULT_SEED = 20240611


def _tag_key(tag) -> int:
    return zlib.crc32(str(tag).encode("utf-8"))


def stream(seed: int, *tags) -> np.random.Generator:
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(_tag_key(t) for t in tags))
    return np.random.Generator(np.random.PCG64(seq))
