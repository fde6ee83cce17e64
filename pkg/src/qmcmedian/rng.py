"""Labeled counter-based random streams.

Every draw in the package comes from a Philox stream keyed by
``(seed, label, *indices)``, so a replicate's randomness does not depend on
which worker ran it or in what order.
"""

from __future__ import annotations

import zlib

import numpy as np


def label_code(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


def stream(seed: int, label: str, *indices: int) -> np.random.Generator:
    """Independent generator addressed by a master seed, a label and indices."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(label_code(label), *map(int, indices)))
    return np.random.Generator(np.random.Philox(ss))
