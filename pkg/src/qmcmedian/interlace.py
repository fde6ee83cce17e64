"""Digit interlacing and higher-order scrambled digital nets."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .gf2 import WORD_BITS, DomainError
from .nets import SobolDirections, default_directions, generate_pointset, sobol_net
from .randomize import ScrambleTree, owen_scramble

_U64 = np.uint64


def interlace_indices(k: Sequence[int]) -> int:
    """Merge ``d`` indices: bit ``d(l-1)+r-1`` of the result is bit ``l-1`` of ``k[r-1]``."""
    d = len(k)
    if d < 1:
        raise DomainError("need at least one index")
    out = 0
    for r, kr in enumerate(k):
        kr = int(kr)
        if kr < 0:
            raise DomainError(f"negative index {kr}")
        l = 0
        while kr:
            if kr & 1:
                out |= 1 << (d * l + r)
            kr >>= 1
            l += 1
    if out >> WORD_BITS:
        raise DomainError("interlaced index needs more than 64 bits")
    return out


def deinterlace_index(k: int, d: int) -> tuple[int, ...]:
    if d < 1:
        raise DomainError(f"interlacing factor {d} < 1")
    if k < 0:
        raise DomainError(f"negative index {k}")
    parts = [0] * d
    pos = 0
    while k:
        if k & 1:
            parts[pos % d] |= 1 << (pos // d)
        k >>= 1
        pos += 1
    return tuple(parts)


def interlace_index_vector(k: Sequence[int], d: int) -> tuple[int, ...]:
    """Blockwise map from ``d*s`` indices to ``s`` interlaced indices."""
    if len(k) % d:
        raise DomainError(f"{len(k)} indices do not split into blocks of {d}")
    return tuple(interlace_indices(k[i : i + d]) for i in range(0, len(k), d))


def interlace_point(coords) -> np.ndarray:
    """Interleave the digits of ``d`` fraction words (last axis) into one.

    Output digit ``d(l-1)+r`` is digit ``l`` of input ``r``; output digits
    past 64 are dropped.
    """
    x = np.asarray(coords, dtype=_U64)
    d = x.shape[-1]
    if d == 1:
        return x[..., 0].copy()
    out = np.zeros(x.shape[:-1], dtype=_U64)
    for o in range(1, WORD_BITS + 1):
        l, r = divmod(o - 1, d)
        bit = (x[..., r] >> _U64(WORD_BITS - 1 - l)) & _U64(1)
        out |= bit << _U64(WORD_BITS - o)
    return out


def interlace_blocks(points: np.ndarray, d: int) -> np.ndarray:
    """``(n, d*s)`` words to ``(n, s)`` by interlacing consecutive blocks of ``d``."""
    n, ds = points.shape
    if ds % d:
        raise DomainError(f"{ds} coordinates do not split into blocks of {d}")
    return interlace_point(points.reshape(n, ds // d, d))


def digits_used(d: int) -> int:
    """Input digits per coordinate that survive interlacing into 64 output digits."""
    return -(-WORD_BITS // d)


def higher_order_pointset(
    d: int,
    s: int,
    m: int,
    rng: np.random.Generator,
    directions: SobolDirections | None = None,
) -> np.ndarray:
    """Order-``d`` scrambled digital net: Owen-scrambled Sobol' in ``d*s``
    dimensions, then each block of ``d`` coordinates interlaced into one."""
    if d < 1:
        raise DomainError(f"order {d} < 1")
    directions = default_directions() if directions is None else directions
    if not directions.covers(d * s):
        raise DomainError(f"order {d} in {s} dimensions needs {d * s} Sobol' dimensions, have {directions.max_dim}")
    base = generate_pointset(sobol_net(d * s, m, directions))
    keys = rng.integers(0, 1 << 64, size=d * s, dtype=_U64, endpoint=False)
    depth = digits_used(d)
    scrambled = np.empty_like(base)
    for j in range(d * s):
        scrambled[:, j] = owen_scramble(ScrambleTree(int(keys[j])), base[:, j], j, depth)
    return interlace_blocks(scrambled, d)
