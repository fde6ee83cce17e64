"""Randomized digital nets.

Completely random designs and random linear scrambling both realize
``x_ij = C_j i + D_j`` with random ``C_j`` and uniform shifts ``D_j``.  Owen
(nested uniform) scrambling is realized lazily: the permutation bit at a node
of the binary tree is a keyed hash of the node, so no tree is ever stored.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import gf2
from .gf2 import WORD_BITS, DomainError, top_mask
from .nets import NetDefinition, generate_pointset

_U64 = np.uint64
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer
    z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
    return z ^ (z >> _U64(31))


# ------------------------------------------------------- digital designs


def completely_random_design(s: int, m: int, rng: np.random.Generator, E: int = WORD_BITS) -> NetDefinition:
    """All matrix entries and shift digits i.i.d. uniform."""
    if not m <= E <= WORD_BITS:
        raise DomainError(f"precision E={E} must satisfy m={m} <= E <= 64")
    cols = gf2.random_words(E, (s, m), rng)
    shifts = gf2.random_words(E, s, rng)
    return NetDefinition(cols, shifts, E)


def _check_square(base: NetDefinition) -> None:
    spill = _U64(((1 << WORD_BITS) - 1) & ~top_mask(base.m))
    if np.any(base.columns & spill):
        raise DomainError("base generating matrices must be m x m (no digits below row m)")


def scramble_columns(base_cols: np.ndarray, lower: np.ndarray) -> np.ndarray:
    """Columns of ``M_j @ base_j`` given the column words of ``M_j``.

    ``base_cols`` has shape ``(s, m)`` with m-digit columns, ``lower`` has
    shape ``(s, m)`` holding the columns of the ``E x m`` scramblers.
    """
    out = np.zeros_like(base_cols)
    m = base_cols.shape[1]
    for r in range(m):
        sel = (base_cols >> _U64(WORD_BITS - 1 - r)) & _U64(1)
        out ^= sel * lower[:, r : r + 1]
    return out


def linear_scramble(base: NetDefinition, rng: np.random.Generator, E: int = WORD_BITS) -> NetDefinition:
    """``C_j = M_j base_j`` with random unit lower-triangular ``M_j``, plus fresh shifts."""
    _check_square(base)
    lower = gf2.lower_triangular_words(E, base.m, base.s, rng)
    cols = scramble_columns(base.columns, lower)
    shifts = gf2.random_words(E, base.s, rng)
    return NetDefinition(cols, shifts, E)


def digital_shift(base: NetDefinition, rng: np.random.Generator, E: int = WORD_BITS) -> NetDefinition:
    return base.with_shifts(base.shifts ^ gf2.random_words(E, base.s, rng))


# ---------------------------------------------------------- Owen scrambling


@dataclass(frozen=True)
class ScrambleTree:
    """Lazy nested-uniform scramble keyed by a 64-bit seed.

    The flip applied to digit ``l`` depends on the input digits ``1..l-1``.
    Write that prefix as a head ending in its last one (position ``t``,
    ``t = 0`` for the all-zero prefix) followed by zeros.  All nodes sharing
    a head draw their flips from one hash word of ``(key, dim, t, head)``,
    digit ``l`` taking bit ``64 - l + t``.  Distinct nodes therefore get
    independent bits, and runs of zero digits cost a single hash.
    """

    key: int

    def head_word(self, dim, t, head) -> np.ndarray:
        with np.errstate(over="ignore"):
            k = np.asarray(self.key, dtype=_U64)
            h = _mix64(k ^ _mix64(np.asarray(dim, dtype=_U64) + _U64(_GOLDEN)))
            h = _mix64(h + np.asarray(t, dtype=_U64) * _U64(_GOLDEN))
            return _mix64(h ^ np.asarray(head, dtype=_U64))

    def bit(self, dim: int, digit: int, prefix: int) -> int:
        """Flip for ``digit`` (1-based) below the node whose first ``digit-1`` digits are ``prefix``."""
        if not 1 <= digit <= WORD_BITS:
            raise DomainError(f"digit {digit} outside 1..64")
        t = prefix.bit_length() and (digit - 1) - ((prefix & -prefix).bit_length() - 1)
        head = prefix >> (digit - 1 - t) if t else 0
        w = int(self.head_word(dim, t, head))
        return (w >> (WORD_BITS - digit + t)) & 1


def owen_scramble_point(tree: ScrambleTree, x: int, dim: int, depth: int = WORD_BITS) -> int:
    """Digit-by-digit reference scramble of one fraction word."""
    x = int(x)
    out = 0
    for l in range(1, depth + 1):
        prefix = x >> (WORD_BITS - l + 1) if l > 1 else 0
        b = (x >> (WORD_BITS - l)) & 1
        out |= (b ^ tree.bit(dim, l, prefix)) << (WORD_BITS - l)
    return out | (x & (((1 << WORD_BITS) - 1) & ~top_mask(depth)))


def owen_scramble(tree: ScrambleTree, x: np.ndarray, dim: int, depth: int = WORD_BITS) -> np.ndarray:
    """Vectorized Owen scramble of fraction words; digits beyond ``depth`` pass through."""
    if not 0 <= depth <= WORD_BITS:
        raise DomainError(f"depth {depth} outside [0, 64]")
    x = np.asarray(x, dtype=_U64)
    shape = x.shape
    x = x.reshape(-1)
    n = x.size
    nz = x & top_mask_u64(depth)
    # position of the last one digit inside the scrambled range
    with np.errstate(over="ignore"):
        low = nz & (~nz + _U64(1))
        trailing = np.bitwise_count(low - _U64(1)).astype(np.int64)
    last = np.where(nz == 0, 0, WORD_BITS - trailing)
    loop_to = int(last.max(initial=0))

    t = np.zeros(n, dtype=np.int64)
    w = np.broadcast_to(tree.head_word(dim, 0, 0), (n,)).copy()
    out = np.zeros(n, dtype=_U64)
    for l in range(1, loop_to + 1):
        pos = _U64(WORD_BITS - l)
        b = (x >> pos) & _U64(1)
        f = (w >> (pos + t.astype(_U64))) & _U64(1)
        out |= (b ^ f) << pos
        hit = b.astype(bool)
        if hit.any():
            t[hit] = l
            w[hit] = tree.head_word(dim, l, x[hit] >> pos)
    if loop_to < depth:
        tail = top_mask(depth) & ~top_mask(loop_to)
        shifted = np.where(t < WORD_BITS, w >> np.minimum(t, WORD_BITS - 1).astype(_U64), _U64(0))
        out |= shifted & _U64(tail)
    out |= x & _U64(((1 << WORD_BITS) - 1) & ~top_mask(depth))
    return out.reshape(shape)


def top_mask_u64(depth: int) -> np.uint64:
    return _U64(top_mask(depth))


# ------------------------------------------------------------- dispatch


@dataclass(frozen=True)
class CompletelyRandom:
    s: int
    m: int


@dataclass(frozen=True)
class LinearScramble:
    base: NetDefinition


@dataclass(frozen=True)
class DigitalShiftOnly:
    base: NetDefinition


@dataclass(frozen=True)
class OwenScramble:
    base: NetDefinition
    depth: int = WORD_BITS


RandomizationKind = Union[CompletelyRandom, LinearScramble, DigitalShiftOnly, OwenScramble]


@dataclass(frozen=True)
class Realization:
    """One randomized point set; call it to get the ``(2**m, s)`` words."""

    kind: RandomizationKind
    net: NetDefinition | None = None
    keys: tuple[int, ...] = ()

    def __call__(self) -> np.ndarray:
        if self.net is not None:
            return generate_pointset(self.net)
        base = generate_pointset(self.kind.base)
        out = np.empty_like(base)
        for j, key in enumerate(self.keys):
            out[:, j] = owen_scramble(ScrambleTree(key), base[:, j], j, self.kind.depth)
        return out


def randomize(kind: RandomizationKind, rng: np.random.Generator) -> Realization:
    if isinstance(kind, CompletelyRandom):
        return Realization(kind, completely_random_design(kind.s, kind.m, rng))
    if isinstance(kind, LinearScramble):
        return Realization(kind, linear_scramble(kind.base, rng))
    if isinstance(kind, DigitalShiftOnly):
        return Realization(kind, digital_shift(kind.base, rng))
    if isinstance(kind, OwenScramble):
        _check_square(kind.base)
        keys = rng.integers(0, 1 << 64, size=kind.base.s, dtype=np.uint64, endpoint=False)
        return Realization(kind, keys=tuple(int(k) for k in keys))
    raise TypeError(f"unknown randomization {kind!r}")
