"""Base-2 digital nets: point generation, Sobol' matrices, net verification."""

from __future__ import annotations

import itertools
import logging
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .gf2 import WORD_BITS, BitMatrix, DomainError

log = logging.getLogger(__name__)

DIRECTIONS_ENV = "QMC_DIRECTIONS"
NET_CHECK_BUDGET = 10**8
_TO_UNIT = 2.0**-64


class ParseError(ValueError):
    """Malformed direction-number file."""


@dataclass(frozen=True, eq=False)
class NetDefinition:
    """Generating matrices and digital shifts of a base-2 net.

    ``columns[j, c]`` is the fraction word of column ``c+1`` of ``C_j``
    and ``shifts[j]`` the fraction word of ``D_j``.
    """

    columns: np.ndarray
    shifts: np.ndarray
    rows: int = WORD_BITS

    def __post_init__(self):
        cols = np.ascontiguousarray(self.columns, dtype=np.uint64)
        if cols.ndim != 2:
            raise DomainError("columns must have shape (s, m)")
        shifts = np.ascontiguousarray(self.shifts, dtype=np.uint64).reshape(-1)
        if shifts.shape[0] != cols.shape[0]:
            raise DomainError(f"{cols.shape[0]} matrices but {shifts.shape[0]} shifts")
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "shifts", shifts)

    @classmethod
    def from_matrices(cls, matrices, shifts=None) -> "NetDefinition":
        matrices = list(matrices)
        m = matrices[0].cols if matrices else 0
        if any(M.cols != m for M in matrices):
            raise DomainError("all generating matrices need the same column count")
        cols = np.array([M.columns for M in matrices], dtype=np.uint64).reshape(len(matrices), m)
        if shifts is None:
            shifts = np.zeros(len(matrices), dtype=np.uint64)
        return cls(cols, np.array([int(w) for w in shifts], dtype=np.uint64))

    @property
    def s(self) -> int:
        return self.columns.shape[0]

    @property
    def m(self) -> int:
        return self.columns.shape[1]

    @property
    def matrices(self) -> tuple[BitMatrix, ...]:
        return tuple(BitMatrix(self.rows, self.m, tuple(int(w) for w in row)) for row in self.columns)

    def unshifted(self) -> "NetDefinition":
        return NetDefinition(self.columns, np.zeros_like(self.shifts), self.rows)

    def with_shifts(self, shifts) -> "NetDefinition":
        return NetDefinition(self.columns, np.asarray(shifts, dtype=np.uint64), self.rows)


def generate_point(net: NetDefinition, i: int) -> np.ndarray:
    """Point ``i`` as ``s`` fraction words: ``C_j i + D_j`` over GF(2)."""
    if not 0 <= i < (1 << net.m):
        raise DomainError(f"index {i} outside [0, 2**{net.m})")
    out = net.shifts.copy()
    for c in range(net.m):
        if (i >> c) & 1:
            out ^= net.columns[:, c]
    return out


def generate_pointset(net: NetDefinition) -> np.ndarray:
    """All ``2**m`` points in index order, shape ``(2**m, s)`` of uint64 words."""
    n = 1 << net.m
    pts = np.zeros((n, net.s), dtype=np.uint64)
    for c in range(net.m):
        half = 1 << c
        pts[half : 2 * half] = pts[:half] ^ net.columns[:, c]
    pts ^= net.shifts
    return pts


def to_unit(words: np.ndarray) -> np.ndarray:
    """Fraction words as binary64, rounded to nearest."""
    return np.asarray(words, dtype=np.uint64).astype(np.float64) * _TO_UNIT


def from_unit(x) -> np.ndarray:
    """Exact words for dyadic floats in [0, 1) (test and CLI convenience)."""
    x = np.asarray(x, dtype=np.float64)
    if np.any((x < 0) | (x >= 1)):
        raise DomainError("values must lie in [0, 1)")
    hi = np.floor(x * 2.0**32)
    lo = (x * 2.0**32 - hi) * 2.0**32
    return (hi.astype(np.uint64) << np.uint64(32)) | lo.astype(np.uint64)


# ---------------------------------------------------------------- Sobol'


@dataclass(frozen=True)
class DirectionRecord:
    d: int
    degree: int
    a: int
    m_init: tuple[int, ...]


@dataclass(frozen=True)
class SobolDirections:
    records: dict[int, DirectionRecord] = field(default_factory=dict)

    @property
    def max_dim(self) -> int:
        return max(self.records, default=1)

    def covers(self, dims: int) -> bool:
        return all(d in self.records for d in range(2, dims + 1))


def parse_joe_kuo(text: str, source: str = "<string>") -> SobolDirections:
    records: dict[int, DirectionRecord] = {}
    lines = text.splitlines()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split()
        try:
            nums = [int(f) for f in fields]
        except ValueError:
            raise ParseError(f"{source}:{lineno}: non-integer field in {line!r}") from None
        if len(nums) < 3:
            raise ParseError(f"{source}:{lineno}: expected 'd s a m_1 ... m_s'")
        d, deg, a, *ms = nums
        if d < 2:
            raise ParseError(f"{source}:{lineno}: dimension index {d} < 2")
        if deg < 1 or len(ms) != deg:
            raise ParseError(f"{source}:{lineno}: degree {deg} but {len(ms)} initial values")
        if a < 0:
            raise ParseError(f"{source}:{lineno}: negative coefficient {a}")
        for i, mi in enumerate(ms, start=1):
            if mi % 2 == 0:
                raise ParseError(f"{source}:{lineno}: m_{i}={mi} is not odd")
            if not 0 < mi < (1 << i):
                raise ParseError(f"{source}:{lineno}: m_{i}={mi} not below 2**{i}")
        if d in records:
            raise ParseError(f"{source}:{lineno}: duplicate dimension {d}")
        records[d] = DirectionRecord(d, deg, a, tuple(ms))
    return SobolDirections(records)


def load_joe_kuo(path) -> SobolDirections:
    path = Path(path)
    return parse_joe_kuo(path.read_text(), source=str(path))


def default_directions_path() -> Path:
    env = os.environ.get(DIRECTIONS_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("qmcmedian") / "data" / "new-joe-kuo-100.txt"))


_default_cache: dict[Path, SobolDirections] = {}


def default_directions() -> SobolDirections:
    path = default_directions_path()
    if path not in _default_cache:
        _default_cache[path] = load_joe_kuo(path)
    return _default_cache[path]


def direction_integers(rec: DirectionRecord, count: int) -> list[int]:
    """``m_1..m_count`` extended by the Sobol' recurrence."""
    deg, a = rec.degree, rec.a
    ms = list(rec.m_init[:count])
    for c in range(deg + 1, count + 1):
        new = ms[c - deg - 1] ^ (ms[c - deg - 1] << deg)
        for k in range(1, deg):
            if (a >> (deg - 1 - k)) & 1:
                new ^= ms[c - k - 1] << k
        ms.append(new)
    return ms


def sobol_generating_matrix(directions: SobolDirections, dim: int, m: int) -> BitMatrix:
    """``m x m`` generating matrix of Sobol' dimension ``dim`` (1-based)."""
    if dim < 1:
        raise DomainError(f"dimension {dim} < 1")
    if not 0 <= m <= WORD_BITS:
        raise DomainError(f"m={m} outside [0, 64]")
    if dim == 1:
        return BitMatrix.identity(m)
    if dim not in directions.records:
        raise DomainError(f"direction numbers cover dimensions up to {directions.max_dim}, need {dim}")
    ms = direction_integers(directions.records[dim], m)
    return BitMatrix(m, m, tuple(mc << (WORD_BITS - c) for c, mc in enumerate(ms, start=1)))


def sobol_net(s: int, m: int, directions: SobolDirections | None = None, first_dim: int = 1) -> NetDefinition:
    directions = default_directions() if directions is None else directions
    mats = [sobol_generating_matrix(directions, d, m) for d in range(first_dim, first_dim + s)]
    return NetDefinition.from_matrices(mats)


# ---------------------------------------------------- elementary intervals


@dataclass(frozen=True)
class ElementaryInterval:
    ell: tuple[int, ...]
    a: tuple[int, ...]

    def __post_init__(self):
        if len(self.ell) != len(self.a):
            raise DomainError("ell and a differ in length")
        for l, aj in zip(self.ell, self.a):
            if l < 0 or not 0 <= aj < (1 << l):
                raise DomainError(f"a_j={aj} outside [0, 2**{l})")

    def contains(self, point_words) -> bool:
        return all(l == 0 or (int(w) >> (WORD_BITS - l)) == aj for l, aj, w in zip(self.ell, self.a, point_words))


def compositions(total: int, parts: int):
    """All ``parts``-tuples of nonnegative integers summing to ``total``."""
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(total + parts - 1 - prev - 1)
        yield tuple(out)


def _log2_size(points: np.ndarray) -> int:
    n = points.shape[0]
    if n < 1 or n & (n - 1):
        raise DomainError(f"point count {n} is not a power of two")
    return n.bit_length() - 1


def net_check_cost(s: int, m: int, t: int) -> int:
    k = m - t
    return math.comb(k + s - 1, s - 1) * (1 << k)


def find_net_violation(points: np.ndarray, t: int) -> ElementaryInterval | None:
    """First elementary interval of volume ``2**(t-m)`` not holding ``2**t`` points."""
    points = np.asarray(points, dtype=np.uint64)
    if points.ndim == 1:
        points = points[:, None]
    m = _log2_size(points)
    s = points.shape[1]
    if not 0 <= t <= m:
        raise DomainError(f"t={t} outside [0, m={m}]")
    k = m - t
    cost = net_check_cost(s, m, t)
    if cost > NET_CHECK_BUDGET:
        raise DomainError(f"net check needs {cost} interval tests, budget is {NET_CHECK_BUDGET}")
    want = 1 << t
    for ell in compositions(k, s):
        cell = np.zeros(points.shape[0], dtype=np.uint64)
        for j, l in enumerate(ell):
            if l:
                cell = (cell << np.uint64(l)) | (points[:, j] >> np.uint64(WORD_BITS - l))
        counts = np.bincount(cell.astype(np.int64), minlength=1 << k)
        bad = np.flatnonzero(counts != want)
        if bad.size:
            flat = int(bad[0])
            a = []
            for l in reversed(ell):
                a.append(flat & ((1 << l) - 1))
                flat >>= l
            return ElementaryInterval(ell, tuple(reversed(a)))
    return None


def verify_net(points: np.ndarray, t: int) -> bool:
    """True iff ``points`` (``2**m`` fraction-word rows) form a ``(t, m, s)``-net."""
    bad = find_net_violation(points, t)
    if bad is not None:
        log.debug("net property fails at t=%d: EI(ell=%s, a=%s)", t, bad.ell, bad.a)
        return False
    return True


def minimal_t(points: np.ndarray) -> int:
    points = np.asarray(points, dtype=np.uint64)
    if points.ndim == 1:
        points = points[:, None]
    m = _log2_size(points)
    for t in range(m + 1):
        if verify_net(points, t):
            return t
    return m
