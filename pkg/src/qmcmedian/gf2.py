"""Bit-level linear algebra over GF(2).

Two bit orders are in play and are kept strictly apart:

* ``BitVec`` is a digit vector with 1-based digits; digit ``l`` is stored at
  bit ``l - 1`` of the packed integer.  Index expansions use it directly
  (digit ``l`` of ``i`` has weight ``2**(l-1)``).
* ``BitMatrix`` columns are *fraction words*: row ``l`` lives at bit
  ``64 - l`` so that a column word, read as ``word * 2**-64``, is the
  fraction whose ``l``-th binary digit is the row-``l`` entry.  Matrix-vector
  products are then an XOR-fold of column words and produce point
  coordinates without any reshuffling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

WORD_BITS = 64
_WORD_MASK = (1 << WORD_BITS) - 1


class DomainError(ValueError):
    """Raised when an argument falls outside an operation's domain."""


def row_bit(row: int) -> int:
    """Word bit holding matrix row / fraction digit ``row`` (1-based)."""
    return 1 << (WORD_BITS - row)


def top_mask(rows: int) -> int:
    """Word mask covering fraction digits ``1..rows``."""
    if rows <= 0:
        return 0
    return (_WORD_MASK >> (WORD_BITS - rows)) << (WORD_BITS - rows)


@dataclass(frozen=True)
class BitVec:
    """Fixed-length vector over GF(2) with 1-based digit indexing."""

    length: int
    word: int = 0

    def __post_init__(self):
        if not 0 <= self.length <= WORD_BITS:
            raise DomainError(f"BitVec length {self.length} outside [0, 64]")
        if self.word < 0 or self.word >> self.length:
            raise DomainError("BitVec word has bits beyond its length")

    @classmethod
    def from_digits(cls, digits: Iterable[int]) -> "BitVec":
        digits = [int(b) for b in digits]
        word = 0
        for pos, b in enumerate(digits):
            if b not in (0, 1):
                raise DomainError(f"digit {b!r} is not binary")
            word |= b << pos
        return cls(len(digits), word)

    @classmethod
    def from_fraction_word(cls, word: int, length: int) -> "BitVec":
        """Digits ``1..length`` of a fraction word."""
        return cls.from_digits((word >> (WORD_BITS - l)) & 1 for l in range(1, length + 1))

    def to_fraction_word(self) -> int:
        w = 0
        for l in range(1, self.length + 1):
            if self[l]:
                w |= row_bit(l)
        return w

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, digit: int) -> int:
        if not 1 <= digit <= self.length:
            raise IndexError(f"digit {digit} outside 1..{self.length}")
        return (self.word >> (digit - 1)) & 1

    def digits(self) -> tuple[int, ...]:
        return tuple((self.word >> p) & 1 for p in range(self.length))

    def __xor__(self, other: "BitVec") -> "BitVec":
        return xor(self, other)


@dataclass(frozen=True)
class BitMatrix:
    """``rows x cols`` binary matrix stored as ``cols`` fraction words."""

    rows: int
    cols: int
    columns: tuple[int, ...]

    def __post_init__(self):
        if not 0 <= self.rows <= WORD_BITS:
            raise DomainError(f"BitMatrix rows {self.rows} outside [0, 64]")
        if len(self.columns) != self.cols:
            raise DomainError("column count does not match cols")
        spill = _WORD_MASK & ~top_mask(self.rows)
        for w in self.columns:
            if w < 0 or w > _WORD_MASK or w & spill:
                raise DomainError("column word has bits beyond the row count")

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(n, n, tuple(row_bit(c) for c in range(1, n + 1)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols, (0,) * cols)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "BitMatrix":
        nrows = len(rows)
        ncols = len(rows[0]) if nrows else 0
        cols = [0] * ncols
        for l, row in enumerate(rows, start=1):
            if len(row) != ncols:
                raise DomainError("ragged rows")
            for c, b in enumerate(row):
                if b:
                    cols[c] |= row_bit(l)
        return cls(nrows, ncols, tuple(cols))

    def entry(self, row: int, col: int) -> int:
        return (self.columns[col - 1] >> (WORD_BITS - row)) & 1

    def to_array(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.uint8)
        for c in range(1, self.cols + 1):
            for r in range(1, self.rows + 1):
                out[r - 1, c - 1] = self.entry(r, c)
        return out

    def column_words(self) -> np.ndarray:
        return np.array(self.columns, dtype=np.uint64)

    def __matmul__(self, other: "BitMatrix") -> "BitMatrix":
        return matmul(self, other)


def binary_expansion_of_index(i: int, m: int) -> BitVec:
    """Digits of ``i = sum_l i_l 2**(l-1)`` as a length-``m`` vector."""
    if not 1 <= m <= WORD_BITS:
        raise DomainError(f"m={m} outside [1, 64]")
    if not 0 <= i < (1 << m):
        raise DomainError(f"index {i} outside [0, 2**{m})")
    return BitVec(m, i)


def _fold(columns: Sequence[int], selector: int) -> int:
    acc = 0
    c = 0
    while selector:
        if selector & 1:
            acc ^= columns[c]
        selector >>= 1
        c += 1
    return acc


def matvec(C: BitMatrix, v: BitVec) -> BitVec:
    """``C v`` over GF(2): XOR of the columns picked by the set digits of ``v``."""
    if len(v) != C.cols:
        raise DomainError(f"vector length {len(v)} != matrix cols {C.cols}")
    return BitVec.from_fraction_word(_fold(C.columns, v.word), C.rows)


def matmul(A: BitMatrix, B: BitMatrix) -> BitMatrix:
    """``A B`` over GF(2)."""
    if A.cols != B.rows:
        raise DomainError(f"shape mismatch {A.rows}x{A.cols} @ {B.rows}x{B.cols}")
    cols = []
    for w in B.columns:
        sel = BitVec.from_fraction_word(w, B.rows).word
        cols.append(_fold(A.columns, sel))
    return BitMatrix(A.rows, B.cols, tuple(cols))


def xor(a: BitVec, b: BitVec) -> BitVec:
    if len(a) != len(b):
        raise DomainError(f"length mismatch {len(a)} vs {len(b)}")
    return BitVec(a.length, a.word ^ b.word)


def random_words(rows: int, count, rng: np.random.Generator) -> np.ndarray:
    """Uniform fraction words with only digits ``1..rows`` populated."""
    w = rng.integers(0, 1 << 64, size=count, dtype=np.uint64, endpoint=False)
    return w & np.uint64(top_mask(rows))


def random_matrix(rows: int, cols: int, rng: np.random.Generator) -> BitMatrix:
    """Matrix with i.i.d. uniform bits."""
    if not 0 <= rows <= WORD_BITS:
        raise DomainError(f"rows={rows} outside [0, 64]")
    words = random_words(rows, cols, rng)
    return BitMatrix(rows, cols, tuple(int(w) for w in words))


def lower_triangular_words(rows: int, cols: int, count, rng: np.random.Generator) -> np.ndarray:
    """Column words of random unit lower-triangular matrices.

    Output has shape ``count + (cols,)``; column ``c`` carries a one in
    row ``c``, zeros above and uniform bits in rows ``c+1..rows``.
    """
    if rows < cols:
        raise DomainError(f"lower-triangular needs rows >= cols, got {rows}x{cols}")
    if rows > WORD_BITS:
        raise DomainError(f"rows={rows} outside [0, 64]")
    count = () if count is None else ((count,) if np.isscalar(count) else tuple(count))
    raw = rng.integers(0, 1 << 64, size=count + (cols,), dtype=np.uint64, endpoint=False)
    c = range(1, cols + 1)
    below = np.array([top_mask(rows) & (row_bit(k) - 1) for k in c], dtype=np.uint64)
    diag = np.array([row_bit(k) for k in c], dtype=np.uint64)
    return (raw & below) | diag


def random_lower_triangular(rows: int, cols: int, rng: np.random.Generator) -> BitMatrix:
    words = lower_triangular_words(rows, cols, None, rng)
    return BitMatrix(rows, cols, tuple(int(w) for w in words))


def rank(M: BitMatrix) -> int:
    """Column rank by Gaussian elimination on the column words."""
    basis: dict[int, int] = {}
    for w in M.columns:
        while w:
            hi = w.bit_length() - 1
            if hi in basis:
                w ^= basis[hi]
            else:
                basis[hi] = w
                break
    return len(basis)


# numpy helpers shared by the vectorized paths

def parity(words: np.ndarray) -> np.ndarray:
    """Popcount parity of each uint64 word."""
    return (np.bitwise_count(words) & 1).astype(np.uint8)


def reverse_bits(k: int) -> int:
    """Map an index bit set (digit l at bit l-1) onto a fraction-word mask."""
    if k < 0 or k > _WORD_MASK:
        raise DomainError(f"index {k} does not fit 64 digits")
    return int(f"{k:064b}"[::-1], 2)
