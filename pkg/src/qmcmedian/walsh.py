"""Walsh analysis of base-2 digital nets.

Parities are computed on 64-bit fraction words, so ``wal``, ``Z`` and ``S``
are exact.  A multi-index ``k`` is stored per dimension as the integer
``k_j`` itself, whose set bits (bit ``l-1`` for digit ``l``) form the bit set
``kappa_j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np
from numpy.polynomial import polynomial as P

from .gf2 import WORD_BITS, DomainError, parity, reverse_bits
from .nets import NetDefinition, generate_pointset

_U64 = np.uint64
GRID_BUDGET = 10**7


@dataclass(frozen=True)
class WalshIndex:
    """Multi-index ``k`` in N_0^s."""

    k: tuple[int, ...]

    def __post_init__(self):
        ks = tuple(int(v) for v in self.k)
        for v in ks:
            if not 0 <= v < (1 << WORD_BITS):
                raise DomainError(f"index component {v} does not fit 64 digits")
        object.__setattr__(self, "k", ks)

    @classmethod
    def of(cls, *k: int) -> "WalshIndex":
        return cls(tuple(k))

    @classmethod
    def from_kappas(cls, kappas: Iterable[Iterable[int]]) -> "WalshIndex":
        return cls(tuple(k_from_kappa(kap) for kap in kappas))

    @property
    def s(self) -> int:
        return len(self.k)

    def kappa(self, j: int) -> frozenset[int]:
        return kappa_of(self.k[j])

    def is_zero(self) -> bool:
        return not any(self.k)

    def max_digit(self) -> int:
        return max((v.bit_length() for v in self.k), default=0)

    def masks(self) -> np.ndarray:
        """Fraction-word masks selecting the digits in each ``kappa_j``."""
        return np.array([reverse_bits(v) for v in self.k], dtype=_U64)


# ------------------------------------------------------------ bit sets


def kappa_of(k: int) -> frozenset[int]:
    return frozenset(l + 1 for l in range(k.bit_length()) if (k >> l) & 1)


def k_from_kappa(kappa: Iterable[int]) -> int:
    k = 0
    for l in kappa:
        if l < 1:
            raise DomainError(f"digit positions start at 1, got {l}")
        k |= 1 << (l - 1)
    return k


def ceil_k(kappa: Iterable[int], q: int) -> int:
    """``q``-th largest element of ``kappa``; 0 when ``q > |kappa|``."""
    ordered = sorted(kappa, reverse=True)
    return ordered[q - 1] if 1 <= q <= len(ordered) else 0


def largest_bits(kappa: Iterable[int], q: int) -> frozenset[int]:
    """The ``q`` largest elements of ``kappa`` (all of it if ``q >= |kappa|``)."""
    return frozenset(sorted(kappa, reverse=True)[: max(q, 0)])


def ceil_vector(k: WalshIndex, q: int) -> tuple[int, ...]:
    return tuple(ceil_k(k.kappa(j), q) for j in range(k.s))


# ------------------------------------------------------ Walsh functions


def wal(k: WalshIndex, x) -> np.ndarray:
    """``wal_k`` at fraction-word points ``x`` of shape ``(s,)`` or ``(n, s)``."""
    x = np.asarray(x, dtype=_U64)
    if x.shape[-1] != k.s:
        raise DomainError(f"index has {k.s} components, points have {x.shape[-1]}")
    par = np.bitwise_xor.reduce(parity(x & k.masks()), axis=-1)
    return 1 - 2 * par.astype(np.int8)


def dual_parities(k: WalshIndex, columns: np.ndarray) -> np.ndarray:
    """Bits of ``sum_j k_j^T C_j`` for column arrays of shape ``(..., s, m)``."""
    masks = k.masks()[:, None]
    return np.bitwise_xor.reduce(parity(columns & masks), axis=-2)


def Z(k: WalshIndex, net: NetDefinition) -> int:
    """1 if ``sum_j k_j^T C_j = 0`` over GF(2), else 0."""
    if net.s != k.s:
        raise DomainError(f"index has {k.s} components, net has {net.s}")
    return int(not dual_parities(k, net.columns).any())


def Z_batch(k: WalshIndex, columns: np.ndarray) -> np.ndarray:
    """``Z`` for a stack of nets given as columns of shape ``(N, s, m)``."""
    return (~dual_parities(k, columns).any(axis=-1)).astype(np.uint8)


def S(k: WalshIndex, shifts) -> int | np.ndarray:
    """``(-1)^(sum_j k_j^T D_j)`` for shifts of shape ``(s,)`` or ``(N, s)``."""
    shifts = np.asarray(shifts, dtype=_U64)
    par = np.bitwise_xor.reduce(parity(shifts & k.masks()), axis=-1)
    sign = 1 - 2 * par.astype(np.int64)
    return int(sign) if sign.ndim == 0 else sign


def midpoint_grid(level: int, s: int) -> np.ndarray:
    """Words of the cell midpoints of the dyadic grid with ``2**level`` cells per axis."""
    if level < 0 or level >= WORD_BITS:
        raise DomainError(f"grid level {level} outside [0, 63]")
    if (1 << (level * s)) > GRID_BUDGET:
        raise DomainError(f"grid of 2**{level * s} cells exceeds budget {GRID_BUDGET}")
    axis = ((2 * np.arange(1 << level, dtype=_U64) + _U64(1)) << _U64(WORD_BITS - 1 - level))
    mesh = np.meshgrid(*([axis] * s), indexing="ij")
    return np.stack([g.reshape(-1) for g in mesh], axis=-1)


def walsh_coefficient(f: Callable[[np.ndarray], np.ndarray], k: WalshIndex, level: int) -> float:
    """Midpoint-rule ``int f wal_k`` on the level-``level`` dyadic grid.

    ``f`` takes float points of shape ``(n, s)``.  Exact whenever ``f`` is
    constant on the grid cells.
    """
    if k.max_digit() > level:
        raise DomainError(f"grid level {level} below the index's top digit {k.max_digit()}")
    words = midpoint_grid(level, k.s)
    x = words.astype(np.float64) * 2.0**-WORD_BITS
    return float(np.mean(np.asarray(f(x), dtype=np.float64) * wal(k, words)))


# ------------------------------------------------------ Walsh polynomials


class WalshPolynomial:
    """Finite Walsh sum ``sum_k c_k wal_k``."""

    def __init__(self, coeffs: Mapping[WalshIndex, float]):
        self.coeffs = {k: float(c) for k, c in coeffs.items()}
        dims = {k.s for k in self.coeffs}
        if len(dims) > 1:
            raise DomainError("mixed index dimensions")
        self.s = dims.pop() if dims else 0

    def __call__(self, words) -> np.ndarray:
        words = np.asarray(words, dtype=_U64)
        out = np.zeros(words.shape[:-1])
        for k, c in self.coeffs.items():
            out += c * wal(k, words)
        return out

    def on_floats(self, x: np.ndarray) -> np.ndarray:
        """Evaluate at float points, reading their dyadic digits exactly."""
        x = np.asarray(x, dtype=np.float64)
        hi = np.floor(x * 2.0**32)
        lo = np.floor((x * 2.0**32 - hi) * 2.0**32)
        words = (hi.astype(_U64) << _U64(32)) | lo.astype(_U64)
        return self(words)

    @property
    def mean(self) -> float:
        return sum(c for k, c in self.coeffs.items() if k.is_zero())

    def l1(self) -> float:
        return sum(abs(c) for c in self.coeffs.values())

    def perturbed(self, k: WalshIndex, delta: float) -> "WalshPolynomial":
        out = dict(self.coeffs)
        out[k] = out.get(k, 0.0) + delta
        return WalshPolynomial(out)


def random_walsh_polynomial(s: int, terms: int, max_digit: int, rng: np.random.Generator) -> WalshPolynomial:
    coeffs: dict[WalshIndex, float] = {}
    while len(coeffs) < terms:
        k = WalshIndex(tuple(int(v) for v in rng.integers(0, 1 << max_digit, size=s)))
        coeffs[k] = float(rng.normal())
    return WalshPolynomial(coeffs)


def error_decomposition_check(
    poly: WalshPolynomial,
    net: NetDefinition,
    coeffs: Mapping[WalshIndex, float] | None = None,
) -> tuple[float, float]:
    """``(mean over net - integral, sum_k Z(k) S(k) c_k)`` for a finite Walsh sum.

    ``coeffs`` overrides the coefficients used on the right-hand side (the
    harness uses it to inject a deliberate mismatch).
    """
    pts = generate_pointset(net)
    lhs = float(np.mean(poly(pts))) - poly.mean
    coeffs = poly.coeffs if coeffs is None else coeffs
    rhs = 0.0
    for k, c in coeffs.items():
        if not k.is_zero():
            rhs += Z(k, net) * S(k, net.shifts) * c
    return lhs, rhs


# ---------------------------------------------------------- W kernels

KERNEL_MAX_SIZE = 8
KERNEL_MAX_LEVEL = 20


class WKernel:
    """Iterated-integral kernel ``W_kappa`` on [0, 1).

    ``W_{}`` is 1 and ``W_kappa(x)`` integrates ``(-1)^(digit min(kappa) of t)
    W_{kappa - min(kappa)}(t)`` over ``[0, x]``.  The result is a polynomial of
    degree ``|kappa|`` on each dyadic cell of level ``max(kappa)``; it is
    stored per cell in the local coordinate ``w in [0, 1]``.
    """

    def __init__(self, kappa: Iterable[int]):
        self.kappa = frozenset(int(l) for l in kappa)
        if len(self.kappa) > KERNEL_MAX_SIZE:
            raise DomainError(f"|kappa| = {len(self.kappa)} exceeds {KERNEL_MAX_SIZE}")
        if any(l < 1 for l in self.kappa):
            raise DomainError("kappa elements start at 1")
        self.level = max(self.kappa, default=0)
        if self.level > KERNEL_MAX_LEVEL:
            raise DomainError(f"max(kappa) = {self.level} exceeds {KERNEL_MAX_LEVEL}")
        ncell = 1 << self.level
        h = 2.0**-self.level
        cells = np.arange(ncell)
        coef = np.ones((ncell, 1))
        for l in sorted(self.kappa, reverse=True):
            sign = 1.0 - 2.0 * ((cells >> (self.level - l)) & 1)
            prim = h * np.array([P.polyint(c) for c in coef])
            totals = sign * prim.sum(axis=1)
            offset = np.concatenate([[0.0], np.cumsum(totals)[:-1]])
            coef = sign[:, None] * prim
            coef[:, 0] += offset
        self.coef = coef

    def __call__(self, x) -> np.ndarray:
        """Evaluate at fraction words."""
        x = np.asarray(x, dtype=_U64)
        if self.level == 0:
            return np.ones(x.shape)
        shift = _U64(WORD_BITS - self.level)
        cell = (x >> shift).astype(np.int64)
        w = (x & ((_U64(1) << shift) - _U64(1))).astype(np.float64) * 2.0 ** -(WORD_BITS - self.level)
        c = self.coef[cell]
        out = c[..., -1]
        for j in range(c.shape[-1] - 2, -1, -1):
            out = out * w + c[..., j]
        return out

    def at(self, x) -> np.ndarray:
        """Evaluate at floats in [0, 1)."""
        x = np.asarray(x, dtype=np.float64)
        cell = np.minimum(np.floor(x * 2.0**self.level).astype(np.int64), (1 << self.level) - 1)
        w = x * 2.0**self.level - cell
        c = self.coef[cell]
        out = c[..., -1]
        for j in range(c.shape[-1] - 2, -1, -1):
            out = out * w + c[..., j]
        return out

    @property
    def period(self) -> float:
        return 2.0 ** -(min(self.kappa) - 1) if self.kappa else 0.0


def W_kernel(kappa: Iterable[int], x) -> np.ndarray:
    return WKernel(kappa)(x)


def kernel_integral_closed_form(kappa: Iterable[int]) -> float:
    return float(np.prod([2.0 ** (-l - 1) for l in kappa]))


def kernel_max_closed_form(kappa: Iterable[int]) -> float:
    kappa = list(kappa)
    return 2.0 * kernel_integral_closed_form(kappa) if kappa else 1.0


def gauss_cells(g: Callable[[np.ndarray], np.ndarray], level: int, nodes: int) -> float:
    """Gauss-Legendre rule with ``nodes`` points on every level-``level`` dyadic cell."""
    t, wt = np.polynomial.legendre.leggauss(nodes)
    h = 2.0**-level
    left = np.arange(1 << level) * h
    x = left[:, None] + (t[None, :] + 1.0) * (h / 2)
    return float(np.sum(g(x) * wt[None, :]) * h / 2)


def walsh_coefficient_by_parts(
    deriv: Callable[[np.ndarray], np.ndarray],
    kappa: Iterable[int],
    alpha: int,
    nodes: int = 8,
) -> float:
    """One-dimensional ``f^(k)`` from the ``alpha``-th derivative of ``f``:

    ``(-1)^alpha int f^(alpha) wal_{kappa minus top alpha} W_{top alpha}``.
    Needs ``|kappa| >= alpha``; supported for ``alpha <= 2``.
    """
    kappa = frozenset(kappa)
    if not 0 <= alpha <= 2:
        raise DomainError("only alpha in {0, 1, 2} is supported")
    if len(kappa) < alpha:
        raise DomainError(f"|kappa| = {len(kappa)} < alpha = {alpha}")
    top = largest_bits(kappa, alpha)
    rest = kappa - top
    ker = WKernel(top)
    level = max(kappa, default=0)

    def integrand(x):
        digits = np.floor(x * 2.0**level).astype(np.int64)
        sign = np.ones_like(x)
        for l in rest:
            sign *= 1 - 2 * ((digits >> (level - l)) & 1)
        return deriv(x) * sign * ker.at(x)

    return (-1) ** alpha * gauss_cells(integrand, level, nodes)
