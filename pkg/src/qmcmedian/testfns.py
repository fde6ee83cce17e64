"""Test integrands with exact means, and a registry for custom ones."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class ConfigError(ValueError):
    """Unknown or invalid integrand configuration."""


@dataclass(frozen=True)
class Integrand:
    """Vectorized integrand on [0, 1]^s: ``func`` maps ``(n, s)`` floats to ``(n,)``."""

    id: str
    s: int
    func: Callable[[np.ndarray], np.ndarray]
    exact_mean: float | None = None
    params: dict = field(default_factory=dict)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None] if self.s == 1 else x[None, :]
        return self.func(x)


def f_alpha_star(alpha_star: int) -> Integrand:
    """Kinked one-dimensional test function; ``(1-3x)^a`` left of 1/3, ``2^-a (3x-1)^a`` right."""
    if alpha_star not in (1, 2, 3):
        raise ConfigError(f"alpha* must be 1, 2 or 3, got {alpha_star!r}")
    a = int(alpha_star)
    scale = 2.0**-a

    def f(x):
        x = x[:, 0]
        return np.where(x <= 1.0 / 3.0, (1.0 - 3.0 * x) ** a, scale * (3.0 * x - 1.0) ** a)

    return Integrand("falpha", 1, f, 1.0 / (a + 1), {"alpha_star": a})


def _pow(x: np.ndarray, c: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.where(x > 0, np.exp(c * np.log(np.where(x > 0, x, 1.0))), 0.0)


def f_c(c: float, s: int = 20) -> Integrand:
    """Product of ``1 + e^(-ceil(c) j) (x_j^c - 1/(1+c))`` over ``j = 1..s``; mean 1."""
    if c <= 0:
        raise ConfigError(f"c must be positive, got {c}")
    weights = np.exp(-math.ceil(c) * np.arange(1, s + 1))
    centre = 1.0 / (1.0 + c)

    def f(x):
        return np.prod(1.0 + weights * (_pow(x, c) - centre), axis=1)

    return Integrand("fc", s, f, 1.0, {"c": c})


def I_c(c: float) -> float:
    """Variance ``int (x^c - 1/(1+c))^2 dx`` of ``x^c`` under U(0, 1)."""
    return c * c / ((1 + c) ** 2 * (1 + 2 * c))


def anova_weights(c: float, s: int) -> np.ndarray:
    return I_c(c) * np.exp(-2 * math.ceil(c) * np.arange(1, s + 1))


def mean_dimension(c: float, s: int) -> float:
    """Mean dimension of ``f_c`` via the product-form identity (O(s))."""
    if not 1 <= s <= 64:
        raise ConfigError(f"s={s} outside [1, 64]")
    w = anova_weights(c, s)
    # sum_u |u| prod_u w = prod(1+w) * sum w/(1+w); total variance is prod(1+w) - 1
    log_prod = np.sum(np.log1p(w))
    return float(np.exp(log_prod) * np.sum(w / (1 + w)) / np.expm1(log_prod))


def mean_dimension_bruteforce(c: float, s: int) -> float:
    w = anova_weights(c, s)
    num = 0.0
    den = 0.0
    for mask in range(1, 1 << s):
        prod = 1.0
        size = 0
        for j in range(s):
            if (mask >> j) & 1:
                prod *= w[j]
                size += 1
        num += size * prod
        den += prod
    return num / den


# --------------------------------------------------------------- registry


class Registry:
    def __init__(self):
        self._entries: dict[str, Callable[..., Integrand] | Integrand] = {}

    def register(self, item: Integrand | Callable[..., Integrand], name: str | None = None) -> None:
        key = name or getattr(item, "id", None)
        if not key:
            raise ConfigError("integrand needs an id")
        if key in self._entries:
            raise ConfigError(f"integrand id {key!r} already registered")
        self._entries[key] = item

    def ids(self) -> list[str]:
        return sorted(self._entries)

    def get(self, key: str, param=None, **kw) -> Integrand:
        try:
            item = self._entries[key]
        except KeyError:
            raise ConfigError(f"unknown integrand {key!r}; known: {', '.join(self.ids())}") from None
        if isinstance(item, Integrand):
            return item
        return item(param, **kw) if param is not None else item(**kw)


def _falpha_factory(param=1, **_):
    return f_alpha_star(int(float(param)))


def _fc_factory(param=0.5, s=20, **_):
    return f_c(float(param), s=int(s))


REGISTRY = Registry()
REGISTRY.register(_falpha_factory, "falpha")
REGISTRY.register(_fc_factory, "fc")


def register(custom: Integrand) -> None:
    REGISTRY.register(custom)


def get(key: str, param=None, **kw) -> Integrand:
    return REGISTRY.get(key, param, **kw)
