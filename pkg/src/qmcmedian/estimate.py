"""Estimators over randomized nets and the RMSE measurement harness."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from . import rng as rngmod
from .gf2 import DomainError
from .interlace import higher_order_pointset
from .nets import NetDefinition, SobolDirections, default_directions_path, generate_pointset, load_joe_kuo, sobol_net, to_unit
from .randomize import completely_random_design, linear_scramble
from .testfns import ConfigError, Integrand

MEDIAN_METHODS = ("median-crd", "median-rls")
ORDER_METHODS = {"dn1": 1, "dn2": 2, "dn3": 3}
METHODS = MEDIAN_METHODS + tuple(ORDER_METHODS)


class EvaluationError(ArithmeticError):
    """Integrand returned a non-finite value."""


@dataclass(frozen=True)
class EstimatorConfig:
    method: str
    m: int
    s: int
    seed: int
    r: int | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if self.m < 0:
            raise ConfigError(f"m={self.m} < 0")
        if self.r is not None and self.r < 1:
            raise ConfigError(f"r={self.r} < 1")

    @property
    def replicates(self) -> int:
        """Independent point sets per estimate: ``2r-1`` medians, ``2m-1`` averaged runs."""
        if self.method in MEDIAN_METHODS:
            r = self.m if self.r is None else self.r
            return 2 * max(r, 1) - 1
        return max(2 * self.m - 1, 1)

    @property
    def evaluations(self) -> int:
        return self.replicates << self.m


@dataclass(frozen=True)
class RmseRecord:
    method: str
    function: str
    param: str
    m: int
    n: int
    trials: int
    rmse: float
    seconds: float = 0.0


def sample_mean(points: np.ndarray, f: Callable[[np.ndarray], np.ndarray]) -> float:
    """Average of ``f`` over float points ``(n, s)``; numpy's pairwise summation."""
    points = np.asarray(points, dtype=np.float64)
    if points.shape[0] == 0:
        raise DomainError("empty point set")
    vals = np.asarray(f(points), dtype=np.float64)
    bad = np.flatnonzero(~np.isfinite(vals))
    if bad.size:
        i = int(bad[0])
        raise EvaluationError(f"integrand returned {vals[i]} at point {i}: {points[i].tolist()}")
    return float(np.sum(vals) / vals.shape[0])


def median_of(values: Sequence[float]) -> float:
    """Exact middle order statistic of an odd-length sample."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    if v.size % 2 == 0:
        raise DomainError("median of an even-length sample is not a single order statistic")
    return float(v[v.size // 2])


def quantile_estimate(values: Sequence[float], q: float) -> float:
    """Order statistic at 1-based rank ``ceil(q * len)``, no interpolation."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    if v.size == 0:
        raise DomainError("quantile of an empty sample")
    if not 0 < q < 1:
        raise DomainError(f"q={q} outside (0, 1)")
    rank = max(math.ceil(q * v.size), 1)
    return float(v[rank - 1])


@lru_cache(maxsize=None)
def _cached_sobol(s: int, m: int, path: str) -> NetDefinition:
    return sobol_net(s, m, _cached_directions(path))


@lru_cache(maxsize=None)
def _cached_directions(path: str) -> SobolDirections:
    return load_joe_kuo(path)


def _base_net(s: int, m: int, directions: SobolDirections | None) -> NetDefinition:
    if directions is None:
        return _cached_sobol(s, m, str(default_directions_path()))
    return sobol_net(s, m, directions)


def replicate_points(
    method: str,
    s: int,
    m: int,
    rng: np.random.Generator,
    directions: SobolDirections | None = None,
) -> np.ndarray:
    """Fraction words of one randomized point set for ``method``."""
    if method == "median-crd":
        net = completely_random_design(s, m, rng)
    elif method == "median-rls":
        net = linear_scramble(_base_net(s, m, directions), rng)
    elif method in ORDER_METHODS:
        return higher_order_pointset(ORDER_METHODS[method], s, m, rng, directions)
    else:
        raise ConfigError(f"unknown method {method!r}")
    return generate_pointset(net)


def replicate_means(cfg: EstimatorConfig, f: Callable, trial: int = 0, directions=None) -> np.ndarray:
    out = np.empty(cfg.replicates)
    for rep in range(cfg.replicates):
        g = rngmod.stream(cfg.seed, cfg.method, cfg.m, trial, rep)
        out[rep] = sample_mean(to_unit(replicate_points(cfg.method, cfg.s, cfg.m, g, directions)), f)
    return out


def median_estimate(cfg: EstimatorConfig, f: Callable, trial: int = 0, directions=None) -> float:
    """Median of ``2r-1`` independent randomized-net means."""
    if cfg.method not in MEDIAN_METHODS:
        raise ConfigError(f"{cfg.method} is not a median method")
    return median_of(replicate_means(cfg, f, trial, directions))


def estimate(cfg: EstimatorConfig, f: Callable, trial: int = 0, directions=None) -> float:
    """One estimate: the median for median methods, the mean of ``2m-1`` runs for order-d nets."""
    if cfg.method in MEDIAN_METHODS:
        return median_estimate(cfg, f, trial, directions)
    return float(np.mean(replicate_means(cfg, f, trial, directions)))


def rmse_study(
    methods: Iterable[str],
    f: Integrand,
    m_values: Iterable[int],
    trials: int,
    seed: int,
    mu: float | None = None,
    r: int | None = None,
    workers: int = 1,
    directions: SobolDirections | None = None,
    param: str = "",
) -> list[RmseRecord]:
    """RMSE per ``(method, m)`` over ``trials`` independent estimates.

    Every trial draws from its own labeled stream, so the output does not
    depend on ``workers`` or task order.
    """
    if trials < 2:
        raise ConfigError("rmse_study needs at least 2 trials")
    mu = f.exact_mean if mu is None else mu
    if mu is None:
        raise ConfigError(f"integrand {f.id!r} has no exact mean; supply a reference value")
    methods = list(methods)
    m_values = list(m_values)
    tasks = [(meth, m, t) for meth in methods for m in m_values for t in range(trials)]

    def run(task):
        meth, m, t = task
        start = time.perf_counter()
        est = estimate(EstimatorConfig(meth, m, f.s, seed, r), f, t, directions)
        return est, time.perf_counter() - start

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(task) for task in tasks]

    records = []
    for i, (meth, m) in enumerate((meth, m) for meth in methods for m in m_values):
        chunk = results[i * trials : (i + 1) * trials]
        err = np.array([est - mu for est, _ in chunk])
        records.append(
            RmseRecord(
                method=meth,
                function=f.id,
                param=param,
                m=m,
                n=1 << m,
                trials=trials,
                rmse=float(np.sqrt(np.mean(err * err))),
                seconds=float(sum(sec for _, sec in chunk)),
            )
        )
    return records


def slope_fit(records, window: tuple[int, int] | None = (6, 12)) -> float:
    """Least-squares slope of ``log2(rmse)`` against ``m``.

    ``records`` are ``RmseRecord`` rows of one method or ``(m, rmse)`` pairs.
    """
    pairs = [(r.m, r.rmse) if isinstance(r, RmseRecord) else (r[0], r[1]) for r in records]
    if window is not None:
        lo, hi = window
        pairs = [(m, e) for m, e in pairs if lo <= m <= hi]
    if len(pairs) < 4:
        raise DomainError(f"slope fit needs at least 4 points, got {len(pairs)}")
    m = np.array([p[0] for p in pairs], dtype=np.float64)
    e = np.array([p[1] for p in pairs], dtype=np.float64)
    if np.any(e <= 0):
        raise DomainError("rmse values must be positive for a log fit")
    y = np.log2(e)
    mc = m - m.mean()
    return float(np.dot(mc, y - y.mean()) / np.dot(mc, mc))
