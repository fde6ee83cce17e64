import math

import numpy as np
import pytest
from scipy import integrate

from qmcmedian import estimate, testfns
from qmcmedian.testfns import ConfigError, Integrand


@pytest.mark.parametrize("a", [1, 2, 3])
def test_f_alpha_values_and_mean(a):
    f = testfns.f_alpha_star(a)
    assert f(np.array([0.0]))[0] == 1.0
    assert f(np.array([1.0 / 3.0]))[0] == 0.0
    assert f(np.array([1.0]))[0] == 1.0
    g = lambda x: f(np.array([x]))[0]
    quad = integrate.quad(g, 0, 1 / 3, epsabs=1e-14)[0] + integrate.quad(g, 1 / 3, 1, epsabs=1e-14)[0]
    assert abs(quad - f.exact_mean) < 1e-12
    assert f.exact_mean == 1 / (a + 1)


@pytest.mark.parametrize("a", [1, 2, 3])
def test_f_alpha_continuous_at_kink(a):
    f = testfns.f_alpha_star(a)
    eps = 1e-9
    left, right = f(np.array([1 / 3 - eps, 1 / 3 + eps]))
    assert abs(left) < 1e-8 and abs(right) < 1e-8


def test_f_alpha_rejects_other_orders():
    for bad in (0, 4, 1.5):
        with pytest.raises(ConfigError):
            testfns.f_alpha_star(bad)


@pytest.mark.parametrize("c", [0.5, 1.5, 2.5])
def test_f_c_mean_by_product_rule(c):
    f = testfns.f_c(c)
    weights = np.exp(-math.ceil(c) * np.arange(1, 21))
    # x = t^2 removes the endpoint singularity of d/dx x^c
    moment = integrate.quad(lambda t: 2 * t ** (2 * c + 1), 0, 1)[0]
    factors = 1 + weights * (moment - 1 / (1 + c))
    assert abs(np.prod(factors) - f.exact_mean) < 1e-12


def test_f_c_mean_by_monte_carlo(make_rng):
    f = testfns.f_c(0.5)
    g = make_rng("mc")
    vals = np.concatenate([f(g.random((100_000, 20))) for _ in range(10)])
    se = vals.std(ddof=1) / np.sqrt(vals.size)
    assert abs(vals.mean() - 1.0) < 3 * se


def test_f_c_special_points():
    f = testfns.f_c(0.5)
    expect = np.prod(1 - (2 / 3) * np.exp(-np.arange(1, 21)))
    assert abs(f(np.zeros((1, 20)))[0] - expect) < 1e-15
    for c in (0.5, 1.5, 2.5):
        x = np.full((1, 20), (1 / (1 + c)) ** (1 / c))
        assert abs(testfns.f_c(c)(x)[0] - 1.0) < 1e-14


def test_f_c_rejects_nonpositive():
    with pytest.raises(ConfigError):
        testfns.f_c(0.0)


def test_I_c():
    assert abs(testfns.I_c(0.5) - 1 / 18) < 1e-15
    assert abs(testfns.I_c(1.0) - 1 / 12) < 1e-15
    assert testfns.I_c(1e-8) < 1e-15
    for c in (0.5, 1.5, 2.5):
        q = integrate.quad(lambda x: (x**c - 1 / (1 + c)) ** 2, 0, 1, epsabs=1e-15)[0]
        assert abs(q - testfns.I_c(c)) < 1e-12


def test_mean_dimension_reference_values():
    for c, excess in ((0.5, 1.04e-3), (1.5, 3.02e-5), (2.5, 5.22e-7)):
        got = testfns.mean_dimension(c, 20) - 1
        assert float(f"{got:.2e}") == excess


def test_mean_dimension_single_variable():
    assert testfns.mean_dimension(0.5, 1) == 1.0


@pytest.mark.parametrize("s", [2, 5, 12])
def test_mean_dimension_matches_enumeration(s):
    for c in (0.5, 1.5, 2.5):
        a, b = testfns.mean_dimension(c, s), testfns.mean_dimension_bruteforce(c, s)
        assert abs(a - b) < 1e-12 * b


def test_mean_dimension_decreasing_in_c():
    vals = [testfns.mean_dimension(c, 20) for c in (0.5, 1.5, 2.5)]
    assert vals[0] > vals[1] > vals[2] >= 1.0


def test_mean_dimension_domain():
    with pytest.raises(ConfigError):
        testfns.mean_dimension(0.5, 65)


def test_registry_roundtrip():
    reg = testfns.Registry()
    ident = Integrand("identity", 1, lambda x: x[:, 0], 0.5)
    reg.register(ident)
    assert "identity" in reg.ids()
    assert reg.get("identity") is ident
    with pytest.raises(ConfigError):
        reg.register(ident)
    with pytest.raises(ConfigError):
        reg.get("nope")


def test_builtin_registry():
    assert {"falpha", "fc"} <= set(testfns.REGISTRY.ids())
    assert testfns.get("falpha", "2").exact_mean == 1 / 3
    assert testfns.get("fc", 1.5, s=5).s == 5


def test_custom_integrand_through_rmse_study():
    ident = Integrand("identity", 1, lambda x: x[:, 0], 0.5)
    recs = estimate.rmse_study(["median-rls"], ident, [3, 4], trials=3, seed=1)
    assert [r.m for r in recs] == [3, 4]
    assert all(0 <= r.rmse < 0.1 for r in recs)
    no_mean = Integrand("identity", 1, lambda x: x[:, 0])
    with pytest.raises(ConfigError):
        estimate.rmse_study(["median-rls"], no_mean, [3], trials=3, seed=1)
    assert estimate.rmse_study(["median-rls"], no_mean, [3], trials=3, seed=1, mu=0.5)[0].rmse >= 0
