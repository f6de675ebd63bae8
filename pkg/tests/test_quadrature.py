import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polyboltz import QuadratureSpec, integrate, monte_carlo
from polyboltz.errors import ParameterError, QuadratureError
from polyboltz.quadrature import NodeSet, build_rule, half_range, hermite, jacobi01, laguerre, sphere, tensor


def test_hermite_constant():
    x, w = hermite(10)
    assert np.sum(w) == pytest.approx(np.sqrt(np.pi), abs=1e-12)


def test_laguerre_first_moment():
    x, w = laguerre(5)
    assert np.sum(w * x) == pytest.approx(1.0, abs=1e-12)


def test_sphere_area():
    rule = sphere(4, 8)
    assert np.sum(rule.weights) == pytest.approx(4 * np.pi, rel=1e-14)
    res = integrate(rule, lambda p: np.ones(len(p)))
    assert res.value == pytest.approx(4 * np.pi, rel=1e-14)


def test_gaussian_second_moment_and_mc():
    spec = QuadratureSpec(hermite_order=8)
    rule = build_rule(spec, "velocity3")
    # weight exp(-|x|^2); substitute xi = sqrt(2) x for the normalized Gaussian
    val = integrate(rule, lambda p: 2 * np.sum(p * p, axis=1) / np.pi**1.5).value
    assert val == pytest.approx(3.0, rel=1e-13)

    def sampler(rng, k):
        x = rng.standard_normal((k, 3))
        return x, np.exp(-0.5 * np.sum(x * x, axis=1)) / (2 * np.pi) ** 1.5

    def integrand(x):
        return np.sum(x * x, axis=1) * np.exp(-0.5 * np.sum(x * x, axis=1)) / (2 * np.pi) ** 1.5

    mc = monte_carlo(integrand, sampler, 1_000_000, seed=7)
    assert abs(mc.value - val) <= 3 * mc.error


def test_monte_carlo_is_reproducible():
    def sampler(rng, k):
        return rng.random((k, 1)), np.ones(k)

    a = monte_carlo(lambda x: x[:, 0] ** 2, sampler, 10_000, seed=3)
    b = monte_carlo(lambda x: x[:, 0] ** 2, sampler, 10_000, seed=3)
    assert a.value == b.value and a.error == b.error


@given(st.integers(1, 8), st.floats(0.0, 3.0), st.floats(0.0, 3.0))
@settings(max_examples=40, deadline=None)
def test_jacobi_exactness(n, a, b):
    # weight x^a (1-x)^b on [0,1]; degree 0 and 1 moments are Beta functions
    from scipy.special import beta
    x, w = jacobi01(n, a, b)
    assert np.sum(w) == pytest.approx(beta(a + 1, b + 1), rel=1e-11)
    assert np.sum(w * x) == pytest.approx(beta(a + 2, b + 1), rel=1e-11)


@pytest.mark.parametrize("k", [0, 1, 3, 5, 7])
def test_half_range_odd_and_even_powers(k):
    from scipy.special import gamma
    x, w = half_range(12, 2.0)
    # weight s^2 exp(-s^2) on [0, inf): integral of s^k is Gamma((k+3)/2)/2
    assert np.sum(w * x**k) == pytest.approx(0.5 * gamma((k + 3) / 2), rel=1e-11)


def test_tensor_and_labels():
    a = NodeSet(np.array([0.0, 1.0]), np.array([1.0, 2.0]), ("u",))
    b = NodeSet(np.array([5.0, 6.0, 7.0]), np.array([1.0, 1.0, 1.0]), ("v",))
    t = tensor(a, b)
    assert len(t) == 6 and t.labels == ("u", "v")
    assert np.sum(t.weights) == pytest.approx(9.0)


def test_nonfinite_integrand_reports_node():
    rule = sphere(2, 2)
    with pytest.raises(QuadratureError, match="node"):
        integrate(rule, lambda p: np.full(len(p), np.nan))


def test_spec_validation():
    with pytest.raises(ParameterError):
        QuadratureSpec(hermite_order=0)
    with pytest.raises(ParameterError):
        QuadratureSpec(velocity_scale=-1.0)
