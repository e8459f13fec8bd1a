import math

import numpy as np
import pytest
from scipy import integrate

from bernstein.errors import QuadratureError
from bernstein.quadrature import adaptive_integrate, cumulative_gauss, integrate_power_origin


@pytest.mark.parametrize(
    "f,a,b",
    [
        (np.exp, 0.0, 3.0),
        (lambda x: np.exp(-x**2), -5.0, 5.0),
        (lambda x: 1 / (1 + 25 * x**2), -1.0, 1.0),
        (lambda x: np.sin(40 * x) ** 2, 0.0, 2.0),
        (lambda x: x**6 * np.exp(-x), 0.0, 60.0),
    ],
)
def test_adaptive_against_quadpack(f, a, b):
    ref, _ = integrate.quad(f, a, b, epsabs=1e-14, epsrel=1e-13, limit=500)
    got, err = adaptive_integrate(f, a, b)
    assert got == pytest.approx(ref, rel=1e-12, abs=1e-13)
    assert err < 1e-10


def test_breakpoints_help_with_kinks():
    got, _ = adaptive_integrate(lambda x: np.abs(x - 0.3), 0.0, 1.0, breakpoints=[0.3])
    assert got == pytest.approx(0.3**2 / 2 + 0.7**2 / 2, rel=1e-14)


def test_empty_interval():
    assert adaptive_integrate(np.exp, 1.0, 1.0) == (0.0, 0.0)


def test_non_finite_integrand_raises():
    with pytest.raises(QuadratureError):
        adaptive_integrate(lambda x: np.full_like(x, np.inf), 0.0, 1.0)


@pytest.mark.parametrize("a", [-0.75, -0.5, 0.3, 2.4])
def test_power_origin_panel(a):
    # int_0^eps x^a e^{-x} dx = lower incomplete gamma
    from scipy.special import gammainc

    eps = 0.7
    got = integrate_power_origin(lambda x: np.exp(-x), eps, a)
    ref = gammainc(a + 1, eps) * math.gamma(a + 1)
    assert got == pytest.approx(ref, rel=1e-13)


def test_power_origin_rejects_nonintegrable():
    with pytest.raises(QuadratureError):
        integrate_power_origin(np.exp, 1.0, -1.0)


def test_cumulative_gauss_sums_to_total():
    edges = np.linspace(0, 2, 101)
    parts = cumulative_gauss(np.cos, edges)
    assert parts.shape == (100,)
    assert parts.sum() == pytest.approx(math.sin(2.0), rel=1e-15)
