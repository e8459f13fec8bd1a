import math

import numpy as np
import pytest
import scipy.special as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from bernstein.errors import ConvergenceError, DomainError
from bernstein.specfun import (
    SeriesPolicy,
    bessel_i,
    bessel_i_d1,
    bessel_i_d2,
    bessel_i_derivs,
    bessel_i_log_derivative,
    bessel_i_scaled,
    bessel_j,
    bessel_j_derivs,
    gamma,
    log_bessel_i,
    log_gamma,
)

mpmath = pytest.importorskip("mpmath")
mpmath.mp.dps = 40

NUS = [-0.9, -0.5, -0.3, 0.0, 0.2, 0.5, 0.7, 1.0, 2.5, 5.0, 12.0]
ZS = [1e-6, 1e-3, 0.1, 1.0, 5.0, 17.0, 29.9, 30.1, 45.0, 120.0, 700.0, 2000.0]


def _mp_i(nu, z):
    return mpmath.besseli(nu, z)


@pytest.mark.parametrize("nu", NUS)
def test_log_bessel_i_against_mpmath(nu):
    for z in ZS:
        ref = float(mpmath.log(_mp_i(nu, z)))
        got = log_bessel_i(nu, z)
        assert abs(got - ref) <= 2e-14 * max(1.0, abs(ref)), (nu, z)


@pytest.mark.parametrize("nu", NUS)
def test_derivatives_against_mpmath(nu):
    z = np.array([0.05, 0.8, 3.0, 11.0, 25.0, 40.0, 90.0])
    i0, i1, i2 = bessel_i_derivs(nu, z)
    for k, zk in enumerate(z):
        for got, order in ((i0[k], 0), (i1[k], 1), (i2[k], 2)):
            ref = float(mpmath.diff(lambda x: mpmath.besseli(nu, x), zk, order))
            assert got == pytest.approx(ref, rel=5e-14, abs=1e-300), (nu, zk, order)


def test_scaled_matches_scipy_ive():
    z = np.geomspace(1e-4, 1e4, 60)
    for nu in (-0.7, 0.0, 0.5, 3.3):
        assert np.allclose(bessel_i_scaled(nu, z), sp.ive(nu, z), rtol=5e-14, atol=0)


def test_half_integer_closed_forms():
    z = np.geomspace(1e-3, 25.0, 40)
    c = np.sqrt(2.0 / (np.pi * z))
    assert np.allclose(bessel_i(0.5, z), c * np.sinh(z), rtol=3e-15)
    assert np.allclose(bessel_i(-0.5, z), c * np.cosh(z), rtol=3e-15)
    assert np.allclose(bessel_i(1.5, z), c * (np.cosh(z) - np.sinh(z) / z), rtol=1e-12)
    assert np.allclose(bessel_j(0.5, z), c * np.sin(z), rtol=1e-13, atol=1e-16)


def test_values_at_zero():
    assert bessel_i(0.0, 0.0) == 1.0
    assert bessel_i(1.7, 0.0) == 0.0
    assert bessel_i(-0.5, 0.0) == math.inf


def test_large_argument_log_stays_finite():
    ref = float(mpmath.log(_mp_i(0.3, 1e6)))
    assert log_bessel_i(0.3, 1e6) == pytest.approx(ref, rel=1e-15)
    assert bessel_i_scaled(0.5, 1e4) == pytest.approx(math.sqrt(2 / (math.pi * 1e4)) * -math.expm1(-2e4) / 2, rel=1e-15)


def test_log_series_needs_enough_terms():
    with pytest.raises(ConvergenceError):
        log_bessel_i(30.0, 1e3)
    got = log_bessel_i(30.0, 1e3, SeriesPolicy(max_terms=5000))
    assert got == pytest.approx(float(mpmath.log(_mp_i(30, 1000))), rel=1e-15)


def test_domain_errors():
    with pytest.raises(DomainError):
        bessel_i(-1.0, 1.0)
    with pytest.raises(DomainError):
        bessel_i(0.5, -1.0)
    with pytest.raises(DomainError):
        bessel_i_derivs(0.5, 0.0)
    with pytest.raises(DomainError):
        bessel_j(-0.5, 1.0)
    with pytest.raises(DomainError):
        SeriesPolicy(max_terms=0)


def test_wronskian_of_i():
    # I_nu I'_{-nu} - I'_nu I_{-nu} = -2 sin(nu pi)/(pi z)
    z = np.geomspace(0.01, 60.0, 50)
    for nu in (0.2, 0.5, 0.75):
        a0, a1, _ = bessel_i_derivs(nu, z)
        b0, b1, _ = bessel_i_derivs(-nu, z)
        w = a0 * b1 - a1 * b0
        ref = -2.0 * math.sin(nu * math.pi) / (math.pi * z)
        scale = np.abs(a0 * b1) + np.abs(a1 * b0)
        assert np.all(np.abs(w - ref) <= 1e-14 * scale)


def test_recurrences_of_i():
    z = np.geomspace(0.05, 80.0, 40)
    for nu in (0.3, 1.0, 2.6):
        lhs = bessel_i(nu - 1, z) - bessel_i(nu + 1, z)
        assert np.allclose(lhs, 2 * nu / z * bessel_i(nu, z), rtol=1e-13)
        assert np.allclose(bessel_i_d1(nu, z), bessel_i(nu + 1, z) + nu / z * bessel_i(nu, z), rtol=1e-13)
        assert np.allclose(bessel_i_log_derivative(nu, z), bessel_i_d1(nu, z) / bessel_i(nu, z), rtol=1e-13)


@pytest.mark.parametrize("lam", [0.0, 0.5, 1.0, 2.0, 7.5])
def test_bessel_j_against_mpmath(lam):
    z = [1e-3, 0.5, 2.0, 9.0, 21.0, 29.0, 31.0, 55.0, 140.0]
    for zk in z:
        ref = float(mpmath.besselj(lam, zk))
        assert abs(bessel_j(lam, zk) - ref) <= 1e-15, (lam, zk)
    j0, j1, j2 = bessel_j_derivs(lam, np.array(z))
    for k, zk in enumerate(z):
        for got, order in ((j1[k], 1), (j2[k], 2)):
            ref = float(mpmath.diff(lambda x: mpmath.besselj(lam, x), zk, order))
            assert abs(got - ref) <= 1e-14 * max(1.0, abs(ref)), (lam, zk, order)


def test_first_zero_of_j0_by_bisection():
    lo, hi = 2.0, 3.0
    assert bessel_j(0, lo) > 0 > bessel_j(0, hi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if bessel_j(0, mid) > 0:
            lo = mid
        else:
            hi = mid
    root = float(mpmath.besseljzero(0, 1))
    assert abs(lo - root) <= 2 * np.spacing(root)
    assert abs(bessel_j(0, root)) < 1e-15


def test_gamma_wrappers():
    assert gamma(5) == 24.0
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert log_gamma(200.0) == pytest.approx(math.lgamma(200.0), rel=1e-15)
    with pytest.raises(DomainError):
        gamma(0.0)
    with pytest.raises(DomainError):
        log_gamma(-1.0)
    with pytest.raises(OverflowError):
        gamma(200.0)


@settings(max_examples=150, deadline=None)
@given(nu=st.floats(-0.95, 8.0), z=st.floats(1e-3, 200.0))
def test_bessel_ode_with_series_derivatives(nu, z):
    i0, i1, i2 = bessel_i_derivs(nu, np.array([z]))
    res = abs(z**2 * i2[0] + z * i1[0] - (z**2 + nu**2) * i0[0])
    assert res <= 1e-12 * max(1.0, z**2 * abs(i0[0]), abs(z * i1[0]))


@settings(max_examples=150, deadline=None)
@given(nu=st.floats(0.0, 8.0), z=st.floats(1e-3, 500.0), dz=st.floats(1e-3, 5.0))
def test_monotone_and_scaled_bound(nu, z, dz):
    assert bessel_i(nu, z + dz) >= bessel_i(nu, z) > 0
    s = bessel_i_scaled(nu, z)
    assert 0 < s <= 1.0


@settings(max_examples=100, deadline=None)
@given(lam=st.floats(0.0, 6.0), z=st.floats(0.01, 80.0))
def test_bessel_j_ode(lam, z):
    j0, j1, j2 = bessel_j_derivs(lam, np.array([z]))
    res = abs(z**2 * j2[0] + z * j1[0] + (z**2 - lam**2) * j0[0])
    assert res <= 1e-11 * max(1.0, z**2)
