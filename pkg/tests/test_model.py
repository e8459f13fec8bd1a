import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bernstein.densities import log_eta_star
from bernstein.errors import DomainError, ModelMismatch
from bernstein.model import (
    InitialCondition,
    ModelParams,
    derive,
    drift_backward,
    drift_forward,
    eta,
    log_eta,
    potential_v,
    time_factors,
)


def test_derive_hand_example():
    d = derive(ModelParams(alpha=2, beta=0, phi=1, lam=1, x0=0))
    assert (d.phi_tilde, d.delta, d.nu, d.A, d.B, d.theta, d.z0) == (1.0, 2.0, 0.0, -0.125, 0.125, 1.0, 0.0)


def test_beta_enters_through_phi_tilde():
    d = derive(ModelParams(alpha=2, beta=2, phi=0, lam=1))
    assert d.phi_tilde == 1.0 and d.delta == 2.0


def test_derive_is_recomputable():
    p = ModelParams(alpha=0.7, beta=0.3, phi=0.4, lam=-0.8, x0=2.0)
    assert derive(p) == derive(p) == p.derive()
    d = derive(p)
    pt = 0.4 + (-0.8) * 0.3 / 0.7
    assert d.phi_tilde == pt
    assert d.delta == 4 * pt / 0.7
    assert d.A == 0.7**4 / 128 * (d.delta - 1) * (d.delta - 3)
    assert d.z0 == math.sqrt(2.0)


@pytest.mark.parametrize("delta", [1.2, 2.0, 2.9])
def test_a_negative_between_one_and_three(delta):
    assert derive(ModelParams.from_dimension(delta)).A < 0


@pytest.mark.parametrize(
    "kw",
    [
        dict(alpha=0, beta=0, phi=1, lam=1),
        dict(alpha=1, beta=0, phi=1, lam=0),
        dict(alpha=1, beta=0, phi=1, lam=1, x0=-1),
        dict(alpha=1, beta=0, phi=-1, lam=1),
        dict(alpha=1, beta=0, phi=0, lam=1),
        dict(alpha=1, beta=0, phi=float("nan"), lam=1),
    ],
)
def test_invalid_params_rejected(kw):
    with pytest.raises(DomainError):
        ModelParams(**kw)


def test_negative_alpha_allowed_when_delta_positive():
    d = derive(ModelParams(alpha=-1, beta=0, phi=-0.5, lam=1))
    assert d.delta == 2.0 and d.theta == -0.5


def test_potential_examples():
    p2 = ModelParams.from_dimension(3.0, alpha=1.0, lam=1.0)
    d = derive(p2)
    assert d.A == 0.0
    # A = 0, B = 1/8, q = 2 -> 1/2
    assert potential_v(d, 2.0) == 0.5
    assert potential_v(ModelParams(alpha=2, beta=0, phi=1, lam=1), 1.0) == 0.0
    assert potential_v(d, 1.3, t=0.1) == potential_v(d, 1.3, t=7.0)
    with pytest.raises(DomainError):
        potential_v(d, 0.0)


def test_eta_small_time_limit():
    p = ModelParams(alpha=2, beta=0, phi=1, lam=1)
    assert eta(p, 1e-14, 1.0) == pytest.approx(math.exp(-0.25), rel=1e-13)


def test_eta_delta_one_has_no_power():
    p = ModelParams.from_dimension(1.0, alpha=1.5, lam=0.7)
    q = np.array([0.1, 1.0, 4.0])
    assert np.allclose(eta(p, 1.0, q), np.exp(0.7 / 4 - 0.7 * q**2 / 2.25), rtol=1e-15)


@settings(max_examples=100, deadline=None)
@given(t=st.floats(0.01, 5), q=st.floats(0.01, 5), q2=st.floats(0.01, 5))
def test_eta_ratio_identity(t, q, q2):
    p = ModelParams(alpha=1.3, beta=0.2, phi=0.9, lam=0.6)
    d = derive(p)
    lhs = log_eta(p, t, q) - log_eta(p, t, q2)
    rhs = -d.lam * (q**2 - q2**2) / d.alpha**2 + 0.5 * (d.delta - 1) * math.log(q / q2)
    assert lhs == pytest.approx(rhs, abs=1e-13)


def test_eta_domain():
    p = ModelParams(alpha=1, beta=0, phi=1, lam=1)
    with pytest.raises(DomainError):
        eta(p, 0.0, 1.0)
    with pytest.raises(DomainError):
        eta(p, 1.0, -1.0)


def test_forward_drift_examples():
    assert drift_forward(ModelParams(alpha=2, beta=0, phi=1, lam=1), 1.0, 1.0) == 0.0
    p1 = ModelParams.from_dimension(1.0, alpha=1.7, lam=0.9)
    assert drift_forward(p1, 0.5, 2.0) == pytest.approx(-0.9 * 2.0 / 2, rel=1e-15)


def _fd_log_derivative(fn, t, q, h):
    return (fn(t, q + h) - fn(t, q - h)) / (2 * h)


def test_forward_drift_matches_finite_difference_at_order_two():
    p = ModelParams(alpha=1.0, beta=0.25, phi=0.6, lam=1.0)
    d = derive(p)
    errs = []
    for h in (1e-2, 5e-3):
        fd = d.theta**2 * _fd_log_derivative(lambda t, q: log_eta(p, t, q), 0.7, 0.9, h)
        errs.append(abs(fd - drift_forward(p, 0.7, 0.9)))
    assert 3.5 < errs[0] / errs[1] < 4.5


@pytest.mark.parametrize("x0", [0.0, 1.0, 3.0])
@pytest.mark.parametrize("lam", [1.0, -0.6])
def test_backward_drift_matches_finite_difference(x0, lam):
    p = ModelParams(alpha=1.0, beta=0.25, phi=0.6, lam=lam, x0=x0)
    d = derive(p)
    t = np.array([0.2, 1.0, 2.5])
    q = np.array([0.3, 1.1, 2.0])
    fd = -d.theta**2 * _fd_log_derivative(lambda tt, qq: log_eta_star(p, tt, qq), t, q, 1e-5)
    assert np.allclose(drift_backward(p, t, q), fd, rtol=1e-8)


def test_backward_drift_zero_case_closed_form():
    p = ModelParams(alpha=1.4, beta=0.0, phi=0.9, lam=0.8)
    d = derive(p)
    t, q = 1.3, 0.7
    ref = -d.theta**2 * ((d.delta - 1) / (2 * q) - 2 * d.lam * q / (d.alpha**2 * math.tanh(d.lam * t / 2)))
    assert drift_backward(p, t, q) == pytest.approx(ref, rel=1e-14)


def test_backward_drift_long_time_limit():
    # tanh -> 1: B* -> -(theta^2)((delta-1)/(2q) - 2 lam q/alpha^2) = -B
    p = ModelParams(alpha=1.0, beta=0.25, phi=0.6, lam=1.0)
    q = np.linspace(0.2, 3, 7)
    assert np.allclose(drift_backward(p, 60.0, q), -drift_forward(p, 60.0, q), rtol=1e-14)


def test_backward_drift_blows_up_at_origin():
    p = ModelParams(alpha=1.0, beta=0.25, phi=0.6, lam=1.0)
    assert derive(p).delta > 1
    assert drift_backward(p, 1.0, 1e-8) < -1e6


def test_case_mismatch():
    p0 = ModelParams(alpha=1, beta=0, phi=1, lam=1)
    with pytest.raises(ModelMismatch):
        drift_backward(p0, 1.0, 1.0, case="positive")
    with pytest.raises(ModelMismatch):
        InitialCondition.resolve(p0.with_x0(1.0), "zero")
    assert InitialCondition.of(p0) is InitialCondition.ZERO


@pytest.mark.parametrize("lam", [1e-9, 0.5, -0.5, 30.0, -30.0])
def test_time_factors_stay_positive(lam):
    d = derive(ModelParams(alpha=1.0, beta=0.0, phi=1.0, lam=lam))
    tf = time_factors(d, np.array([1e-3, 0.5, 2.0]))
    for v in (tf.r, tf.re, tf.s, tf.coth, tf.kz):
        assert np.all(v > 0) and np.all(np.isfinite(v))
    assert np.allclose(tf.kz**2, tf.r * tf.re, rtol=1e-13)
