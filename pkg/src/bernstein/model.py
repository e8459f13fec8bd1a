"""Affine short-rate model constants, the potential, eta and the Bernstein drifts.

The one-factor affine model ``dr = sqrt(alpha r + beta) dw + (phi - lam r) dt``
is mapped to the CIR process ``X = alpha r + beta`` and to ``Z = sqrt(X)``,
which is a Bernstein process with diffusion constant ``theta = alpha/2`` and
potential ``V(q) = A/q^2 + B q^2``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, ModelMismatch
from .specfun import DEFAULT_POLICY, SeriesPolicy, bessel_i_log_derivative

__all__ = [
    "ModelParams",
    "DerivedParams",
    "InitialCondition",
    "derive",
    "potential_v",
    "eta",
    "log_eta",
    "drift_forward",
    "drift_backward",
    "time_factors",
]


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the affine short-rate model plus the starting value of X.

    ``lam`` is the mean-reversion speed (``lambda`` is reserved in Python).
    """

    alpha: float
    beta: float
    phi: float
    lam: float
    x0: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "beta", "phi", "lam", "x0"):
            val = getattr(self, name)
            if not isinstance(val, (int, float)) or not math.isfinite(val):
                raise DomainError(f"{name} must be a finite real, got {val!r}")
        if self.alpha == 0:
            raise DomainError("alpha must be nonzero")
        if self.lam == 0:
            raise DomainError("lambda must be nonzero (lambda = 0 is unsupported)")
        if self.x0 < 0:
            raise DomainError(f"x0 must be >= 0, got {self.x0}")
        delta = 4.0 * (self.phi + self.lam * self.beta / self.alpha) / self.alpha
        if not delta > 0:
            raise DomainError(
                f"BESQ dimension delta = 4*phi_tilde/alpha must be > 0, got {delta}"
            )

    @classmethod
    def from_dimension(cls, delta, alpha=1.0, lam=1.0, x0=0.0, beta=0.0):
        """Build parameters with a prescribed dimension ``delta`` by solving for ``phi``."""
        phi = delta * alpha / 4.0 - lam * beta / alpha
        return cls(alpha=alpha, beta=beta, phi=phi, lam=lam, x0=x0)

    def with_x0(self, x0):
        return replace(self, x0=float(x0))

    def derive(self) -> "DerivedParams":
        return derive(self)


@dataclass(frozen=True)
class DerivedParams:
    alpha: float
    lam: float
    x0: float
    phi_tilde: float
    delta: float
    nu: float
    A: float
    B: float
    theta: float
    z0: float


class InitialCondition(enum.Enum):
    """Which closed form applies: ``X_0 = 0`` or ``X_0 = x0 > 0``."""

    ZERO = "zero"
    POSITIVE = "positive"

    @classmethod
    def of(cls, params) -> "InitialCondition":
        return cls.POSITIVE if params.x0 > 0 else cls.ZERO

    @classmethod
    def resolve(cls, params, case) -> "InitialCondition":
        """Normalize ``case`` (enum, string or None) and check it against ``params``."""
        if case is None:
            return cls.of(params)
        case = cls(case)
        if case is cls.POSITIVE and not params.x0 > 0:
            raise ModelMismatch("positive-start branch requires x0 > 0")
        if case is cls.ZERO and params.x0 != 0:
            raise ModelMismatch(f"zero-start branch requires x0 = 0, got {params.x0}")
        return case


def derive(params: ModelParams) -> DerivedParams:
    """Compute phi_tilde, delta, nu, A, B, theta and z0."""
    if isinstance(params, DerivedParams):
        return params
    a = params.alpha
    phi_tilde = params.phi + params.lam * params.beta / a
    delta = 4.0 * phi_tilde / a
    if not delta > 0:
        raise DomainError(f"delta must be > 0, got {delta}")
    return DerivedParams(
        alpha=a,
        lam=params.lam,
        x0=params.x0,
        phi_tilde=phi_tilde,
        delta=delta,
        nu=delta / 2.0 - 1.0,
        A=a**4 / 128.0 * (delta - 1.0) * (delta - 3.0),
        B=params.lam**2 / 8.0,
        theta=a / 2.0,
        z0=math.sqrt(params.x0),
    )


def _positive(x, name):
    arr = np.asarray(x, dtype=float)
    if not (arr > 0).all():
        raise DomainError(f"{name} must be > 0")
    return arr


def _ret(val, *inputs):
    if all(np.ndim(x) == 0 for x in inputs):
        return float(val)
    return val


@dataclass(frozen=True)
class TimeFactors:
    """Time-dependent combinations that stay positive for either sign of lambda.

    ``r = lam/(e^{lam t}-1)``, ``re = r e^{lam t}``, ``s`` is the BESQ clock,
    ``coth = lam/tanh(lam t/2)`` and ``kz = lam/sinh(lam t/2)/2 = r e^{lam t/2}``.
    ``log_r`` and ``log_kz`` stay finite when ``r`` and ``kz`` underflow.
    """

    r: np.ndarray
    re: np.ndarray
    s: np.ndarray
    coth: np.ndarray
    kz: np.ndarray
    log_r: np.ndarray
    log_kz: np.ndarray


def _log_expm1(x):
    """``log(e^x - 1)`` for ``x > 0`` without overflow."""
    return x + np.log(-np.expm1(-x))


def _prefer_direct(direct, log_val):
    """Use ``direct`` where it is a normal positive float, else ``exp(log_val)``."""
    ok = np.isfinite(direct) & (direct > np.finfo(float).tiny)
    with np.errstate(divide="ignore"):
        return np.where(ok, direct, np.exp(log_val)), np.where(ok, np.log(np.where(ok, direct, 1.0)), log_val)


def time_factors(d: DerivedParams, t) -> TimeFactors:
    lam = d.lam
    t = np.asarray(t, dtype=float)
    lt = abs(lam) * t
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        em1 = np.expm1(lam * t)
        # |e^{lam t} - 1| = e^{max(lam t, 0)} (1 - e^{-|lam| t})
        log_r = math.log(abs(lam)) - _log_expm1(lt) + (lt if lam < 0 else 0.0)
        log_kz = math.log(abs(lam)) - _log_expm1(lt) + 0.5 * lt
        r, log_r = _prefer_direct(lam / em1, log_r)
        re, _ = _prefer_direct(-lam / np.expm1(-lam * t), log_r + lam * t)
        kz, log_kz = _prefer_direct(lam / (2.0 * np.sinh(0.5 * lam * t)), log_kz)
    return TimeFactors(
        r=r,
        re=re,
        s=d.alpha**2 * em1 / (4.0 * lam),
        coth=lam / np.tanh(0.5 * lam * t),
        kz=kz,
        log_r=log_r,
        log_kz=log_kz,
    )


def potential_v(d, q, t=None):
    """``V(q) = A/q^2 + B q^2``; ``t`` is accepted and ignored."""
    d = derive(d)
    qq = _positive(q, "q")
    return _ret(d.A / qq**2 + d.B * qq**2, q)


def log_eta(d, t, q):
    d = derive(d)
    tt = _positive(t, "t")
    qq = _positive(q, "q")
    val = d.lam * d.delta * tt / 4.0 - d.lam * qq**2 / d.alpha**2 + 0.5 * (d.delta - 1.0) * np.log(qq)
    return _ret(val, t, q)


def eta(d, t, q):
    """Forward solution ``exp(lam delta t/4 - lam q^2/alpha^2) q^{(delta-1)/2}``."""
    return _ret(np.exp(log_eta(d, t, q)), t, q)


def drift_forward(d, t, q):
    """``theta^2 d/dq log eta = theta^2 ((delta-1)/(2q) - 2 lam q/alpha^2)``."""
    d = derive(d)
    _positive(t, "t")
    qq = _positive(q, "q")
    val = d.theta**2 * ((d.delta - 1.0) / (2.0 * qq) - 2.0 * d.lam * qq / d.alpha**2)
    return _ret(np.broadcast_to(val, np.broadcast(np.asarray(t), qq).shape) * 1.0, t, q)


def drift_backward(d, t, q, case=None, policy: SeriesPolicy = DEFAULT_POLICY):
    """``-theta^2 d/dq log eta_*`` from the closed-form derivative of eta_*.

    ``case`` selects the zero-start or positive-start eta_*; by default it
    follows ``x0``.
    """
    d = derive(d)
    case = InitialCondition.resolve(d, case)
    tt = _positive(t, "t")
    qq = _positive(q, "q")
    tf = time_factors(d, tt)
    a2 = d.alpha**2
    if case is InitialCondition.ZERO:
        dlog = (d.delta - 1.0) / (2.0 * qq) - 2.0 * tf.coth * qq / a2
    else:
        k = 4.0 * d.z0 * tf.kz / a2
        arg = k * qq
        dlog = 0.5 / qq - 2.0 * tf.coth * qq / a2 + k * bessel_i_log_derivative(d.nu, arg, policy)
    return _ret(-d.theta**2 * dlog, t, q)
