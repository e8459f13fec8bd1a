"""Closed-form laws of BESQ, of the CIR process X and of Z = sqrt(X).

Every density is evaluated in log space and exponentiated once at the end.
``eta_star`` is implemented from its own closed forms, not as ``rho/eta``,
so the factorization ``rho = eta * eta_star`` is a real cross-check.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import DomainError, ModelMismatch, QuadratureError
from .model import (
    DerivedParams,
    InitialCondition,
    ModelParams,
    derive,
    eta,
    log_eta,
    potential_v,
    time_factors,
)
from .quadrature import adaptive_integrate, cumulative_gauss, integrate_power_origin
from .specfun import DEFAULT_POLICY, SeriesPolicy, log_bessel_i

__all__ = [
    "Law",
    "Grid1D",
    "DensityCurve",
    "DensitySpec",
    "CdfTable",
    "besq_density",
    "log_besq_density",
    "x_density",
    "log_x_density",
    "rho_zero",
    "log_rho_zero",
    "rho_positive",
    "log_rho_positive",
    "rho",
    "log_rho",
    "eta_star",
    "log_eta_star",
    "cdf",
    "total_mass",
    "moment",
    "density_curve",
    "z_second_moment",
]


class Law(enum.Enum):
    BESQ = "besq"
    X = "x"
    Z = "z"


def _arr(x, name, strict=True):
    a = np.asarray(x, dtype=float)
    bad = ~(a > 0) if strict else ~(a >= 0)
    if bad.any():
        raise DomainError(f"{name} must be {'>' if strict else '>='} 0")
    return a


def _ret(val, *inputs):
    if all(np.ndim(x) == 0 for x in inputs):
        return float(val)
    return val


def _log_abs_alpha(d):
    return math.log(abs(d.alpha))


# -- BESQ -------------------------------------------------------------------


def log_besq_density(delta, t, x0, y, policy: SeriesPolicy = DEFAULT_POLICY):
    """Log of the BESQ^delta transition density from ``x0`` to ``y`` over time ``t``."""
    if not delta > 0:
        raise DomainError(f"delta must be > 0, got {delta}")
    if not x0 >= 0:
        raise DomainError(f"x0 must be >= 0, got {x0}")
    tt = _arr(t, "t")
    yy = _arr(y, "y")
    if x0 == 0:
        h = 0.5 * delta
        val = -h * np.log(2.0 * tt) - math.lgamma(h) + (h - 1.0) * np.log(yy) - yy / (2.0 * tt)
    else:
        nu = 0.5 * delta - 1.0
        val = (
            -np.log(2.0 * tt)
            + 0.5 * nu * (np.log(yy) - math.log(x0))
            - (x0 + yy) / (2.0 * tt)
            + log_bessel_i(nu, np.sqrt(x0 * yy) / tt, policy)
        )
    return _ret(val, t, y)


def besq_density(delta, t, x0, y, policy: SeriesPolicy = DEFAULT_POLICY):
    """Transition density of the squared Bessel process of dimension ``delta``.

    For ``x0 = 0`` this is the Gamma(delta/2, scale 2t) density; for ``x0 > 0``
    it is ``(1/2t) (y/x0)^(nu/2) exp(-(x0+y)/2t) I_nu(sqrt(x0 y)/t)`` with
    ``nu = delta/2 - 1``.
    """
    return _ret(np.exp(log_besq_density(delta, t, x0, y, policy)), t, y)


# -- X = alpha r + beta -----------------------------------------------------


def log_x_density(params, t, x, policy: SeriesPolicy = DEFAULT_POLICY):
    d = derive(params)
    tt = _arr(t, "t")
    xx = _arr(x, "x")
    tf = time_factors(d, tt)
    if d.x0 == 0:
        h = 0.5 * d.delta
        val = (
            -d.delta * _log_abs_alpha(d)
            + h * (math.log(2.0) + tf.log_r)
            - math.lgamma(h)
            + (h - 1.0) * np.log(xx)
            + d.lam * d.delta * tt / 2.0
            - 2.0 * tf.re * xx / d.alpha**2
        )
    else:
        # e^{lam t} q_s(x0, x e^{lam t}) written with r, re, kz so that large lam*t cannot overflow
        a2 = d.alpha**2
        val = (
            math.log(2.0 / a2)
            + tf.log_r
            + d.lam * tt * (1.0 + 0.5 * d.nu)
            + 0.5 * d.nu * (np.log(xx) - math.log(d.x0))
            - 2.0 * (tf.r * d.x0 + tf.re * xx) / a2
            + log_bessel_i(d.nu, 4.0 * tf.kz * np.sqrt(d.x0 * xx) / a2, policy)
        )
    return _ret(val, t, x)


def x_density(params, t, x, policy: SeriesPolicy = DEFAULT_POLICY):
    """Density of the CIR value ``X_t = e^{-lam t} Y(s)``, ``s = alpha^2 (e^{lam t}-1)/(4 lam)``."""
    return _ret(np.exp(log_x_density(params, t, x, policy)), t, x)


# -- Z = sqrt(X) ------------------------------------------------------------


def log_rho_zero(params, t, q):
    d = derive(params)
    if d.x0 != 0:
        raise ModelMismatch(f"rho_zero requires x0 = 0, got {d.x0}")
    tt = _arr(t, "t")
    qq = _arr(q, "q")
    tf = time_factors(d, tt)
    h = 0.5 * d.delta
    val = (
        -d.delta * _log_abs_alpha(d)
        + (h + 1.0) * math.log(2.0)
        + h * tf.log_r
        - math.lgamma(h)
        + (d.delta - 1.0) * np.log(qq)
        + d.lam * d.delta * tt / 2.0
        - 2.0 * tf.re * qq**2 / d.alpha**2
    )
    return _ret(val, t, q)


def rho_zero(params, t, q):
    """Density of ``Z_t`` when ``X_0 = 0`` (a generalized Rayleigh/chi law)."""
    return _ret(np.exp(log_rho_zero(params, t, q)), t, q)


def _bessel_arg(d, tf, qq):
    return 4.0 * d.z0 * tf.kz / d.alpha**2 * qq


def log_rho_positive(params, t, q, policy: SeriesPolicy = DEFAULT_POLICY):
    d = derive(params)
    if not d.x0 > 0:
        raise ModelMismatch("rho_positive requires x0 > 0")
    tt = _arr(t, "t")
    qq = _arr(q, "q")
    tf = time_factors(d, tt)
    a2 = d.alpha**2
    val = (
        math.log(4.0 / a2)
        + tf.log_r
        - d.nu * math.log(d.z0)
        + d.lam * tt * (d.delta / 4.0 + 0.5)
        + log_bessel_i(d.nu, _bessel_arg(d, tf, qq), policy)
        + 0.5 * d.delta * np.log(qq)
        - 2.0 * (tf.r * d.z0**2 + tf.re * qq**2) / a2
    )
    return _ret(val, t, q)


def rho_positive(params, t, q, policy: SeriesPolicy = DEFAULT_POLICY):
    """Density of ``Z_t`` when ``X_0 = x0 > 0``; involves ``I_nu``."""
    return _ret(np.exp(log_rho_positive(params, t, q, policy)), t, q)


def log_rho(params, t, q, policy: SeriesPolicy = DEFAULT_POLICY):
    if params.x0 > 0:
        return log_rho_positive(params, t, q, policy)
    return log_rho_zero(params, t, q)


def rho(params, t, q, policy: SeriesPolicy = DEFAULT_POLICY):
    """Density of ``Z_t`` with the branch picked from ``x0``."""
    return _ret(np.exp(log_rho(params, t, q, policy)), t, q)


# -- eta_* ------------------------------------------------------------------


def log_eta_star(params, t, q, case=None, policy: SeriesPolicy = DEFAULT_POLICY):
    d = derive(params)
    case = InitialCondition.resolve(d, case)
    tt = _arr(t, "t")
    qq = _arr(q, "q")
    tf = time_factors(d, tt)
    a2 = d.alpha**2
    if case is InitialCondition.ZERO:
        h = 0.5 * d.delta
        val = (
            (h + 1.0) * math.log(2.0)
            - d.delta * _log_abs_alpha(d)
            - math.lgamma(h)
            + h * tf.log_r
            + 0.5 * (d.delta - 1.0) * np.log(qq)
            + d.lam * d.delta * tt / 4.0
            - tf.coth * qq**2 / a2
        )
    else:
        val = (
            math.log(4.0 / a2)
        + tf.log_r
            - d.nu * math.log(d.z0)
            + 0.5 * d.lam * tt
            + log_bessel_i(d.nu, _bessel_arg(d, tf, qq), policy)
            + 0.5 * np.log(qq)
            + d.lam * qq**2 / a2
            - 2.0 * (tf.r * d.z0**2 + tf.re * qq**2) / a2
        )
    return _ret(val, t, q)


def eta_star(params, t, q, case=None, policy: SeriesPolicy = DEFAULT_POLICY):
    """Backward solution ``eta_*`` (zero-start tanh form or positive-start I_nu form)."""
    return _ret(np.exp(log_eta_star(params, t, q, case, policy)), t, q)


# -- grids and curves -------------------------------------------------------


@dataclass(frozen=True)
class Grid1D:
    points: np.ndarray
    spacing: str = "custom"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size == 0:
            raise DomainError("grid must be a non-empty 1-D array")
        if not (pts > 0).all():
            raise DomainError("grid points must be > 0")
        if pts.size > 1 and not (np.diff(pts) > 0).all():
            raise DomainError("grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @classmethod
    def parse(cls, spec: str) -> "Grid1D":
        """Parse ``lin:a:b:n`` or ``log:a:b:n``."""
        try:
            kind, a, b, n = spec.split(":")
            a, b, n = float(a), float(b), int(n)
        except ValueError:
            raise DomainError(f"bad grid spec {spec!r}; expected lin:a:b:n or log:a:b:n") from None
        if n < 1 or not 0 < a < b and not (n == 1 and 0 < a):
            raise DomainError(f"bad grid bounds in {spec!r}")
        if kind == "lin":
            return cls(np.linspace(a, b, n), "lin")
        if kind == "log":
            return cls(np.geomspace(a, b, n), "log")
        raise DomainError(f"unknown grid kind {kind!r}")

    def __len__(self):
        return self.points.size


@dataclass
class DensityCurve:
    grid: Grid1D
    values: np.ndarray
    t: float
    law: str
    normalization: float | None = None
    tol: float | None = None
    params: dict = field(default_factory=dict)

    @property
    def abscissa_name(self):
        return {"besq": "y", "x": "x"}.get(self.law, "q")


@dataclass(frozen=True)
class DensitySpec:
    """A probability law at a fixed time: which variable, which model, which ``t``.

    For ``Law.BESQ`` the BESQ dimension and start are taken from ``params``
    (``delta`` and ``x0``) and ``t`` is the BESQ clock.
    """

    law: Law
    params: ModelParams
    t: float
    policy: SeriesPolicy = DEFAULT_POLICY

    def __post_init__(self):
        object.__setattr__(self, "law", Law(self.law))
        if not self.t > 0:
            raise DomainError(f"t must be > 0, got {self.t}")

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.law is Law.Z:
            return log_rho(self.params, self.t, x, self.policy)
        if self.law is Law.X:
            return log_x_density(self.params, self.t, x, self.policy)
        d = derive(self.params)
        return log_besq_density(d.delta, self.t, d.x0, x, self.policy)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    @property
    def origin_exponent(self):
        """Power ``a`` with ``pdf(x) ~ x^a`` as ``x -> 0``."""
        delta = derive(self.params).delta
        return delta - 1.0 if self.law is Law.Z else 0.5 * delta - 1.0

    def scale(self):
        """Natural size of the variable: the mean for BESQ/X, its square root for Z."""
        d = derive(self.params)
        if self.law is Law.BESQ:
            return d.x0 + d.delta * self.t
        mean_x = z_second_moment(self.params, self.t)
        return math.sqrt(mean_x) if self.law is Law.Z else mean_x

    def bracket(self, weight=None):
        """Return ``(mode, cut, upper)``.

        ``cut`` ends the Gauss-Jacobi panel at the origin. ``upper`` is where
        ``x w(x) pdf(x)`` has dropped below 1e-17 of its peak; measuring the
        tail against ``x pdf`` rather than ``pdf`` keeps the rule meaningful
        when the density is singular at 0.
        """
        scale = self.scale()
        x = np.geomspace(scale * 1e-6, scale * 1e4, 5000)
        with np.errstate(divide="ignore", under="ignore"):
            lp = self.logpdf(x)
            lw = lp + np.log(x)
            if weight is not None:
                lw = lw + np.log(np.abs(weight(x)))
        i = int(np.argmax(lp))
        j = int(np.argmax(lw))
        beyond = np.nonzero(lw[j:] < lw[j] - 39.0)[0]
        if beyond.size == 0:
            raise QuadratureError("could not bracket the upper tail of the density")
        mode = float(x[i])
        cut = 0.5 * mode if i > 0 else 0.05 * scale
        return mode, cut, float(x[j + beyond[0]])

    def _origin(self, upto):
        a = self.origin_exponent
        return integrate_power_origin(
            lambda x: np.exp(self.logpdf(x) - a * np.log(x)), upto, a
        )

    def integrate(self, weight=None, upper=None, abs_tol=1e-14, rel_tol=1e-12):
        """Integral of ``weight(x) * pdf(x)`` over ``(0, upper]`` (default: whole support)."""
        mode, cut, top = self.bracket(weight)
        upper = top if upper is None else float(upper)
        eps = min(cut, upper)
        w = (lambda x: 1.0) if weight is None else weight
        a = self.origin_exponent
        head = integrate_power_origin(
            lambda x: w(x) * np.exp(self.logpdf(x) - a * np.log(x)), eps, a
        )
        if upper <= eps:
            return head
        bps = [mode] if eps < mode < upper else []
        body, _ = adaptive_integrate(
            lambda x: w(x) * self.pdf(x), eps, upper, abs_tol=abs_tol, rel_tol=rel_tol, breakpoints=bps
        )
        return head + body


def total_mass(spec: DensitySpec) -> float:
    """Integral of the density over ``(0, inf)``."""
    return spec.integrate()


def moment(spec: DensitySpec, k: float) -> float:
    """``E[V^k]`` by quadrature of ``x^k pdf(x)``."""
    return spec.integrate(weight=lambda x: x**k)


def cdf(spec: DensitySpec, x):
    """``P(V <= x)`` by adaptive quadrature from 0 (absolute error ~1e-12)."""
    xs = _arr(x, "x")
    top = spec.bracket()[2]
    out = np.array([spec.integrate(upper=min(v, top)) for v in np.atleast_1d(xs)])
    out = np.clip(out, 0.0, 1.0)
    return _ret(out.reshape(xs.shape), x)


class CdfTable:
    """Dense CDF table with cubic Hermite interpolation (slopes = exact pdf).

    Built once per law; evaluation at many points is then cheap, which the
    repeated KS tests need. Interpolation error is far below 1e-12 at the
    default resolution.
    """

    def __init__(self, spec: DensitySpec, n_nodes: int = 20000):
        self.spec = spec
        mode, eps, top = spec.bracket()
        self.lower = eps / 64.0
        nodes = np.concatenate((
            np.geomspace(self.lower, eps, 4000, endpoint=False),
            np.linspace(eps, top, n_nodes),
        ))
        increments = cumulative_gauss(spec.pdf, nodes)
        values = spec._origin(nodes[0]) + np.concatenate(([0.0], np.cumsum(increments)))
        self.nodes = nodes
        self.values = values
        self.top = top
        self._spline = CubicHermiteSpline(nodes, values, spec.pdf(nodes))

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        out = np.empty_like(xs, dtype=float)
        lo = xs < self.lower
        hi = xs > self.top
        mid = ~lo & ~hi
        out[mid] = self._spline(xs[mid])
        out[hi] = self.values[-1]
        if lo.any():
            out[lo] = [self.spec._origin(v) if v > 0 else 0.0 for v in xs[lo]]
        return np.clip(out, 0.0, 1.0)


def density_curve(law, params, t, grid: Grid1D, case=None, with_normalization=True) -> DensityCurve:
    """Tabulate a law (or eta, eta_*, V) on a grid.

    ``law`` is one of besq, x, z, eta, eta_star, potential. Only the first
    three are probability laws and carry a normalization.
    """
    law = str(getattr(law, "value", law))
    pts = grid.points
    norm = None
    if law in ("besq", "x", "z"):
        spec = DensitySpec(Law(law), params, t)
        values = spec.pdf(pts)
        if with_normalization:
            norm = total_mass(spec)
    elif law == "eta":
        values = eta(params, t, pts)
    elif law == "eta_star":
        values = eta_star(params, t, pts, case)
    elif law == "potential":
        values = potential_v(params, pts)
    else:
        raise DomainError(f"unknown law {law!r}")
    d = derive(params)
    return DensityCurve(
        grid=grid,
        values=np.asarray(values, dtype=float),
        t=float(t),
        law=law,
        normalization=norm,
        tol=1e-8 if norm is not None else None,
        params={"alpha": d.alpha, "beta": getattr(params, "beta", None), "phi": getattr(params, "phi", None),
                "lambda": d.lam, "x0": d.x0},
    )


def z_second_moment(params, t) -> float:
    """Closed form ``E[Z_t^2] = e^{-lam t} x0 + delta alpha^2 (1 - e^{-lam t})/(4 lam)``."""
    d = derive(params)
    return math.exp(-d.lam * t) * d.x0 - d.delta * d.alpha**2 * math.expm1(-d.lam * t) / (4.0 * d.lam)
