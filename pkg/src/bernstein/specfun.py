"""Gamma and Bessel functions of the first kind (J and modified I).

The alternating power series for J is summed in double-double arithmetic so
it keeps full double accuracy up to moderate arguments; the all-positive
series for I needs no such care.
For large arguments I switches to the Hankel expansion (or a log-space
series when the order is too large for it) and always works through an
exponent/mantissa split, so ``e^{-z} I_nu(z)`` never overflows.

All functions accept scalars or arrays for ``z``; the order is a scalar.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ConvergenceError, DomainError

__all__ = [
    "SeriesPolicy",
    "DEFAULT_POLICY",
    "gamma",
    "log_gamma",
    "bessel_j",
    "bessel_j_derivs",
    "bessel_i",
    "bessel_i_scaled",
    "log_bessel_i",
    "bessel_i_d1",
    "bessel_i_d2",
    "bessel_i_derivs",
    "bessel_i_log_derivative",
]


@dataclass(frozen=True)
class SeriesPolicy:
    """Truncation settings for the Bessel series.

    Parameters
    ----------
    rel_tol : float
        Stop once the next term is below ``rel_tol`` times the partial sum.
    max_terms : int
        Hard cap on the number of series terms.
    large_z_switch : float
        Above this argument the asymptotic / log-space path is used.
    """

    rel_tol: float = 1e-15
    max_terms: int = 500
    large_z_switch: float = 30.0

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be > 0, got {self.rel_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")
        if not self.large_z_switch > 0:
            raise DomainError(f"large_z_switch must be > 0, got {self.large_z_switch}")


DEFAULT_POLICY = SeriesPolicy()

# below this fraction of the largest term a double-double sum cannot resolve more
_DD_RESOLUTION = 1e-32


def _as_array(x, name):
    arr = np.asarray(x, dtype=float)
    if np.isnan(arr).any():
        raise DomainError(f"{name} contains NaN")
    return arr


def _out(arr, scalar):
    if scalar:
        return float(arr)
    return arr


def gamma(x):
    """Gamma function for positive arguments.

    Raises ``DomainError`` for ``x <= 0`` and ``OverflowError`` when the
    result is not representable (``x`` above roughly 171.6).
    """
    arr = _as_array(x, "x")
    if (arr <= 0).any():
        raise DomainError("gamma is only defined here for x > 0")
    out = special.gamma(arr)
    if np.isinf(out).any():
        raise OverflowError("gamma(x) overflows for x > 171.62")
    return _out(out, np.ndim(x) == 0)


def log_gamma(x):
    """Natural log of the gamma function for ``x > 0``; finite up to ~1e305."""
    arr = _as_array(x, "x")
    if (arr <= 0).any():
        raise DomainError("log_gamma is only defined here for x > 0")
    return _out(special.gammaln(arr), np.ndim(x) == 0)


# -- double-double primitives (Dekker / Knuth error-free transformations) ----

_SPLITTER = 134217729.0  # 2**27 + 1


def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dd_add(ah, al, bh, bl):
    s, e = _two_sum(ah, bh)
    return _quick_two_sum(s, e + (al + bl))


def _dd_mul(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    return _quick_two_sum(p, e + (ah * bl + al * bh))


def _dd_div(ah, al, bh, bl):
    q1 = ah / bh
    ph, pl = _dd_mul(q1, 0.0, bh, bl)
    rh, rl = _dd_add(ah, al, -ph, -pl)
    return _quick_two_sum(q1, (rh + rl) / bh)


def _power_series(order, z, sign, policy):
    """Sum ``t_n`` with ``t_0 = 1`` and ``t_n = t_{n-1} * sign*(z/2)^2 / (n (n+order))``.

    Returns ``(S0, S1, S2)`` where ``S1 = sum (order+2n) t_n`` and
    ``S2 = sum (order+2n)(order+2n-1) t_n``; these are the bracketed sums of
    the function and its first two derivatives once the common prefactor
    ``(z/2)^order / Gamma(order+1)`` is pulled out.
    """
    wh, wl = _two_prod(z, z)
    wh, wl = 0.25 * sign * wh, 0.25 * sign * wl

    th = np.ones_like(z)
    tl = np.zeros_like(z)
    s0h, s0l = th.copy(), tl.copy()
    s1h = np.full_like(z, order)
    s1l = np.zeros_like(z)
    s2h = np.full_like(z, order * (order - 1.0))
    s2l = np.zeros_like(z)
    peak = np.ones_like(z)
    tol = policy.rel_tol

    for n in range(1, policy.max_terms + 1):
        dh, dl = _two_sum(float(n), order)
        dh, dl = _dd_mul(dh, dl, float(n), 0.0)
        th, tl = _dd_mul(th, tl, wh, wl)
        th, tl = _dd_div(th, tl, dh, dl)

        c1h, c1l = _two_sum(order, 2.0 * n)
        c0h, c0l = _two_sum(order, 2.0 * n - 1.0)
        c2h, c2l = _dd_mul(c1h, c1l, c0h, c0l)

        s0h, s0l = _dd_add(s0h, s0l, th, tl)
        uh, ul = _dd_mul(th, tl, c1h, c1l)
        s1h, s1l = _dd_add(s1h, s1l, uh, ul)
        uh, ul = _dd_mul(th, tl, c2h, c2l)
        s2h, s2l = _dd_add(s2h, s2l, uh, ul)

        mag = np.abs(th)
        peak = np.maximum(peak, mag)
        weighted = mag * (abs(order) + 2.0 * n + 1.0) ** 2
        shrinking = n * (n + order) > np.abs(wh)
        small = (weighted <= tol * np.abs(s0h)) | (weighted <= _DD_RESOLUTION * peak)
        if np.all(shrinking & small):
            return s0h + s0l, s1h + s1l, s2h + s2l
    raise ConvergenceError(
        f"Bessel series (order={order}) not converged after {policy.max_terms} terms"
    )


def _positive_series(order, z, policy):
    """Plain double-precision version of ``_power_series`` for ``sign = +1``.

    All terms are positive (apart from the n = 0 derivative weights when
    ``order < 1``), so no cancellation occurs and double-double is not needed.
    """
    w = 0.25 * z * z
    t = np.ones_like(z)
    s0 = np.ones_like(z)
    s1 = np.full_like(z, order)
    s2 = np.full_like(z, order * (order - 1.0))
    tol = policy.rel_tol
    for n in range(1, policy.max_terms + 1):
        t = t * (w / (n * (n + order)))
        c1 = order + 2.0 * n
        s0 += t
        s1 += c1 * t
        s2 += c1 * (c1 - 1.0) * t
        if n * (n + order) > w.max() and np.all(t * (abs(order) + 2.0 * n + 1.0) ** 2 <= tol * s0):
            return s0, s1, s2
    raise ConvergenceError(
        f"Bessel series (order={order}) not converged after {policy.max_terms} terms"
    )


def _log_prefactor(order, z):
    """``log((z/2)^order / Gamma(order+1))`` with the z = 0 limits."""
    with np.errstate(divide="ignore"):
        logz = np.log(z / 2.0)
    out = order * logz - math.lgamma(order + 1.0) if order != 0 else np.zeros_like(z)
    if order != 0:
        out = np.where(z == 0, -np.inf if order > 0 else np.inf, out)
    return out


def _hankel_i(nu, z, policy):
    """Large-argument expansion of ``I_nu`` without the ``e^z/sqrt(2 pi z)`` factor.

    Returns the mantissas of I, I', I'' relative to ``g(z) = e^z / sqrt(2 pi z)``.
    """
    mu = 4.0 * nu * nu
    term = np.ones_like(z)
    s0 = np.ones_like(z)
    s1 = np.zeros_like(z)
    s2 = np.zeros_like(z)
    for k in range(1, policy.max_terms + 1):
        term = term * (-(mu - (2 * k - 1) ** 2) / (8.0 * k * z))
        s0 = s0 + term
        s1 = s1 - k * term / z
        s2 = s2 + k * (k + 1) * term / (z * z)
        if np.all(np.abs(term) * (k + 1) ** 2 <= policy.rel_tol * np.abs(s0)):
            break
    else:
        raise ConvergenceError(f"Hankel expansion for I_{nu} did not converge")
    a = 1.0 - 0.5 / z
    return s0, a * s0 + s1, (a * a + 0.5 / (z * z)) * s0 + 2.0 * a * s1 + s2


def _log_series_i(nu, z, policy):
    """Series of ``I_nu`` accumulated term-by-term in log space."""
    # terms peak near n* = (sqrt(z^2 + nu^2) - nu) / 2 and fall off over ~sqrt(z)
    peak = (np.sqrt(z * z + nu * nu) - nu) / 2.0
    need = int(np.max(peak + 12.0 * np.sqrt(peak + 1.0))) + 60
    if need > policy.max_terms:
        raise ConvergenceError(
            f"log-space series for I_{nu} needs about {need} terms "
            f"(max_terms={policy.max_terms})"
        )
    n = np.arange(need, dtype=float)[:, None]
    c1 = nu + 2.0 * n
    lt = c1 * np.log(z / 2.0)[None, :] - special.gammaln(n + 1.0) - special.gammaln(n + nu + 1.0)
    top = lt.max(axis=0)
    if np.any(lt[-1] - top > math.log(policy.rel_tol) - 5.0):
        raise ConvergenceError(f"log-space series for I_{nu} truncated too early")
    w = np.exp(lt - top)
    s0 = w.sum(axis=0)
    s1 = (c1 * w).sum(axis=0) / z
    s2 = (c1 * (c1 - 1.0) * w).sum(axis=0) / (z * z)
    return top, s0, s1, s2


def _i_core(nu, z, policy):
    """Return ``(lsc, m0, m1, m2)`` with ``I^(k)(z) = exp(z + lsc) * m_k``.

    Keeping the ``e^z`` factor out of ``lsc`` preserves precision of the
    scaled values at very large ``z``.
    """
    nu = float(nu)
    if not nu > -1.0:
        raise DomainError(f"order nu must be > -1, got {nu}")
    if (z < 0).any():
        raise DomainError("argument z must be >= 0")

    lsc = np.empty_like(z)
    m0 = np.empty_like(z)
    m1 = np.empty_like(z)
    m2 = np.empty_like(z)

    small = z <= policy.large_z_switch
    if small.any():
        zs = z[small]
        s0, s1, s2 = _positive_series(nu, zs, policy)
        lsc[small] = _log_prefactor(nu, zs) - zs
        with np.errstate(divide="ignore", invalid="ignore"):
            m0[small] = s0
            m1[small] = s1 / zs
            m2[small] = s2 / (zs * zs)

    large = ~small
    hankel = large & (z >= 4.0 * nu * nu)
    if hankel.any():
        zl = z[hankel]
        lsc[hankel] = -0.5 * np.log(2.0 * math.pi * zl)
        m0[hankel], m1[hankel], m2[hankel] = _hankel_i(nu, zl, policy)

    rest = large & ~hankel
    if rest.any():
        zr = z[rest]
        top, m0[rest], m1[rest], m2[rest] = _log_series_i(nu, zr, policy)
        lsc[rest] = top - zr

    return lsc, m0, m1, m2


def log_bessel_i(nu, z, policy: SeriesPolicy = DEFAULT_POLICY):
    """Natural log of ``I_nu(z)``; finite for any representable ``z > 0``."""
    zz = _as_array(z, "z")
    zz1 = np.atleast_1d(zz)
    lsc, m0, _, _ = _i_core(nu, zz1, policy)
    return _out((zz1 + (lsc + np.log(m0))).reshape(zz.shape), zz.ndim == 0)


def bessel_i(nu, z, policy: SeriesPolicy = DEFAULT_POLICY):
    """Modified Bessel function of the first kind, ``I_nu(z)``.

    Evaluates ``sum_n (z/2)^(nu+2n) / (n! Gamma(n+nu+1))`` for ``z`` up to
    ``policy.large_z_switch`` and an asymptotic form beyond. Orders in
    ``(-1, 0)`` are accepted.

    Examples
    --------
    >>> bessel_i(0, 0.0)
    1.0
    """
    zz = _as_array(z, "z")
    zz1 = np.atleast_1d(zz)
    lsc, m0, _, _ = _i_core(nu, zz1, policy)
    with np.errstate(over="ignore"):
        out = np.exp(zz1 + lsc) * m0
    return _out(out.reshape(zz.shape), zz.ndim == 0)


def bessel_i_scaled(nu, z, policy: SeriesPolicy = DEFAULT_POLICY):
    """``exp(-z) * I_nu(z)``."""
    zz = _as_array(z, "z")
    zz1 = np.atleast_1d(zz)
    lsc, m0, _, _ = _i_core(nu, zz1, policy)
    out = np.exp(lsc) * m0
    return _out(out.reshape(zz.shape), zz.ndim == 0)


def bessel_i_derivs(nu, z, policy: SeriesPolicy = DEFAULT_POLICY, scaled: bool = False):
    """Return ``(I, I', I'')`` at ``z > 0`` from term-wise differentiated series.

    With ``scaled=True`` all three values are multiplied by ``exp(-z)``.
    """
    zz = _as_array(z, "z")
    zz1 = np.atleast_1d(zz)
    if (zz1 <= 0).any():
        raise DomainError("derivatives of I_nu are evaluated at z > 0 only")
    lsc, m0, m1, m2 = _i_core(nu, zz1, policy)
    with np.errstate(over="ignore"):
        f = np.exp(lsc if scaled else zz1 + lsc)
    scalar = zz.ndim == 0
    return tuple(_out((f * m).reshape(zz.shape), scalar) for m in (m0, m1, m2))


def bessel_i_d1(nu, z, policy: SeriesPolicy = DEFAULT_POLICY):
    """First derivative ``I_nu'(z)`` for ``z > 0``."""
    return bessel_i_derivs(nu, z, policy)[1]


def bessel_i_d2(nu, z, policy: SeriesPolicy = DEFAULT_POLICY):
    """Second derivative ``I_nu''(z)`` for ``z > 0``."""
    return bessel_i_derivs(nu, z, policy)[2]


def bessel_i_log_derivative(nu, z, policy: SeriesPolicy = DEFAULT_POLICY):
    """``I_nu'(z) / I_nu(z)``, overflow-free for large ``z``."""
    zz = _as_array(z, "z")
    zz1 = np.atleast_1d(zz)
    if (zz1 <= 0).any():
        raise DomainError("derivatives of I_nu are evaluated at z > 0 only")
    _, m0, m1, _ = _i_core(nu, zz1, policy)
    return _out((m1 / m0).reshape(zz.shape), zz.ndim == 0)


def _hankel_pq(order, z, policy):
    mu = 4.0 * order * order
    a = np.ones_like(z)
    p = np.ones_like(z)
    q = np.zeros_like(z)
    for k in range(1, 2 * policy.max_terms + 1):
        a = a * (mu - (2 * k - 1) ** 2) / (8.0 * k * z)
        # a_k z^-k enters P (even k) or Q (odd k) with sign (-1)^floor(k/2)
        sgn = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            q = q + sgn * a
        else:
            p = p + sgn * a
        if np.all(np.abs(a) <= policy.rel_tol * np.maximum(np.abs(p), np.abs(q))):
            break
    else:
        raise ConvergenceError(f"Hankel expansion for J_{order} did not converge")
    chi = z - (0.5 * order + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * z)) * (p * np.cos(chi) - q * np.sin(chi))


def _j_core(lam, z, policy):
    lam = float(lam)
    if not lam >= 0:
        raise DomainError(f"order lambda must be >= 0, got {lam}")
    if (z < 0).any():
        raise DomainError("argument z must be >= 0")
    j0 = np.empty_like(z)
    j1 = np.empty_like(z)
    j2 = np.empty_like(z)

    small = z <= policy.large_z_switch
    if small.any():
        zs = z[small]
        s0, s1, s2 = _power_series(lam, zs, -1.0, policy)
        pref = np.exp(_log_prefactor(lam, zs))
        with np.errstate(divide="ignore", invalid="ignore"):
            j0[small] = pref * s0
            j1[small] = pref * s1 / zs
            j2[small] = pref * s2 / (zs * zs)

    large = ~small
    if large.any():
        zl = z[large]
        ja = _hankel_pq(lam, zl, policy)
        jb = _hankel_pq(lam + 1.0, zl, policy)
        # J' = (lam/z) J_lam - J_{lam+1};  J_{lam+1}' = J_lam - ((lam+1)/z) J_{lam+1}
        d1 = lam / zl * ja - jb
        d1b = ja - (lam + 1.0) / zl * jb
        j0[large] = ja
        j1[large] = d1
        j2[large] = -lam / (zl * zl) * ja + lam / zl * d1 - d1b
    return j0, j1, j2


def bessel_j(lam, z, policy: SeriesPolicy = DEFAULT_POLICY):
    """Bessel function of the first kind ``J_lam(z)`` for real ``lam >= 0``, ``z >= 0``.

    The defining alternating series ``(z/2)^lam sum (-z^2)^n / (4^n n! Gamma(n+lam+1))``
    is summed in double-double precision; beyond ``policy.large_z_switch`` the
    Hankel expansion is used.
    """
    zz = _as_array(z, "z")
    j0, _, _ = _j_core(lam, np.atleast_1d(zz), policy)
    return _out(j0.reshape(zz.shape), zz.ndim == 0)


def bessel_j_derivs(lam, z, policy: SeriesPolicy = DEFAULT_POLICY):
    """Return ``(J, J', J'')`` at ``z > 0`` (term-wise series below the switch)."""
    zz = _as_array(z, "z")
    zz1 = np.atleast_1d(zz)
    if (zz1 <= 0).any():
        raise DomainError("derivatives of J are evaluated at z > 0 only")
    vals = _j_core(lam, zz1, policy)
    return tuple(_out(v.reshape(zz.shape), zz.ndim == 0) for v in vals)
