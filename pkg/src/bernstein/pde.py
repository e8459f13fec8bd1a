"""Finite-difference residual certification of the closed-form solutions.

A candidate ``f(t, q)`` is plugged into a PDE through second-order central
stencils at a ladder of step sizes. For a true solution the residual is pure
truncation error and shrinks like ``h^2``; anything else leaves an O(1)
residual. The report records the max-abs scaled residual per step, the
least-squares order fit, and a Richardson-extrapolated residual.

Steps are relative by default: at ``(t, q)`` the stencil uses ``h*t`` and
``h*q``, so points near the origin get proportionally finer stencils and
no stencil can leave the domain for ``h < 1``.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import densities, model
from .errors import DomainError
from .model import InitialCondition, derive
from .specfun import DEFAULT_POLICY, SeriesPolicy, bessel_i, bessel_i_derivs, bessel_j_derivs

__all__ = [
    "StencilPolicy",
    "ResidualReport",
    "standard_points",
    "near_origin_points",
    "residual_c1",
    "residual_c2",
    "residual_fokker_planck",
    "residual_bessel_ode",
    "residual_bessel_j_ode",
]

# certification thresholds
RESIDUAL_TOL = 1e-6
MIN_ORDER = 1.8


@dataclass(frozen=True)
class StencilPolicy:
    """Step ladder for the stencils.

    With ``h0=None`` (default) the ladder is placed automatically: the
    residual is evaluated at ``h_max / 2^j`` for ``j < depth`` and the
    deepest window of ``levels`` steps in which every halving divides the
    residual by a factor in ``ratio_band`` is reported. That window lies in
    the asymptotic range, below which roundoff takes over. A sequence that
    never shows that decay (a non-solution) falls back to the window
    starting at ``h_max/4``. A fixed ``h0`` gives ``h0 / 2^k``.
    """

    h0: float | None = None
    levels: int = 5
    relative: bool = True
    h_max: float = 0.016
    depth: int = 11
    ratio_band: tuple = (2.5, 6.5)

    def __post_init__(self):
        if self.h0 is not None and not self.h0 > 0:
            raise DomainError("h0 must be > 0")
        if self.levels < 2:
            raise DomainError("need at least two step sizes to fit an order")
        if self.depth < self.levels:
            raise DomainError("depth must be >= levels")
        top = self.h_max if self.h0 is None else self.h0
        if self.relative and not top < 1:
            raise DomainError("relative steps need h < 1")

    @property
    def auto(self):
        return self.h0 is None

    @property
    def candidates(self):
        if self.auto:
            return [self.h_max / 2**j for j in range(self.depth)]
        return self.steps

    @property
    def steps(self):
        """The fixed ladder (``h0`` or, in automatic mode, the fallback window)."""
        h0 = self.h0 if self.h0 is not None else self.h_max / 4
        return [h0 / 2**k for k in range(self.levels)]

    def select(self, norms):
        """Index of the first step of the reported window."""
        if not self.auto:
            return 0
        lo, hi = self.ratio_band
        norms = np.asarray(norms)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = norms[:-1] / norms[1:]
        good = (ratios >= lo) & (ratios <= hi)
        for start in range(len(norms) - self.levels, -1, -1):
            if good[start:start + self.levels - 1].all():
                return start
        return min(2, len(norms) - self.levels)


@dataclass
class ResidualReport:
    equation: str
    params: dict
    points: list
    steps: list
    residual_norms: list
    fitted_order: float
    r2: float
    extrapolated: float
    series_residual: float | None = None
    extra: dict = field(default_factory=dict)

    def passed(self, tol: float = RESIDUAL_TOL, min_order: float = MIN_ORDER) -> bool:
        """Order fit at least ``min_order`` and Richardson residual at most ``tol``."""
        return self.fitted_order >= min_order and self.extrapolated <= tol

    def raw_passed(self, tol: float = RESIDUAL_TOL, min_order: float = MIN_ORDER) -> bool:
        """Stricter form: also the unextrapolated residual at the finest step."""
        return self.passed(tol, min_order) and self.residual_norms[-1] <= tol

    def to_dict(self):
        out = asdict(self)
        out["h"] = out.pop("steps")
        out["residual_norm"] = out.pop("residual_norms")
        out["passed"] = self.passed()
        return out

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def standard_points(t_range=(0.1, 2.0), q_range=(0.1, 3.0), n=5):
    """The ``n x n`` tensor grid of (t, q) sample points, flattened to shape (n*n, 2)."""
    t, q = np.meshgrid(np.linspace(*t_range, n), np.linspace(*q_range, n), indexing="ij")
    return np.column_stack((t.ravel(), q.ravel()))


def near_origin_points(n=5):
    """Points with q in [0.01, 0.1], where A/q^2 dominates."""
    return standard_points(q_range=(0.01, 0.1), n=n)


def _fit_order(steps, norms):
    x = np.log(np.asarray(steps))
    y = np.log(np.maximum(np.asarray(norms), np.finfo(float).tiny))
    slope, icept = np.polyfit(x, y, 1)
    pred = slope * x + icept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


def _params_dict(params):
    d = derive(params)
    out = {"alpha": d.alpha, "lambda": d.lam, "x0": d.x0, "delta": d.delta}
    for k in ("beta", "phi"):
        if hasattr(params, k):
            out[k] = getattr(params, k)
    return out


def _check_points(points):
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if not (pts > 0).all():
        raise DomainError("sample points must lie in (0, inf)^2")
    return pts


def _offsets(pts, h, relative):
    t, q = pts[:, 0], pts[:, 1]
    ht = h * t if relative else np.full_like(t, h)
    hq = h * q if relative else np.full_like(q, h)
    if not ((t - ht > 0).all() and (q - hq > 0).all()):
        raise DomainError(f"stencil with h={h} leaves the domain")
    return t, q, ht, hq


def _ladder(equation, params, pts, policy, pointwise):
    """Run ``pointwise(h) -> scaled residual per point`` over the step ladder."""
    cand = policy.candidates
    per_h = [pointwise(h) for h in cand]
    all_norms = [float(np.abs(r).max()) for r in per_h]
    i = policy.select(all_norms)
    sl = slice(i, i + policy.levels)
    steps, norms, per_h = cand[sl], all_norms[sl], per_h[sl]
    order, r2 = _fit_order(steps, norms)
    raw_prev, raw_last = per_h[-2], per_h[-1]
    ratio = (steps[-2] / steps[-1]) ** 2
    extrap = float(np.max(np.abs((ratio * raw_last - raw_prev) / (ratio - 1.0))))
    extra = {"step_selection": "auto" if policy.auto else "fixed"}
    if policy.auto:
        extra["candidate_h"] = list(cand)
        extra["candidate_residual_norm"] = all_norms
    return ResidualReport(
        equation=equation,
        params=_params_dict(params) if params is not None else {},
        points=pts.tolist(),
        steps=list(steps),
        residual_norms=norms,
        fitted_order=order,
        r2=r2,
        extrapolated=extrap,
        extra=extra,
    )


def _heat_residual(params, f, pts, policy, time_sign, equation):
    d = derive(params)
    th2 = d.theta**2

    def pointwise(h):
        t, q, ht, hq = _offsets(pts, h, policy.relative)
        f0 = f(t, q)
        ft = (f(t + ht, q) - f(t - ht, q)) / (2.0 * ht)
        fqq = (f(t, q + hq) - 2.0 * f0 + f(t, q - hq)) / hq**2
        vf = model.potential_v(d, q) * f0
        r = time_sign * th2 * ft + 0.5 * th2**2 * fqq - vf
        return r / np.maximum(1.0, np.maximum(np.abs(f0), np.abs(vf)))

    return _ladder(equation, params, pts, policy, pointwise)


def residual_c1(params, f=None, points=None, policy: StencilPolicy = StencilPolicy()):
    """Residual of ``theta^2 f_t = -(theta^4/2) f_qq + V f`` (forward equation).

    ``f`` defaults to ``eta``.
    """
    pts = _check_points(standard_points() if points is None else points)
    if f is None:
        f = lambda t, q: model.eta(params, t, q)  # noqa: E731
    return _heat_residual(params, f, pts, policy, +1.0, "C1")


def residual_c2(params, f=None, points=None, policy: StencilPolicy = StencilPolicy(), case=None):
    """Residual of ``-theta^2 f_t = -(theta^4/2) f_qq + V f`` (dual equation).

    ``f`` defaults to ``eta_star`` for the given initial-condition ``case``.
    """
    pts = _check_points(standard_points() if points is None else points)
    if f is None:
        case = InitialCondition.resolve(params, case)
        f = lambda t, q: densities.eta_star(params, t, q, case)  # noqa: E731
    return _heat_residual(params, f, pts, policy, -1.0, "C2")


def residual_fokker_planck(params, points=None, policy: StencilPolicy = StencilPolicy(), case=None, drift=None):
    """Residual of ``rho_t + (B rho)_q - (theta^2/2) rho_qq`` for the law of Z.

    ``drift`` replaces the forward drift (used for falsification controls).
    """
    pts = _check_points(standard_points() if points is None else points)
    case = InitialCondition.resolve(params, case)
    d = derive(params)
    th2 = d.theta**2
    if drift is None:
        drift = lambda t, q: model.drift_forward(d, t, q)  # noqa: E731
    dens = lambda t, q: densities.rho(params, t, q)  # noqa: E731
    flux = lambda t, q: drift(t, q) * dens(t, q)  # noqa: E731

    def pointwise(h):
        t, q, ht, hq = _offsets(pts, h, policy.relative)
        f0 = dens(t, q)
        ft = (dens(t + ht, q) - dens(t - ht, q)) / (2.0 * ht)
        gq = (flux(t, q + hq) - flux(t, q - hq)) / (2.0 * hq)
        fqq = (dens(t, q + hq) - 2.0 * f0 + dens(t, q - hq)) / hq**2
        r = ft + gq - 0.5 * th2 * fqq
        return r / np.maximum(1.0, np.abs(f0))

    rep = _ladder("FokkerPlanck", params, pts, policy, pointwise)
    rep.extra["case"] = case.value
    return rep


def residual_bessel_ode(nu, z_points, policy: StencilPolicy = StencilPolicy(),
                        series_policy: SeriesPolicy = DEFAULT_POLICY):
    """Residual of ``z^2 I'' + z I' - (z^2 + nu^2) I`` for ``I_nu``.

    Reports the stencil ladder (derivatives by central differences) and,
    in ``series_residual``, the max residual using the term-wise series
    derivatives, both scaled by ``max(1, z^2 |I|)``.
    """
    z = np.asarray(z_points, dtype=float).ravel()
    if not (z > 0).all():
        raise DomainError("z points must be > 0")
    i0, i1, i2 = bessel_i_derivs(nu, z, series_policy)
    scale = np.maximum(1.0, z**2 * np.abs(i0))
    series = np.abs(z**2 * i2 + z * i1 - (z**2 + nu**2) * i0) / scale

    def pointwise(h):
        hz = h * z if policy.relative else np.full_like(z, h)
        f0 = bessel_i(nu, z, series_policy)
        fp = bessel_i(nu, z + hz, series_policy)
        fm = bessel_i(nu, z - hz, series_policy)
        d1 = (fp - fm) / (2.0 * hz)
        d2 = (fp - 2.0 * f0 + fm) / hz**2
        return (z**2 * d2 + z * d1 - (z**2 + nu**2) * f0) / scale

    pts = np.column_stack((np.full_like(z, nu), z))
    rep = _ladder("BesselODE", None, pts, policy, pointwise)
    rep.params = {"nu": float(nu)}
    rep.series_residual = float(series.max())
    return rep


def residual_bessel_j_ode(lam, z_points, series_policy: SeriesPolicy = DEFAULT_POLICY):
    """Max scaled residual of ``z^2 J'' + z J' + (z^2 - lam^2) J`` using series derivatives."""
    z = np.asarray(z_points, dtype=float).ravel()
    j0, j1, j2 = bessel_j_derivs(lam, z, series_policy)
    scale = np.maximum(1.0, z**2 * np.abs(j0))
    return float(np.max(np.abs(z**2 * j2 + z * j1 + (z**2 - lam**2) * j0) / scale))
