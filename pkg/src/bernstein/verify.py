"""The acceptance suite as plain functions.

Each ``check_*`` returns a :class:`Check` with the measured quantities, the
thresholds they were compared against and the wall time. ``run_all`` drives
them in order; the CLI ``verify`` command and the test suite both use it.
"""
from __future__ import annotations

import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import densities, mc, pde
from .densities import CdfTable, DensitySpec, Law
from .model import InitialCondition, ModelParams, derive, drift_forward, eta, log_eta
from .specfun import bessel_i_derivs

# exit-code categories
NUMERIC = 3
CERTIFICATION = 4
STATISTICAL = 5

DEFAULT_PARAMS = ModelParams(alpha=1.0, beta=0.25, phi=0.6, lam=1.0, x0=1.0)
KS_SEED = 20240601


@dataclass
class Check:
    name: str
    passed: bool
    category: int
    measured: dict = field(default_factory=dict)
    runtime: float = 0.0

    def to_dict(self):
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "exit_code": 0 if self.passed else self.category,
            "runtime_s": round(self.runtime, 3),
            "measured": self.measured,
        }

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name} ({self.runtime:.2f} s)"


def _cases(params):
    """Zero-start and positive-start variants of ``params``."""
    x0 = params.x0 if params.x0 > 0 else 1.0
    return {"zero": params.with_x0(0.0), "positive": params.with_x0(x0)}


def _timed(fn):
    def wrapper(*args, **kw):
        start = time.perf_counter()
        chk = fn(*args, **kw)
        chk.runtime = time.perf_counter() - start
        return chk

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _with_budget(chk, budget):
    chk.measured["runtime_budget_s"] = budget
    chk.measured["runtime_s"] = chk.runtime
    chk.passed = bool(chk.passed and chk.runtime < budget)
    return chk


# -- 1 ----------------------------------------------------------------------


def bessel_grid():
    return np.linspace(-0.9, 5.0, 6), np.linspace(1.0, 20.0, 20)


@_timed
def _bessel_ode():
    nus, z = bessel_grid()
    worst = 0.0
    for nu in nus:
        i0, i1, i2 = bessel_i_derivs(nu, z)
        scale = np.maximum(1.0, z**2 * np.abs(i0))
        worst = max(worst, float(np.max(np.abs(z**2 * i2 + z * i1 - (z**2 + nu**2) * i0) / scale)))
    return Check("1 Bessel ODE residual", worst <= 1e-9, CERTIFICATION,
                 {"max_scaled_residual": worst, "tol": 1e-9, "grid": [6, 20]})


def check_bessel_ode(params=None):
    """Series-derivative residual of the modified Bessel equation on a 6x20 grid."""
    return _with_budget(_bessel_ode(), 1.0)


# -- 2, 3 -------------------------------------------------------------------


def _report_summary(rep):
    return {
        "fitted_order": rep.fitted_order,
        "extrapolated": rep.extrapolated,
        "residual_at_finest_h": rep.residual_norms[-1],
        "finest_h": rep.steps[-1],
        "passed": rep.passed(),
    }


@_timed
def _dual_zero(params):
    p0 = _cases(params)["zero"]
    c2 = pde.residual_c2(p0, case=InitialCondition.ZERO)
    c1 = pde.residual_c1(p0)
    return Check("2 dual equation, zero start (and C1 on eta)", c2.passed() and c1.passed(), CERTIFICATION,
                 {"c2_zero": _report_summary(c2), "c1": _report_summary(c1),
                  "min_order": pde.MIN_ORDER, "tol": pde.RESIDUAL_TOL})


def check_dual_zero(params=DEFAULT_PARAMS):
    return _with_budget(_dual_zero(params), 5.0)


@_timed
def _dual_positive(params):
    pp = _cases(params)["positive"]
    c2 = pde.residual_c2(pp, case=InitialCondition.POSITIVE)
    return Check("3 dual equation, positive start", c2.passed(), CERTIFICATION,
                 {"c2_positive": _report_summary(c2), "x0": pp.x0,
                  "min_order": pde.MIN_ORDER, "tol": pde.RESIDUAL_TOL})


def check_dual_positive(params=DEFAULT_PARAMS):
    return _with_budget(_dual_positive(params), 10.0)


# -- 4 ----------------------------------------------------------------------


def factorization_error(params, case, n=50):
    """Max of ``|eta eta_* / rho - 1|`` over an ``n x n`` grid, computed in log space."""
    t, q = np.meshgrid(np.linspace(0.1, 5.0, n), np.linspace(0.05, 5.0, n), indexing="ij")
    lhs = log_eta(params, t, q) + densities.log_eta_star(params, t, q, case)
    return float(np.max(np.abs(np.expm1(lhs - densities.log_rho(params, t, q)))))


@_timed
def check_factorization(params=DEFAULT_PARAMS):
    errs = {name: factorization_error(p, name) for name, p in _cases(params).items()}
    return Check("4 factorization rho = eta * eta_star", max(errs.values()) <= 1e-12, NUMERIC,
                 {"max_rel_error": errs, "tol": 1e-12, "grid": "50x50, t in [0.1,5], q in [0.05,5]"})


# -- 5 ----------------------------------------------------------------------


def _low_dimension(params, delta=0.5):
    return {name: ModelParams.from_dimension(delta, params.alpha, params.lam, p.x0, params.beta)
            for name, p in _cases(params).items()}


@_timed
def check_normalization(params=DEFAULT_PARAMS):
    out = {}
    worst = 0.0
    for label, group in (("", _cases(params)), ("delta=0.5 ", _low_dimension(params))):
        for name, p in group.items():
            for t in (0.25, 1.0, 4.0):
                err = abs(densities.total_mass(DensitySpec(Law.Z, p, t)) - 1.0)
                out[f"{label}{name} t={t:g}"] = err
                worst = max(worst, err)
    return Check("5 normalization", worst <= 1e-8, NUMERIC,
                 {"abs_error": out, "max_abs_error": worst, "tol": 1e-8})


# -- 6 ----------------------------------------------------------------------


@_timed
def check_mean_identity(params=DEFAULT_PARAMS, n=100_000, seed=KS_SEED):
    quad, mcres = {}, {}
    ok_quad = ok_mc = True
    for name, p in _cases(params).items():
        for t in (0.25, 1.0, 4.0):
            exact = densities.z_second_moment(p, t)
            got = densities.moment(DensitySpec(Law.Z, p, t), 2)
            rel = abs(got / exact - 1.0)
            quad[f"{name} t={t:g}"] = rel
            ok_quad &= rel <= 1e-6
        exact = densities.z_second_moment(p, 1.0)
        z2 = mc.sample_z(p, 1.0, n, seed).values ** 2
        sigma = float(np.std(z2, ddof=1))
        dev = abs(float(z2.mean()) - exact)
        band = 4.0 * sigma / math.sqrt(n)
        mcres[f"{name} t=1"] = {"mean": float(z2.mean()), "exact": exact, "abs_dev": dev, "band_4sigma": band}
        ok_mc &= dev <= band
    return Check("6 mean identity E[Z^2]", ok_quad and ok_mc, NUMERIC if not ok_quad else STATISTICAL,
                 {"quadrature_rel_error": quad, "quad_tol": 1e-6, "monte_carlo": mcres, "n": n})


# -- 7 ----------------------------------------------------------------------


@_timed
def _time_change(params, n, steps, seeds, n_per_seed, t):
    exact = mc.sample_x(params, t, n, KS_SEED, "exact")
    euler = mc.sample_x(params, t, n, KS_SEED, "euler", n_steps=steps)
    two = mc.ks_two_sample(exact, euler)
    table = CdfTable(DensitySpec(Law.Z, params, t))
    passes = 0
    worst = 0.0
    for k in range(seeds):
        res = mc.ks_test(mc.sample_z(params, t, n_per_seed, KS_SEED + 1 + k), table)
        passes += res.passed
        worst = max(worst, res.statistic * math.sqrt(n_per_seed))
    need = math.ceil(0.95 * seeds)
    ok = two.passed and passes >= need
    return Check("7 time-change law (KS)", ok, STATISTICAL, {
        "two_sample": two.to_dict(),
        "euler_steps": steps,
        "one_sample_passes": passes,
        "one_sample_required": need,
        "seeds": seeds,
        "n_per_seed": n_per_seed,
        "max_sqrt_n_D": worst,
        "x0": params.x0,
    })


def check_time_change(params=DEFAULT_PARAMS, n=100_000, steps=2000, seeds=100, n_per_seed=100_000, t=1.0):
    return _with_budget(_time_change(params, n, steps, seeds, n_per_seed, t), 60.0)


# -- 8 ----------------------------------------------------------------------


@_timed
def check_limit(params=DEFAULT_PARAMS, x0=1e-12):
    q = np.linspace(0.1, 3.0, 200)
    pz, pp = params.with_x0(0.0), params.with_x0(x0)
    errs = {}
    for t in (0.25, 1.0, 4.0):
        errs[f"t={t:g}"] = float(np.max(np.abs(densities.rho_positive(pp, t, q) / densities.rho_zero(pz, t, q) - 1.0)))
    worst = max(errs.values())
    return Check("8 limit x0 -> 0", worst <= 1e-5, NUMERIC, {"max_rel_error": errs, "x0": x0, "tol": 1e-5})


# -- 9 ----------------------------------------------------------------------


@_timed
def check_falsification(params=DEFAULT_PARAMS, factor=1e3):
    p = _cases(params)["positive"]
    d = derive(p)

    def same_steps(rep):
        return pde.StencilPolicy(h0=rep.steps[0], levels=len(rep.steps))

    c1 = pde.residual_c1(p)
    c2 = pde.residual_c2(p)
    fp = pde.residual_fokker_planck(p)
    flipped = lambda t, q: -np.asarray(drift_forward(d, t, q))  # noqa: E731
    pairs = {
        "C1: eta + 1": (c1, pde.residual_c1(p, f=lambda t, q: eta(p, t, q) + 1.0, policy=same_steps(c1))),
        "C2: eta in place of eta_star": (c2, pde.residual_c2(p, f=lambda t, q: eta(p, t, q), policy=same_steps(c2))),
        "FP: flipped drift": (fp, pde.residual_fokker_planck(p, policy=same_steps(fp), drift=flipped)),
    }
    out = {}
    ok = True
    for name, (good, bad) in pairs.items():
        ratio = bad.residual_norms[-1] / max(good.residual_norms[-1], np.finfo(float).tiny)
        out[name] = {"h": good.steps[-1], "solution": good.residual_norms[-1],
                     "control": bad.residual_norms[-1], "ratio": ratio}
        ok &= ratio >= factor
    return Check("9 falsification controls", ok, CERTIFICATION, {"ratios": out, "min_ratio": factor})


# -- 10 ---------------------------------------------------------------------


@_timed
def check_determinism(params=DEFAULT_PARAMS, seed=42, n=20_000):
    from . import cli, io

    digests = []
    with tempfile.TemporaryDirectory() as tmp:
        pfile = Path(tmp) / "params.txt"
        pfile.write_text(io.format_params(params))
        for run in ("a", "b"):
            out = Path(tmp) / run
            code = cli.main(["simulate", "--params", str(pfile), "--law", "z", "--t", "1",
                             "--n", str(n), "--seed", str(seed), "--out", str(out), "--quiet"])
            if code != 0:
                return Check("10 determinism", False, NUMERIC, {"exit_code": code})
            digests.append({f.name: f.read_bytes() for f in sorted(out.iterdir())})
    same = digests[0] == digests[1]
    return Check("10 determinism", same, NUMERIC,
                 {"files": sorted(digests[0]), "byte_identical": same, "seed": seed, "n": n})


CHECKS = (
    check_bessel_ode,
    check_dual_zero,
    check_dual_positive,
    check_factorization,
    check_normalization,
    check_mean_identity,
    check_time_change,
    check_limit,
    check_falsification,
    check_determinism,
)


def run_all(params=DEFAULT_PARAMS, progress=None):
    results = []
    for fn in CHECKS:
        chk = fn(params)
        if progress is not None:
            progress(chk)
        results.append(chk)
    return results


def exit_code(results):
    """0 if everything passed, else the category of the first failure."""
    for chk in results:
        if not chk.passed:
            return chk.category
    return 0
