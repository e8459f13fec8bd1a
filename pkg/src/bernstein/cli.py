"""Command-line front end: ``bernstein {density,residual,simulate,verify}``.

Exit codes: 0 ok, 2 configuration error, 3 numerical failure,
4 certification failure, 5 statistical rejection.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import io, mc, pde, verify
from .densities import CdfTable, DensitySpec, Grid1D, Law, density_curve, eta_star
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    ModelMismatch,
    QuadratureError,
    SchemeError,
)
from .model import InitialCondition, derive, drift_forward, eta

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_CERTIFICATION = 4
EXIT_STATISTICAL = 5

SEED_ENV = "BERNSTEIN_SEED"
BESSEL_SERIES_TOL = 1e-9


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _load_params(args):
    if args.params is None:
        return verify.DEFAULT_PARAMS
    path = Path(args.params)
    if not path.is_file():
        raise ConfigError(f"params file not found: {path}")
    return io.read_params(path)


def _case_params(params, case):
    """Params matching the requested initial condition (x0 = 1 stands in for a missing positive start)."""
    if case == "zero":
        return params.with_x0(0.0)
    if case == "positive" and not params.x0 > 0:
        return params.with_x0(1.0)
    return params


def _outdir(args):
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from None
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory is not writable: {out}")
    return out


def _say(args, msg):
    if not getattr(args, "quiet", False):
        print(msg)


# -- density ----------------------------------------------------------------


def cmd_density(args):
    params = _case_params(_load_params(args), args.case)
    grid = Grid1D.parse(args.grid)
    curve = density_curve(args.law, params, args.t, grid, case=args.case,
                          with_normalization=not args.no_normalization)
    csv_path, _ = io.write_density_curve(curve, _outdir(args), args.stem)
    msg = f"wrote {csv_path} ({len(grid)} rows)"
    if curve.normalization is not None:
        msg += f", normalization {curve.normalization:.15f}"
    _say(args, msg)
    return EXIT_OK


# -- residual ---------------------------------------------------------------


def _perturbation(spec):
    kind, _, val = spec.partition(":")
    if kind != "const" or not val:
        raise ConfigError(f"bad --perturb {spec!r}; expected const:<c>")
    try:
        return float(val)
    except ValueError:
        raise ConfigError(f"bad --perturb constant {val!r}") from None


def cmd_residual(args):
    policy = pde.StencilPolicy(h0=args.h0, levels=args.levels)
    params = _case_params(_load_params(args), args.case)
    points = pde.near_origin_points() if args.near_origin else None
    shift = _perturbation(args.perturb) if args.perturb else None
    if args.eq == "bessel":
        z = np.linspace(1.0, 20.0, 20)
        rep = pde.residual_bessel_ode(args.nu, z, policy)
    elif args.eq == "c1":
        f = None if shift is None else (lambda t, q: eta(params, t, q) + shift)
        rep = pde.residual_c1(params, f, points, policy)
    elif args.eq == "c2":
        case = InitialCondition.resolve(params, args.case)
        f = None
        if shift is not None:
            f = lambda t, q: eta_star(params, t, q, case) + shift  # noqa: E731
        rep = pde.residual_c2(params, f, points, policy, case)
    else:
        if shift is not None:
            raise ConfigError("--perturb applies to c1/c2 only")
        d = derive(params)
        drift = (lambda t, q: -np.asarray(drift_forward(d, t, q))) if args.flip_drift else None
        rep = pde.residual_fokker_planck(params, points, policy, args.case, drift)
    if args.eq == "bessel":
        # exact series derivatives carry the certificate; the stencil only has to show order 2
        ok = rep.series_residual <= BESSEL_SERIES_TOL and rep.fitted_order >= pde.MIN_ORDER
    else:
        ok = rep.raw_passed()
    out = rep.to_dict()
    out["passed"] = ok
    out["raw_residual_tol"] = pde.RESIDUAL_TOL
    out["min_order"] = pde.MIN_ORDER
    path = io.write_json(out, _outdir(args) / f"residual_{args.eq}.json")
    _say(args, f"{rep.equation}: order {rep.fitted_order:.3f}, residual {rep.residual_norms[-1]:.3e} "
               f"at h={rep.steps[-1]:g}, extrapolated {rep.extrapolated:.3e} -> "
               f"{'PASS' if ok else 'FAIL'} ({path})")
    return EXIT_OK if ok else EXIT_CERTIFICATION


# -- simulate ---------------------------------------------------------------


def _seed(args):
    raw = args.seed if args.seed is not None else os.environ.get(SEED_ENV)
    if raw is None:
        raise ConfigError(f"no seed given: pass --seed or set {SEED_ENV}")
    try:
        seed = int(str(raw), 0)
    except ValueError:
        raise ConfigError(f"seed must be an integer, got {raw!r}") from None
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must lie in [0, 2^64)")
    return seed


def _draw(law, params, t, n, seed, scheme, steps, workers):
    if law == "besq":
        if scheme != "exact":
            raise SchemeError("BESQ is only sampled exactly")
        d = derive(params)
        return mc.sample_besq(d.delta, t, d.x0, n, seed, workers)
    fn = mc.sample_z if law == "z" else mc.sample_x
    return fn(params, t, n, seed, scheme, steps if scheme == "euler" else None, workers)


def cmd_simulate(args):
    seed = _seed(args)
    params = _load_params(args)
    samples = _draw(args.law, params, args.t, args.n, seed, args.scheme, args.steps, args.workers)
    out = _outdir(args)
    csv_path, _ = io.write_sample_set(samples, out, f"samples_{args.law}")
    _say(args, f"wrote {csv_path} ({samples.n} draws, seed {seed})")
    if not args.ks:
        return EXIT_OK
    if args.scheme == "exact":
        res = mc.ks_test(samples, CdfTable(DensitySpec(Law(args.law), params, args.t)))
        kind = "one-sample vs closed-form CDF"
    else:
        ref = _draw(args.law, params, args.t, args.n, seed, "exact", None, args.workers)
        res = mc.ks_two_sample(ref, samples)
        kind = "two-sample vs exact draws"
    report = res.to_dict()
    report["test"] = kind
    io.write_json(report, out / f"ks_{args.law}.json")
    _say(args, f"KS ({kind}): D={res.statistic:.5f}, critical {res.critical_value:.5f} -> "
               f"{'PASS' if res.passed else 'REJECT'}")
    return EXIT_OK if res.passed else EXIT_STATISTICAL


# -- verify -----------------------------------------------------------------


def cmd_verify(args):
    params = _load_params(args)

    def progress(chk):
        if not args.json:
            print(chk.line(), flush=True)

    results = verify.run_all(params, progress)
    code = verify.exit_code(results)
    summary = {
        "params": io.params_dict(params),
        "passed": code == 0,
        "exit_code": code,
        "checks": [c.to_dict() for c in results],
    }
    if args.out:
        io.write_json(summary, args.out)
    if args.json:
        print(json.dumps(summary, indent=2, sort_keys=True, default=io._json_default))
    else:
        print(f"{sum(c.passed for c in results)}/{len(results)} checks passed")
    return code


# -- parser -----------------------------------------------------------------


def build_parser():
    p = _Parser(prog="bernstein", description="Densities, PDE certification and simulation for the "
                                              "CIR-derived Bernstein process.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, out=True):
        sp.add_argument("--params", help="key=value file with alpha, beta, phi, lambda, x0 "
                                         "(default: built-in parameters)")
        if out:
            sp.add_argument("--out", default="out", help="output directory (default: out)")
        sp.add_argument("--quiet", action="store_true")

    d = sub.add_parser("density", help="tabulate a density or eta/eta_star/V on a grid")
    common(d)
    d.add_argument("--law", required=True, choices=["besq", "x", "z", "eta", "eta_star", "potential"])
    d.add_argument("--t", type=float, default=1.0)
    d.add_argument("--grid", default="log:0.01:5:200", help="lin:a:b:n or log:a:b:n")
    d.add_argument("--case", choices=["zero", "positive"])
    d.add_argument("--stem", help="output file stem (default: the law name)")
    d.add_argument("--no-normalization", action="store_true")
    d.set_defaults(func=cmd_density)

    r = sub.add_parser("residual", help="finite-difference certification of a closed form")
    common(r)
    r.add_argument("--eq", required=True, choices=["c1", "c2", "fp", "bessel"])
    r.add_argument("--case", choices=["zero", "positive"])
    r.add_argument("--perturb", help="add a constant to the candidate, e.g. const:1")
    r.add_argument("--flip-drift", action="store_true", help="use the sign-flipped forward drift (fp)")
    r.add_argument("--h0", type=float, help="largest relative step of a fixed ladder (default: automatic placement)")
    r.add_argument("--levels", type=int, default=5)
    r.add_argument("--nu", type=float, default=0.5, help="order for --eq bessel")
    r.add_argument("--near-origin", action="store_true", help="use the q in [0.01, 0.1] grid")
    r.set_defaults(func=cmd_residual)

    s = sub.add_parser("simulate", help="draw samples of BESQ, X or Z at a fixed time")
    common(s)
    s.add_argument("--law", default="z", choices=["besq", "x", "z"])
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--n", type=int, default=100_000)
    s.add_argument("--seed", help=f"integer seed (falls back to ${SEED_ENV})")
    s.add_argument("--scheme", default="exact", choices=["exact", "euler"])
    s.add_argument("--steps", type=int, default=2000, help="Euler steps")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--ks", action="store_true", help="run a KS test at level 0.01")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="run the full acceptance suite")
    common(v, out=False)
    v.add_argument("--json", action="store_true", help="print the summary as JSON")
    v.add_argument("--out", help="also write the JSON summary to this file")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (ConfigError, DomainError, ModelMismatch, SchemeError) as exc:
        print(f"bernstein: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, QuadratureError, FloatingPointError, OverflowError) as exc:
        print(f"bernstein: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
