"""Acceptance criteria 1-10, one test each.

Every test records a single ``[PASS]``/``[FAIL] criterion N`` line, printed
in an "acceptance criteria" section at the end of the pytest run, and asserts
the measured quantities against the stated tolerances directly, so a change
to a pass flag inside :mod:`bernstein.verify` cannot hide a regression.
"""
import math

import pytest

from bernstein import pde, verify
from conftest import ACCEPTANCE_LINES


def _report(n, chk, detail):
    line = f"[{'PASS' if chk.passed else 'FAIL'}] criterion {n}: {chk.name[2:].strip()} | {detail} | {chk.runtime:.2f} s"
    ACCEPTANCE_LINES.append(line)
    print(line)


def test_criterion_01_bessel_ode_residual():
    chk = verify.check_bessel_ode()
    m = chk.measured
    _report(1, chk, f"max scaled residual {m['max_scaled_residual']:.2e} (tol 1e-9)")
    assert m["grid"] == [6, 20]
    assert m["max_scaled_residual"] <= 1e-9
    assert chk.runtime < 1.0
    assert chk.passed


def _certified(rep):
    assert rep["fitted_order"] >= 1.8
    assert rep["extrapolated"] <= 1e-6


def test_criterion_02_dual_equation_zero_start():
    chk = verify.check_dual_zero()
    m = chk.measured
    _report(2, chk, f"C2 order {m['c2_zero']['fitted_order']:.3f}, extrapolated {m['c2_zero']['extrapolated']:.2e}; "
                    f"C1 order {m['c1']['fitted_order']:.3f}")
    _certified(m["c2_zero"])
    _certified(m["c1"])
    assert chk.runtime < 5.0
    assert chk.passed


def test_criterion_03_dual_equation_positive_start():
    chk = verify.check_dual_positive()
    m = chk.measured
    _report(3, chk, f"order {m['c2_positive']['fitted_order']:.3f}, extrapolated {m['c2_positive']['extrapolated']:.2e}, "
                    f"x0={m['x0']:g}")
    _certified(m["c2_positive"])
    assert chk.runtime < 10.0
    assert chk.passed


def test_criterion_04_factorization():
    chk = verify.check_factorization()
    errs = chk.measured["max_rel_error"]
    _report(4, chk, ", ".join(f"{k} {v:.1e}" for k, v in errs.items()) + " (tol 1e-12)")
    assert set(errs) == {"zero", "positive"}
    assert max(errs.values()) <= 1e-12
    assert chk.passed


def test_criterion_05_normalization():
    chk = verify.check_normalization()
    m = chk.measured
    _report(5, chk, f"max |mass - 1| {m['max_abs_error']:.1e} over {len(m['abs_error'])} cases (tol 1e-8)")
    assert len(m["abs_error"]) == 12
    assert all(e <= 1e-8 for e in m["abs_error"].values())
    assert chk.passed


def test_criterion_06_mean_identity():
    chk = verify.check_mean_identity()
    m = chk.measured
    worst = max(m["quadrature_rel_error"].values())
    mcs = m["monte_carlo"]
    _report(6, chk, f"quadrature rel {worst:.1e} (tol 1e-6); MC |dev|/band "
                    + ", ".join(f"{k} {v['abs_dev'] / v['band_4sigma']:.2f}" for k, v in mcs.items()))
    assert worst <= 1e-6
    assert m["n"] == 100_000
    assert all(v["abs_dev"] <= v["band_4sigma"] for v in mcs.values())
    assert chk.passed


def test_criterion_07_time_change_law():
    chk = verify.check_time_change()
    m = chk.measured
    two = m["two_sample"]
    _report(7, chk, f"two-sample D {two['statistic']:.5f} vs {two['p_threshold']:.5f}; "
                    f"one-sample {m['one_sample_passes']}/{m['seeds']} seeds pass (need 95)")
    assert two["n"] == two["m"] == 100_000 and m["euler_steps"] == 2000
    assert two["statistic"] <= 1.6276 / math.sqrt(two["n"] * two["m"] / (two["n"] + two["m"]))
    assert m["seeds"] == 100 and m["one_sample_passes"] >= 95
    assert chk.runtime < 60.0
    assert chk.passed


def test_criterion_08_limit_x0_to_zero():
    chk = verify.check_limit()
    errs = chk.measured["max_rel_error"]
    _report(8, chk, ", ".join(f"{k} {v:.1e}" for k, v in errs.items()) + " (tol 1e-5)")
    assert chk.measured["x0"] == 1e-12
    assert max(errs.values()) <= 1e-5
    assert chk.passed


def test_criterion_09_falsification():
    chk = verify.check_falsification()
    ratios = chk.measured["ratios"]
    _report(9, chk, ", ".join(f"{k} ratio {v['ratio']:.1e}" for k, v in ratios.items()) + " (need >= 1e3)")
    assert len(ratios) == 3
    assert all(v["ratio"] >= 1e3 for v in ratios.values())
    assert all(v["control"] > pde.RESIDUAL_TOL for v in ratios.values())
    assert chk.passed


def test_criterion_10_determinism():
    chk = verify.check_determinism()
    _report(10, chk, f"files {chk.measured.get('files')} byte-identical: {chk.passed}")
    assert chk.passed


@pytest.mark.parametrize("bad", [verify.Check("x", False, verify.STATISTICAL), verify.Check("y", False, verify.NUMERIC)])
def test_exit_code_is_first_failure(bad):
    ok = verify.Check("ok", True, verify.CERTIFICATION)
    assert verify.exit_code([ok, ok]) == 0
    assert verify.exit_code([ok, bad, verify.Check("z", False, verify.CERTIFICATION)]) == bad.category
