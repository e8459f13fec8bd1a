"""Monte Carlo sampling of BESQ, the CIR process X and Z = sqrt(X).

Exact draws use the Poisson mixture of Gamma laws that represents the BESQ
transition; X follows from the time change ``X_t = e^{-lam t} Y(s)``.
An Euler scheme with full truncation is provided as an independent route.

Randomness comes from Philox (counter-based) generators, one per chunk of
``CHUNK`` draws, keyed by ``(seed, stream, chunk index)``. Output is
therefore identical regardless of how many workers process the chunks.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import kolmogorov

from .errors import DomainError, SchemeError
from .model import derive, time_factors

__all__ = [
    "CHUNK",
    "KS_CRITICAL_001",
    "SampleSet",
    "KsResult",
    "sample_besq",
    "sample_x",
    "sample_z",
    "ks_test",
    "ks_two_sample",
]

CHUNK = 1 << 16
# asymptotic Kolmogorov critical value c(0.01) = sqrt(-ln(0.005)/2)
KS_CRITICAL_001 = 1.6276

_STREAM_EXACT = 0
_STREAM_EULER = 1


@dataclass
class SampleSet:
    values: np.ndarray
    t: float
    law: str
    seed: int
    scheme: str = "exact"
    n_steps: int | None = None
    params: dict = field(default_factory=dict)

    @property
    def n(self):
        return int(self.values.size)

    def sidecar(self):
        scheme = self.scheme if self.n_steps is None else f"{self.scheme}({self.n_steps})"
        return {
            "seed": self.seed,
            "scheme": scheme,
            "n": self.n,
            "t": self.t,
            "law": self.law,
            "params": self.params,
        }


@dataclass(frozen=True)
class KsResult:
    statistic: float
    n: int
    critical_value: float
    p_value: float
    m: int | None = None

    @property
    def passed(self):
        return self.statistic <= self.critical_value

    def to_dict(self):
        return {
            "statistic": self.statistic,
            "n": self.n,
            "m": self.m,
            "p_threshold": self.critical_value,
            "p_value": self.p_value,
            "passed": self.passed,
        }


def _check_seed(seed):
    if not isinstance(seed, (int, np.integer)) or not 0 <= int(seed) < 2**64:
        raise DomainError(f"seed must be an integer in [0, 2^64), got {seed!r}")
    return int(seed)


def _chunked(n, seed, stream, draw, workers):
    """Run ``draw(rng, size)`` over chunks and concatenate in chunk order."""
    if n < 1:
        raise DomainError("n must be >= 1")
    seed = _check_seed(seed)
    sizes = [min(CHUNK, n - i) for i in range(0, n, CHUNK)]

    def job(k):
        ss = np.random.SeedSequence(seed, spawn_key=(stream, k))
        return draw(np.random.Generator(np.random.Philox(ss)), sizes[k])

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    else:
        parts = [job(k) for k in range(len(sizes))]
    return np.concatenate(parts)


def _mixture_draw(shape, poisson_mean, scale):
    """``scale * Gamma(shape + N)`` with ``N ~ Poisson(poisson_mean)``."""

    def draw(rng, size):
        if poisson_mean == 0:
            return scale * rng.gamma(shape, 1.0, size)
        k = rng.poisson(poisson_mean, size)
        return scale * rng.gamma(shape + k, 1.0)

    return draw


def sample_besq(delta, t, x0, n, seed, workers=1) -> SampleSet:
    """Exact draws of ``Y_t`` for BESQ of dimension ``delta`` started at ``x0``."""
    if not delta > 0 or not t > 0 or not x0 >= 0:
        raise DomainError("need delta > 0, t > 0, x0 >= 0")
    vals = _chunked(n, seed, _STREAM_EXACT, _mixture_draw(0.5 * delta, x0 / (2.0 * t), 2.0 * t), workers)
    return SampleSet(vals, float(t), "besq", int(seed), "exact",
                     params={"delta": float(delta), "x0": float(x0)})


def _euler_draw(d, t, n_steps):
    dt = t / n_steps
    sq = math.sqrt(dt)
    mean_rev = d.delta * d.alpha**2 / 4.0  # alpha * phi_tilde
    vol = abs(d.alpha)

    def draw(rng, size):
        x = np.full(size, d.x0)
        for _ in range(n_steps):
            xp = np.maximum(x, 0.0)
            x = x + (mean_rev - d.lam * xp) * dt + vol * np.sqrt(xp) * sq * rng.standard_normal(size)
        return np.maximum(x, 0.0)

    return draw


def _params_dict(params):
    d = derive(params)
    out = {"alpha": d.alpha, "lambda": d.lam, "x0": d.x0, "delta": d.delta}
    for k in ("beta", "phi"):
        if hasattr(params, k):
            out[k] = getattr(params, k)
    return out


def sample_x(params, t, n, seed, scheme="exact", n_steps=None, workers=1) -> SampleSet:
    """Draws of the CIR value ``X_t``.

    ``scheme="exact"`` maps BESQ draws at the clock ``s`` through
    ``X_t = e^{-lam t} Y(s)``. ``scheme="euler"`` integrates
    ``dX = (alpha phi_tilde - lam X) dt + alpha sqrt(X) dw`` with full
    truncation over ``n_steps`` uniform steps.
    """
    d = derive(params)
    if not t > 0:
        raise DomainError("t must be > 0")
    if scheme == "exact":
        # e^{-lam t} * BESQ draw at clock s: scale 2 s e^{-lam t}, Poisson mean x0/(2s)
        tf = time_factors(d, float(t))
        a2 = d.alpha**2
        scale = -a2 * math.expm1(-d.lam * t) / (2.0 * d.lam)
        draw = _mixture_draw(0.5 * d.delta, 2.0 * float(tf.r) * d.x0 / a2, scale)
        vals = _chunked(n, seed, _STREAM_EXACT, draw, workers)
        n_steps = None
    elif scheme == "euler":
        if n_steps is None or int(n_steps) < 1:
            raise SchemeError("Euler scheme needs n_steps >= 1")
        n_steps = int(n_steps)
        vals = _chunked(n, seed, _STREAM_EULER, _euler_draw(d, float(t), n_steps), workers)
    else:
        raise SchemeError(f"unknown scheme {scheme!r}")
    return SampleSet(vals, float(t), "x", int(seed), scheme, n_steps, _params_dict(params))


def sample_z(params, t, n, seed, scheme="exact", n_steps=None, workers=1) -> SampleSet:
    """Draws of ``Z_t = sqrt(X_t)``."""
    xs = sample_x(params, t, n, seed, scheme, n_steps, workers)
    xs.values = np.sqrt(xs.values)
    xs.law = "z"
    return xs


def ks_test(samples, cdf) -> KsResult:
    """One-sample Kolmogorov-Smirnov test at level 0.01 (asymptotic critical value)."""
    x = np.sort(np.asarray(getattr(samples, "values", samples), dtype=float))
    n = x.size
    if n < 50:
        raise DomainError("ks_test needs at least 50 samples")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    stat = float(max(np.max(i / n - f), np.max(f - (i - 1) / n), 0.0))
    return KsResult(stat, n, KS_CRITICAL_001 / math.sqrt(n), float(kolmogorov(math.sqrt(n) * stat)))


def ks_two_sample(a, b) -> KsResult:
    """Two-sample Kolmogorov-Smirnov test at level 0.01."""
    x = np.sort(np.asarray(getattr(a, "values", a), dtype=float))
    y = np.sort(np.asarray(getattr(b, "values", b), dtype=float))
    n, m = x.size, y.size
    if min(n, m) < 50:
        raise DomainError("ks_two_sample needs at least 50 samples per side")
    grid = np.concatenate((x, y))
    fx = np.searchsorted(x, grid, side="right") / n
    fy = np.searchsorted(y, grid, side="right") / m
    stat = float(np.max(np.abs(fx - fy)))
    en = math.sqrt(n * m / (n + m))
    return KsResult(stat, n, KS_CRITICAL_001 / en, float(kolmogorov(en * stat)), m)
