"""Reading and writing params files, CSV tables and JSON sidecars.

Numbers are written with 17 significant digits so they round-trip exactly,
and JSON is emitted with sorted keys, which keeps output byte-reproducible.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .model import ModelParams

PARAM_KEYS = ("alpha", "beta", "phi", "lambda", "x0")


def fmt(x) -> str:
    return "%.17g" % x


def parse_params(text: str) -> ModelParams:
    """Parse ``key=value`` lines (``#`` comments and blank lines allowed)."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in PARAM_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = float(val)
        except ValueError:
            raise ConfigError(f"line {lineno}: {key} is not a decimal number: {val!r}") from None
        if not math.isfinite(values[key]):
            raise ConfigError(f"line {lineno}: {key} must be finite")
    missing = [k for k in PARAM_KEYS if k not in values]
    if missing:
        raise ConfigError(f"missing keys: {', '.join(missing)}")
    return ModelParams(values["alpha"], values["beta"], values["phi"], values["lambda"], values["x0"])


def read_params(path) -> ModelParams:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read params file {path}: {exc}") from None
    return parse_params(text)


def format_params(params: ModelParams) -> str:
    vals = (params.alpha, params.beta, params.phi, params.lam, params.x0)
    return "".join(f"{k}={fmt(v)}\n" for k, v in zip(PARAM_KEYS, vals))


def params_dict(params: ModelParams) -> dict:
    return dict(zip(PARAM_KEYS, (params.alpha, params.beta, params.phi, params.lam, params.x0)))


def write_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def write_csv(path, header, columns) -> Path:
    path = Path(path)
    rows = zip(*columns)
    with path.open("w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def read_csv(path):
    """Return ``(header, 2-D float array)``."""
    with Path(path).open() as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def write_density_curve(curve, outdir, stem=None):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = stem or curve.law
    csv_path = write_csv(outdir / f"{stem}.csv", [curve.abscissa_name, "value"],
                         [curve.grid.points, curve.values])
    meta = {
        "t": curve.t,
        "law": curve.law,
        "params": curve.params,
        "normalization": curve.normalization,
        "normalization_tol": curve.tol,
        "grid": {"spacing": curve.grid.spacing, "n": len(curve.grid)},
    }
    json_path = write_json(meta, outdir / f"{stem}.json")
    return csv_path, json_path


def write_sample_set(samples, outdir, stem="samples"):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = write_csv(outdir / f"{stem}.csv", ["value"], [samples.values])
    json_path = write_json(samples.sidecar(), outdir / f"{stem}.json")
    return csv_path, json_path
