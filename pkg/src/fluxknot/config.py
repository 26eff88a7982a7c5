"""Run configuration: defaults, INI files and command-line overrides.

A configuration is a flat mapping of dotted keys (``tube.length``,
``dynamo.lam``...). Config files are INI files whose section names give the
prefix::

    [tube]
    length = 12.566370614359172
    linking = 1

Every key has a command-line flag and flags take precedence over the file.
Unknown keys are rejected.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math

from .errors import ConfigError

HELIX_LENGTH = 2 * math.pi * math.sqrt(2)

# value None = no default (must be given when a subcommand needs it)
DEFAULTS = {
    "scenario.name": "helical",
    "curve.preset": None,
    "curve.a": 1.0,
    "curve.c": 1.0,
    "curve.turns": 1.0,
    "curve.p": 2,
    "curve.q": 3,
    "curve.R_major": 2.0,
    "curve.r_minor": 1.0,
    "curve.n_samples": 33,
    "curve.h": 0.0,
    "shape.preset": "modulated",
    "shape.a": 0.3,
    "shape.r0": 0.05,
    "shape.eps_s": 0.2,
    "shape.k_s": 1.0,
    "shape.eps_phi": 0.1,
    "shape.m": 2,
    "shape.R0": 1.0,
    "shape.c0": 0.1,
    "shape.rate": 1.0,
    "tube.length": HELIX_LENGTH,
    "tube.linking": 1,
    "tube.kappa0": 0.5,
    "tube.tau0": 0.5,
    "grid.n_s": 9,
    "grid.n_chi": 5,
    "grid.n_phi": 8,
    "grid.chi_min": 0.1,
    "grid.chi_max": 1.0,
    "quadrature.rule": "simpson",
    "quadrature.n_s": 32,
    "quadrature.n_chi": 32,
    "quadrature.n_phi": 32,
    "energy.b": 0.0,
    "energy.levels": "0.25,0.5,0.75,1.0",
    "energy.B3_sq_mean": 1.0,
    "energy.epsilon_mode": "as-printed",
    "dynamo.lam": 0.5,
    "dynamo.v1": 1.0,
    "dynamo.v3": 1.0,
    "dynamo.kappa0": 0.5,
    "dynamo.B0": 1.0,
    "dynamo.A0": -0.1,
    "dynamo.R0": 1.0,
    "dynamo.theta": 0.0,
    "dynamo.s_max": 10.0,
    "dynamo.n_samples": 41,
    "dynamo.t0": 0.0,
    "dynamo.t1": 1.0,
    "dynamo.mode": "exact",
}

TYPES = {
    "curve.preset": str,
    "curve.p": int,
    "curve.q": int,
    "curve.n_samples": int,
    "shape.preset": str,
    "shape.m": int,
    "tube.linking": int,
    "grid.n_s": int,
    "grid.n_chi": int,
    "grid.n_phi": int,
    "quadrature.rule": str,
    "quadrature.n_s": int,
    "quadrature.n_chi": int,
    "quadrature.n_phi": int,
    "energy.levels": str,
    "energy.epsilon_mode": str,
    "dynamo.n_samples": int,
    "dynamo.mode": str,
    "scenario.name": str,
}

CHOICES = {
    "curve.preset": ("line", "circle", "helix", "torus_knot"),
    "shape.preset": ("constant", "linear_in_chi", "modulated", "exponential_in_chi"),
    "quadrature.rule": ("simpson", "gauss"),
    "energy.epsilon_mode": ("as-printed", "one-third"),
    "dynamo.mode": ("printed", "exact", "as-printed"),
}

SHAPE_PARAMS = {
    "constant": ("R0",),
    "linear_in_chi": ("a", "r0"),
    "modulated": ("a", "r0", "eps_s", "k_s", "eps_phi", "m"),
    "exponential_in_chi": ("c0", "rate"),
}

CURVE_PARAMS = {
    "line": (),
    "circle": ("a",),
    "helix": ("a", "c", "turns"),
    "torus_knot": ("p", "q", "R_major", "r_minor"),
}


def key_type(key):
    return TYPES.get(key, float)


def coerce(key, value):
    if key not in DEFAULTS:
        raise ConfigError(f"unknown config key {key!r}")
    if value is None:
        return None
    typ = key_type(key)
    try:
        if typ is int:
            f = float(value)
            if f != int(f):
                raise ValueError
            out = int(f)
        elif typ is float:
            out = float(value)
            if not math.isfinite(out):
                raise ValueError
        else:
            out = str(value).strip()
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected {typ.__name__}, got {value!r}")
    if key in CHOICES and out not in CHOICES[key]:
        raise ConfigError(f"{key}: {out!r} is not one of {list(CHOICES[key])}")
    return out


def read_file(path) -> dict:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}")
    raw = {f"{sec}.{k}": v for sec in parser.sections() for k, v in parser.items(sec)}
    unknown = sorted(k for k in raw if k not in DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys in {path}: {', '.join(unknown)}")
    return raw


def effective_config(file_values=None, overrides=None) -> dict:
    """Defaults, then file values, then overrides; all coerced and validated."""
    cfg = dict(DEFAULTS)
    for source in (file_values or {}, overrides or {}):
        for k, v in source.items():
            if v is not None:
                cfg[k] = v
    cfg = {k: coerce(k, v) for k, v in cfg.items()}
    _validate(cfg)
    return cfg


def _validate(cfg):
    errors = []
    positive = ["tube.length", "dynamo.v1", "dynamo.v3", "dynamo.R0", "dynamo.s_max"]
    for k in positive:
        if not cfg[k] > 0:
            errors.append(f"{k} must be positive, got {cfg[k]}")
    for k in ("grid.n_s", "grid.n_chi", "grid.n_phi"):
        if cfg[k] < 1:
            errors.append(f"{k} must be >= 1, got {cfg[k]}")
    if cfg["dynamo.n_samples"] < 2:
        errors.append(f"dynamo.n_samples must be >= 2, got {cfg['dynamo.n_samples']}")
    if cfg["curve.n_samples"] < 1:
        errors.append(f"curve.n_samples must be >= 1, got {cfg['curve.n_samples']}")
    if cfg["curve.h"] < 0:
        errors.append(f"curve.h must be >= 0 (0 selects the default), got {cfg['curve.h']}")
    try:
        levels(cfg)
    except ConfigError as exc:
        errors.append(str(exc))
    if errors:
        raise ConfigError("; ".join(errors))


def levels(cfg):
    try:
        vals = [float(x) for x in cfg["energy.levels"].split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"energy.levels: expected comma-separated numbers, got {cfg['energy.levels']!r}")
    if not vals or any(not 0 <= v <= 1 for v in vals):
        raise ConfigError(f"energy.levels: values must lie in [0, 1], got {cfg['energy.levels']!r}")
    return vals


def section(cfg, prefix, names):
    return {n: cfg[f"{prefix}.{n}"] for n in names}


def config_hash(cfg) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()
