"""Experiment configuration: a small sectioned key-value format.

Grammar (one statement per line):

    [section]                 # section header
    key = value               # scalar: number, true/false, or bare string
    key = [a, b, c]           # array of numbers
    # comment / ; comment     # full-line or trailing comments

Unknown sections or keys are rejected with the offending line, and every
physical parameter is validated on load (SPD inertia, positive steps, unit
vectors where required).  ``serialize`` writes a canonical form such that
``parse_config(serialize(cfg)) == cfg``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np


class ParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__("line %d: %s" % (line, message))
        self.line = line
        self.message = message


class ValidationError(ValueError):
    def __init__(self, key: str, constraint: str):
        super().__init__("%s: %s" % (key, constraint))
        self.key = key
        self.constraint = constraint


SYSTEM_KINDS = (
    "suslov_det", "suslov_type1", "suslov_type2",
    "rolling_type1", "rolling_type2", "chart_type1", "chart_type2",
)
NOISE_KINDS = ("constant", "ou", "cross_chi", "cross_gamma", "cross_momentum")
POTENTIAL_KINDS = ("zero", "linear", "quadratic_ct")
OUTPUT_FORMATS = ("csv", "json")

# section -> key -> default (None marks "required or conditional")
_SCHEMA = {
    "system": {
        "kind": None,
        "inertia": [1.0, 2.0, 3.0],
        "axis": [0.0, 0.0, 1.0],
        "potential": "zero",
        "chi": [1.0, 1.0, 0.0],
        "epsilon": 0.5,
        "mass": 1.0,
        "alpha": "constant",
        "radius": 0.5,
    },
    "noise": {
        "kind": "constant",
        "theta": 1.0,
        "sigma0": 0.5,
        "g": [0.2, -0.1, 0.3],
        "eta": [0.1, 0.3, -0.2],
        "corotate": True,
    },
    "initial": {
        "omega": [0.8, 0.6, 0.0],
        "gamma": [0.2, -0.4, 0.8],
        "n": None,          # scalar (suslov type1) or unset
        "nvec": None,       # 3-vector (suslov/rolling type II keeps its own default)
        "nu": [0.0],        # rolling type2 parameters
        "r": [0.0, 1.0],    # chart systems (built-in particle)
        "s": [0.0],
        "u": [1.0, 0.5],
        "chart_n": [0.0],
    },
    "integration": {
        "dt": 1e-3,
        "t_final": 1.0,
        "seed": 42,
        "stride": 1,
    },
    "ensemble": {
        "n_paths": 100,
        "sample_every": 1,
    },
    "fp": {
        "bounds": [-3.0, 3.0],
        "cells": [64, 64, 64],
        "dt_fp": 0.0,        # 0 means automatic (positivity-safe)
        "mc_paths": 100000,
    },
    "output": {
        "directory": "out",
        "format": "csv",
        "fields": [],        # invariant columns; empty means all applicable
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    system: dict
    noise: dict
    initial: dict
    integration: dict
    ensemble: dict
    fp: dict
    output: dict

    def __eq__(self, other):
        if not isinstance(other, ExperimentConfig):
            return NotImplemented
        return _as_comparable(self) == _as_comparable(other)


def _as_comparable(cfg: ExperimentConfig):
    out = {}
    for section in _SCHEMA:
        sec = getattr(cfg, section)
        out[section] = {
            k: (tuple(v) if isinstance(v, (list, tuple, np.ndarray)) else v)
            for k, v in sec.items()
        }
    return out


def _parse_scalar(token: str, lineno: int):
    token = token.strip()
    if token.lower() in ("true", "false"):
        return token.lower() == "true"
    try:
        value = float(token)
    except ValueError:
        if not token:
            raise ParseError(lineno, "empty value")
        return token
    if value.is_integer() and ("." not in token and "e" not in token.lower()):
        return int(token)
    return value


def _parse_value(text: str, lineno: int):
    text = text.strip()
    if text.startswith("["):
        if not text.endswith("]"):
            raise ParseError(lineno, "unterminated array")
        inner = text[1:-1].strip()
        if not inner:
            return []
        return [_parse_scalar(tok, lineno) for tok in inner.split(",")]
    return _parse_scalar(text, lineno)


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate; raises ParseError / ValidationError."""
    sections = {name: dict(defaults) for name, defaults in _SCHEMA.items()}
    seen = {name: set() for name in _SCHEMA}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError(lineno, "malformed section header %r" % raw.strip())
            name = line[1:-1].strip()
            if name not in _SCHEMA:
                raise ParseError(lineno, "unknown section [%s]" % name)
            current = name
            continue
        if "=" not in line:
            raise ParseError(lineno, "expected key = value, got %r" % raw.strip())
        if current is None:
            raise ParseError(lineno, "key outside any [section]")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _SCHEMA[current]:
            raise ParseError(lineno, "unknown key %r in [%s]" % (key, current))
        sections[current][key] = _parse_value(value, lineno)
        seen[current].add(key)

    cfg = ExperimentConfig(**sections)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig):
    sys_sec = cfg.system
    kind = sys_sec.get("kind")
    if kind not in SYSTEM_KINDS:
        raise ValidationError("system.kind", "must be one of %s" % (SYSTEM_KINDS,))

    inertia = sys_sec["inertia"]
    if len(inertia) not in (3, 9):
        raise ValidationError("system.inertia", "needs 3 (diagonal) or 9 (row-major) entries")
    from .algebra import InertiaTensor, SingularInertia
    try:
        if len(inertia) == 3:
            InertiaTensor.diagonal(*inertia)
        else:
            InertiaTensor(np.array(inertia, dtype=float).reshape(3, 3))
    except SingularInertia as err:
        raise ValidationError("system.inertia", str(err)) from err

    axis = np.asarray(sys_sec["axis"], dtype=float)
    if axis.shape != (3,) or float(axis @ axis) == 0.0:
        raise ValidationError("system.axis", "must be a nonzero 3-vector")
    if sys_sec["potential"] not in POTENTIAL_KINDS:
        raise ValidationError("system.potential", "must be one of %s" % (POTENTIAL_KINDS,))
    if len(sys_sec["chi"]) != 3:
        raise ValidationError("system.chi", "must be a 3-vector")
    if sys_sec["mass"] <= 0:
        raise ValidationError("system.mass", "must be positive")
    if sys_sec["alpha"] not in ("constant", "skew"):
        raise ValidationError("system.alpha", "must be constant or skew")

    if cfg.noise["kind"] not in NOISE_KINDS:
        raise ValidationError("noise.kind", "must be one of %s" % (NOISE_KINDS,))
    for key in ("g", "eta"):
        if len(cfg.noise[key]) != 3:
            raise ValidationError("noise.%s" % key, "must be a 3-vector")

    gamma = np.asarray(cfg.initial["gamma"], dtype=float)
    if gamma.shape != (3,) or float(gamma @ gamma) == 0.0:
        raise ValidationError("initial.gamma", "must be a nonzero 3-vector")

    integ = cfg.integration
    if integ["dt"] <= 0:
        raise ValidationError("integration.dt", "must be positive")
    if integ["t_final"] <= 0:
        raise ValidationError("integration.t_final", "must be positive")
    if integ["stride"] < 1:
        raise ValidationError("integration.stride", "must be >= 1")

    if cfg.ensemble["n_paths"] < 1:
        raise ValidationError("ensemble.n_paths", "must be >= 1")
    if cfg.ensemble["sample_every"] < 1:
        raise ValidationError("ensemble.sample_every", "must be >= 1")

    bounds = cfg.fp["bounds"]
    if len(bounds) not in (2, 6):
        raise ValidationError("fp.bounds", "needs 2 entries (shared) or 6 (per axis)")
    arr = np.asarray(bounds, dtype=float).reshape(-1, 2)
    if np.any(arr[:, 1] <= arr[:, 0]):
        raise ValidationError("fp.bounds", "each (lo, hi) needs hi > lo")
    cells = cfg.fp["cells"]
    if len(cells) != 3 or any(int(c) < 2 for c in cells):
        raise ValidationError("fp.cells", "needs 3 entries, each >= 2")
    if cfg.fp["mc_paths"] < 1:
        raise ValidationError("fp.mc_paths", "must be >= 1")

    if cfg.output["format"] not in OUTPUT_FORMATS:
        raise ValidationError("output.format", "must be csv or json")


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def serialize(cfg: ExperimentConfig) -> str:
    lines = []
    for section in _SCHEMA:
        lines.append("[%s]" % section)
        for key, value in getattr(cfg, section).items():
            if value is None:
                continue
            lines.append("%s = %s" % (key, _format_value(value)))
        lines.append("")
    return "\n".join(lines)


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
