"""Strict run configuration: flat ``key = value`` text or JSON.

Text grammar, one entry per line::

    # comment (also allowed after a value)
    experiment = chaos-curve
    mixture    = 2:0.6, 3:0.8
    N          = 16
    t_grid     = [0, 0.125, 0.25, 0.5, 1, 2]

Values are integers, floats, bare strings or bracketed comma-separated lists.
``mixture`` takes ``p:c`` pairs with or without brackets. A file whose first
non-blank character is ``{`` is read as a JSON object with the same keys.
Unknown keys, keys that do not apply to the chosen experiment and repeated
keys are all errors.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field

from .errors import (BadDegree, DuplicateDegree, NonPositiveCoefficient, NotNormalized,
                     UnknownExperiment, UnknownKey, ValidationError)
from .mixture import SK, MixtureSpec, validate_mixture

EXPERIMENTS = ("chaos-curve", "field-curve", "slice-decay", "superconc", "barycenter",
               "conditional-overlap", "solve", "convexity-report")

COMMON_KEYS = {"experiment", "mixture", "n_samples", "master_seed", "output_dir", "exact_cap"}
EXTRA_KEYS = {
    "chaos-curve": {"N", "t_grid"},
    "convexity-report": {"N", "t_grid", "L_max"},
    "field-curve": {"N", "h_grid"},
    "slice-decay": {"N", "eps_grid"},
    "superconc": {"N_list", "s_grid"},
    "barycenter": {"N", "eps_grid"},
    "conditional-overlap": {"N", "alpha_grid", "delta_grid", "c"},
    "solve": {"N", "disorder_file", "method", "anneal_steps"},
}
REQUIRED = {name: {"N_list"} if name == "superconc" else ({"N"} if name != "solve" else set())
            for name in EXPERIMENTS}

DEFAULTS = {
    "t_grid": (0.0, 0.125, 0.25, 0.5, 1.0, 2.0),
    "h_grid": (-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0),
    "eps_grid": (0.1, 0.2, 0.3, 0.4),
    "s_grid": (1.0, 2.0, 3.0),
    "alpha_grid": (0.25, 0.5, 1.0, 2.0),
    "L_max": 6,
    "n_samples": 100,
    "master_seed": 0,
    "method": "auto",
    "anneal_steps": 100_000,
}

_LINE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")


@dataclass
class RunConfig:
    experiment: str
    mixture: MixtureSpec
    n_samples: int
    master_seed: int
    params: dict = field(default_factory=dict)
    output_dir: str | None = None
    exact_cap: int | None = None

    def echo(self) -> dict:
        """Parameters that determine the results (no output location)."""
        out = {"experiment": self.experiment, "mixture": str(self.mixture),
               "n_samples": self.n_samples, "master_seed": self.master_seed,
               "exact_cap": self.exact_cap}
        for k, v in self.params.items():
            out[k] = list(v) if isinstance(v, tuple) else v
        return out


def _scalar(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def _value(text: str):
    text = text.strip()
    if text.startswith("["):
        if not text.endswith("]"):
            raise ValueError("unterminated list")
        inner = text[1:-1].strip()
        return [] if not inner else [_scalar(x.strip()) for x in inner.split(",")]
    return _scalar(text)


def parse_text(text: str) -> dict:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise ValidationError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, val = m.group(1), m.group(2)
        if key in raw:
            raise ValidationError(key, f"repeated on line {lineno}")
        if key == "mixture":
            raw[key] = val.strip().strip("[]")
        else:
            try:
                raw[key] = _value(val)
            except ValueError as exc:
                raise ValidationError(key, str(exc)) from None
    return raw


def _mixture(value) -> MixtureSpec:
    if isinstance(value, str):
        pairs = []
        for k, item in enumerate(x for x in value.split(",") if x.strip()):
            p, sep, c = item.partition(":")
            if not sep:
                raise ValidationError(f"mixture[{k}]", f"expected 'p:c', got {item.strip()!r}")
            try:
                pairs.append((int(p), float(c)))
            except ValueError:
                raise ValidationError(f"mixture[{k}]", f"not a number pair: {item.strip()!r}") from None
    elif isinstance(value, list):
        pairs = []
        for k, item in enumerate(value):
            if isinstance(item, str):
                pairs.extend(_mixture(item).terms)
            elif isinstance(item, list) and len(item) == 2:
                pairs.append((item[0], item[1]))
            else:
                raise ValidationError(f"mixture[{k}]", "expected 'p:c' or [p, c]")
    else:
        raise ValidationError("mixture", "expected a list of p:c pairs")
    try:
        return validate_mixture(pairs)
    except (BadDegree, DuplicateDegree, NonPositiveCoefficient, NotNormalized) as exc:
        raise ValidationError("mixture", str(exc)) from None


def _int(key, v, lo=None):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValidationError(key, f"expected an integer, got {v!r}")
    if lo is not None and v < lo:
        raise ValidationError(key, f"must be >= {lo}")
    return v


def _float(key, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ValidationError(key, f"expected a finite number, got {v!r}")
    return float(v)


def _grid(key, v, check=None):
    if not isinstance(v, list):
        v = [v]
    if not v:
        raise ValidationError(key, "grid must be non-empty")
    out = []
    for k, x in enumerate(v):
        x = _float(f"{key}[{k}]", x)
        if check is not None:
            msg = check(x)
            if msg:
                raise ValidationError(f"{key}[{k}]", msg)
        out.append(x)
    return tuple(out)


def _nonneg(x):
    return "must be >= 0" if x < 0 else None


def _validate_param(key, v):
    if key == "N":
        return _int(key, v, 1)
    if key == "N_list":
        v = v if isinstance(v, list) else [v]
        if not v:
            raise ValidationError(key, "list must be non-empty")
        return tuple(_int(f"{key}[{k}]", x, 1) for k, x in enumerate(v))
    if key in ("t_grid", "alpha_grid"):
        return _grid(key, v, _nonneg)
    if key == "h_grid":
        g = _grid(key, v)
        if sorted(g) != sorted(-x for x in g):
            raise ValidationError(key, "grid must be symmetric about 0")
        return g
    if key == "eps_grid":
        return _grid(key, v, lambda x: None if 0 < x <= 0.5 else "must lie in (0, 0.5]")
    if key == "delta_grid":
        return _grid(key, v, lambda x: None if 0 < x <= 1 else "must lie in (0, 1]")
    if key == "s_grid":
        return _grid(key, v, lambda x: None if x > 0 else "must be > 0")
    if key == "L_max":
        return _int(key, v, 1)
    if key == "c":
        c = _float(key, v)
        if c <= 0:
            raise ValidationError(key, "must be > 0")
        return c
    if key == "method":
        if v not in ("auto", "exact", "anneal"):
            raise ValidationError(key, "must be one of auto, exact, anneal")
        return v
    if key == "anneal_steps":
        return _int(key, v, 1)
    if key == "disorder_file":
        if not isinstance(v, str) or not v:
            raise ValidationError(key, "expected a path")
        return v
    raise UnknownKey(f"unknown key {key!r}")


def build_config(raw: dict, experiment: str | None = None) -> RunConfig:
    """Validate a raw key/value mapping. ``experiment`` (from the command line)
    must agree with the file's ``experiment`` key when both are given."""
    file_exp = raw.get("experiment")
    if experiment is None:
        experiment = file_exp
    elif file_exp is not None and file_exp != experiment:
        raise ValidationError("experiment", f"config says {file_exp!r}, command line says {experiment!r}")
    if experiment is None:
        raise ValidationError("experiment", "missing")
    if experiment not in EXPERIMENTS:
        raise UnknownExperiment(f"unknown experiment {experiment!r}; expected one of {', '.join(EXPERIMENTS)}")

    allowed = COMMON_KEYS | EXTRA_KEYS[experiment]
    for key in raw:
        if key not in allowed:
            raise UnknownKey(f"unknown key {key!r} for experiment {experiment}")
    missing = sorted(REQUIRED[experiment] - raw.keys())
    if experiment == "solve" and "N" not in raw and "disorder_file" not in raw:
        missing.append("N")
    if missing:
        raise ValidationError(missing[0], "required")

    mixture = _mixture(raw["mixture"]) if "mixture" in raw else SK
    n_samples = _int("n_samples", raw.get("n_samples", DEFAULTS["n_samples"]), 1)
    if experiment != "solve" and n_samples < 2:
        raise ValidationError("n_samples", "must be >= 2")
    seed = _int("master_seed", raw.get("master_seed", DEFAULTS["master_seed"]), 0)
    if seed >= 2**64:
        raise ValidationError("master_seed", "must be < 2^64")
    cap = raw.get("exact_cap")
    if cap is not None:
        cap = _int("exact_cap", cap, 1)
    out_dir = raw.get("output_dir")
    if out_dir is not None and not isinstance(out_dir, str):
        raise ValidationError("output_dir", "expected a path")

    params = {}
    for key in sorted(EXTRA_KEYS[experiment]):
        if key in raw:
            params[key] = _validate_param(key, raw[key])
        elif key in DEFAULTS:
            params[key] = DEFAULTS[key]
    return RunConfig(experiment, mixture, n_samples, seed, params, out_dir, cap)


def load_config(path, experiment: str | None = None) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"line {exc.lineno}", exc.msg) from None
        if not isinstance(raw, dict):
            raise ValidationError("<root>", "expected a JSON object")
    else:
        raw = parse_text(text)
    return build_config(raw, experiment)

