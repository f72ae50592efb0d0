"""Run configuration: a versioned JSON document, validated strictly.

Schema (version 1)::

    {
      "schema_version": 1,                  # required
      "experiment": "inverse_epr",          # required, see EXPERIMENTS
      "trials": 1000,                       # positive integer
      "master_seed": 0,                     # 0 <= seed < 2**64
      "params": {...},                      # experiment-specific, see PARAMS
      "output": {"path": null, "format": "json"}
    }

Unknown keys anywhere are rejected; every error message starts with the
dotted key path it concerns.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

SCHEMA_VERSION = 1
EXPERIMENTS = (
    "inverse_epr",
    "hardy_chain",
    "bell_table",
    "mixed_measurement",
    "billiard_break",
    "billiard_echo",
)
FORMATS = ("csv", "json")
MAX_SEED = 2**64


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _int(path, v, lo=None, hi=None):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(path, f"expected an integer, got {v!r}")
    if lo is not None and v < lo:
        raise ConfigError(path, f"must be >= {lo}, got {v}")
    if hi is not None and v > hi:
        raise ConfigError(path, f"must be <= {hi}, got {v}")
    return v


def _float(path, v, lo=None, positive=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a number, got {v!r}")
    v = float(v)
    if v != v or v in (float("inf"), float("-inf")):
        raise ConfigError(path, "must be finite")
    if positive and not v > 0:
        raise ConfigError(path, f"must be > 0, got {v}")
    if lo is not None and v < lo:
        raise ConfigError(path, f"must be >= {lo}, got {v}")
    return v


def _bool(path, v):
    if not isinstance(v, bool):
        raise ConfigError(path, f"expected true or false, got {v!r}")
    return v


def _table(path, v):
    if not isinstance(v, list) or len(v) != 2:
        raise ConfigError(path, "expected [width, height]")
    return [_float(f"{path}[{i}]", x, positive=True) for i, x in enumerate(v)]


def _axes(path, v):
    if not isinstance(v, list) or not 2 <= len(v) <= 8:
        raise ConfigError(path, "expected a list of 2 to 8 axes")
    out = []
    for i, a in enumerate(v):
        p = f"{path}[{i}]"
        if isinstance(a, str):
            if a not in ("x", "y", "z"):
                raise ConfigError(p, f"axis name must be x, y or z, got {a!r}")
            out.append(a)
        elif isinstance(a, list) and len(a) == 3:
            vec = [_float(f"{p}[{k}]", c) for k, c in enumerate(a)]
            if abs(sum(c * c for c in vec) ** 0.5 - 1.0) > 1e-9:
                raise ConfigError(p, "axis vector must have unit length")
            out.append(vec)
        else:
            raise ConfigError(p, "expected 'x', 'y', 'z' or a unit 3-vector")
    return out


def _fraction(path, v):
    v = _float(path, v, lo=0.0)
    if v > 1.0:
        raise ConfigError(path, f"must be <= 1, got {v}")
    return v


def _opt_float(path, v):
    return None if v is None else _float(path, v)


def _geometry(table, cue_offset, jitter, cue_x=None, apex_x=None):
    return {
        "n_target_balls": (lambda p, v: _int(p, v, 3, 45), 15),
        "speed": (lambda p, v: _float(p, v, positive=True), 1.0),
        "radius": (lambda p, v: _float(p, v, positive=True), 1.0),
        "gap": (lambda p, v: _float(p, v, lo=0.0), 0.1),
        "table": (_table, table),
        "cue_offset": (lambda p, v: _float(p, v), cue_offset),
        "offset_jitter": (lambda p, v: _float(p, v, lo=0.0), jitter),
        # null places the cue at 1/4 and the rack apex at 3/5 of the width
        "cue_x": (_opt_float, cue_x),
        "apex_x": (_opt_float, apex_x),
    }

PARAMS = {
    "inverse_epr": {},
    "mixed_measurement": {},
    "hardy_chain": {
        "n_atoms": (lambda p, v: _int(p, v, 1, 12), 3),
        "measure_until_found": (_bool, True),
    },
    "bell_table": {
        "axes1": (_axes, ["x", "y", "z"]),
        "axes2": (_axes, ["x", "y", "z"]),
    },
    "billiard_break": {
        **_geometry([100.0, 50.0], 0.0, 0.5),
        "grid": (lambda p, v: _int(p, v, 2, 64), 8),
        "duration": (lambda p, v: _float(p, v, positive=True), 800.0),
        "sample_interval": (lambda p, v: _float(p, v, positive=True), 10.0),
        "perturbation_angle": (lambda p, v: _float(p, v), 1e-3),
        "perturbed_ball": (lambda p, v: _int(p, v, 0), 0),
        "perturb_fraction": (_fraction, 0.05),
    },
    "billiard_echo": {
        # compact table: dense enough that round-off stays small over 200 events
        **_geometry([18.0, 12.0], 0.05, 0.0, 2.0, 8.1),
        "collisions": (lambda p, v: _int(p, v, 1, 1_000_000), 200),
        "perturbation_angle": (lambda p, v: _float(p, v), 1e-3),
        "perturbed_ball": (lambda p, v: _int(p, v, 0), 0),
    },
}

_DEFAULT_TRIALS = {
    "inverse_epr": 10_000,
    "mixed_measurement": 10_000,
    "hardy_chain": 10_000,
    "bell_table": 9_000,
    "billiard_break": 30,
    "billiard_echo": 1,
}


@dataclass
class ExperimentConfig:
    experiment: str
    trials: int
    master_seed: int
    params: dict = field(default_factory=dict)
    output_path: str | None = None
    output_format: str = "json"
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "experiment": self.experiment,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "params": dict(self.params),
            "output": {"path": self.output_path, "format": self.output_format},
        }


def _reject_unknown(path: str, got: dict, allowed):
    for key in got:
        if key not in allowed:
            where = f"{path}.{key}" if path else key
            raise ConfigError(where, "unknown key")


def from_mapping(doc) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    _reject_unknown("", doc, ("schema_version", "experiment", "trials", "master_seed", "params", "output"))
    if "schema_version" not in doc:
        raise ConfigError("schema_version", "required")
    version = _int("schema_version", doc["schema_version"])
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {version}; this build reads {SCHEMA_VERSION}")
    if "experiment" not in doc:
        raise ConfigError("experiment", "required")
    experiment = doc["experiment"]
    if experiment not in EXPERIMENTS:
        raise ConfigError("experiment", f"must be one of {', '.join(EXPERIMENTS)}; got {experiment!r}")
    trials = _int("trials", doc.get("trials", _DEFAULT_TRIALS[experiment]), 1)
    seed = _int("master_seed", doc.get("master_seed", 0), 0, MAX_SEED - 1)

    raw = doc.get("params", {})
    if not isinstance(raw, dict):
        raise ConfigError("params", "expected an object")
    spec = PARAMS[experiment]
    _reject_unknown("params", raw, spec)
    params = {}
    for key, (check, default) in spec.items():
        params[key] = check(f"params.{key}", raw[key]) if key in raw else default

    out = doc.get("output", {})
    if not isinstance(out, dict):
        raise ConfigError("output", "expected an object")
    _reject_unknown("output", out, ("path", "format"))
    path = out.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigError("output.path", "expected a string or null")
    fmt = out.get("format", "json")
    if fmt not in FORMATS:
        raise ConfigError("output.format", f"must be csv or json, got {fmt!r}")
    return ExperimentConfig(experiment, trials, seed, params, path, fmt, version)


def parse_config(text: str) -> ExperimentConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"invalid JSON ({exc})") from None
    return from_mapping(doc)
