"""TOML run configuration and experiment plan files."""

from __future__ import annotations

from dataclasses import dataclass, field

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from .errors import InputError, ParameterError
from .statlab import ExperimentPlan

#: documented defaults for every section; keys outside these are rejected
DEFAULTS = {
    "synth": {"generator": "chirp", "fs": None, "freq": 300.0},
    "frame": {"s": 0.75, "red": 1, "band": None, "mother": "bump", "m": None, "d": 1.0},
    "squeeze": {"delta": 1e-2, "threshold_mode": "R", "mode": "full", "vbin": 1.0, "rows": None},
    "noise": {"kind": "white_gaussian", "variance": 0.0, "alpha": 1.0, "dispersion": 0.9,
              "loc": 1.0, "linf": 15.0, "seed": 0},
    "experiment": {"kind": None, "trials": None, "seed": 0, "output": None, "workers": None,
                   "axes": {}, "params": {}},
}

PLAN_KEYS = {"kind", "trials", "seed", "output", "workers", "axes", "params"}


@dataclass
class RunConfig:
    sections: dict = field(default_factory=lambda: {k: dict(v) for k, v in DEFAULTS.items()})

    def __getitem__(self, name):
        return self.sections[name]

    def override(self, section: str, **values):
        """Apply CLI values that were actually given (``None`` means unset)."""
        for key, val in values.items():
            if key not in DEFAULTS[section]:
                raise ParameterError(f"unknown option {section}.{key}")
            if val is not None:
                self.sections[section][key] = val


def _load_toml(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise InputError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise InputError(f"{path}: invalid TOML ({exc})") from exc


def parse_config(data: dict) -> RunConfig:
    cfg = RunConfig()
    for section, values in data.items():
        if section not in DEFAULTS:
            raise ParameterError(f"unknown config section [{section}]")
        if not isinstance(values, dict):
            raise ParameterError(f"[{section}] must be a table")
        for key, val in values.items():
            if key not in DEFAULTS[section]:
                raise ParameterError(f"unknown key {section}.{key}")
            cfg.sections[section][key] = val
    return cfg


def load_config(path) -> RunConfig:
    return parse_config(_load_toml(path))


def parse_plan(data: dict, defaults: dict | None = None) -> ExperimentPlan:
    unknown = set(data) - PLAN_KEYS
    if unknown:
        raise ParameterError(f"unknown plan keys: {sorted(unknown)}")
    merged = {k: v for k, v in (defaults or {}).items() if v is not None and v != {}}
    merged.update(data)
    if not merged.get("kind"):
        raise ParameterError("experiment plan needs a 'kind'")
    return ExperimentPlan(kind=merged["kind"], axes=merged.get("axes", {}), trials=merged.get("trials"),
                          seed=int(merged.get("seed", 0)), params=merged.get("params", {}),
                          output=merged.get("output"), workers=merged.get("workers"))


def load_plan(path, defaults: dict | None = None) -> ExperimentPlan:
    return parse_plan(_load_toml(path), defaults)
