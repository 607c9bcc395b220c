"""Flat ``key = value`` run configuration.

One assignment per line; ``#`` starts a comment. Lists are comma separated.
A JSON run summary written by the CLI is also accepted: its ``config`` object
is read back verbatim, which regenerates the same run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .special import bessel_zero

REGIMES = ("A", "B", "C", "D", "kitaev-fermion", "validate")

_MODEL_KEYS = {
    "A": {"g_left", "g_right", "kappa1", "kappa2", "kappa3", "kappa4", "lambda", "gamma", "residual_stokes"},
    "B": {"g_left", "g_right", "kappa1", "kappa2", "lambda", "residual_stokes"},
    "C": {"g_c", "pairing_left", "pairing_right"},
    "D": {"g_left", "g_right", "t_eff"},
    "kitaev-fermion": {"t_hop", "delta"},
    "validate": {
        "g_left", "g_right", "validate_scheme", "nu_list", "kappa_anti", "kappa_stokes", "t_end", "tol",
    },
}
_GENERIC_KEYS = {
    "regime", "sites", "format", "task",
    "gap_window", "ipr_threshold", "edge_fraction",
    "initial_site", "t_max", "t_points", "window",
    "sweep_param", "sweep_values", "sweep_range", "sweep_points",
}
_ALL_KEYS = _GENERIC_KEYS.union(*_MODEL_KEYS.values())

_FLOAT_LISTS = {
    "g_left", "g_right", "kappa1", "kappa2", "kappa3", "kappa4", "lambda", "gamma",
    "pairing_left", "pairing_right", "t_eff", "nu_list", "window", "sweep_values", "sweep_range",
}
_FLOATS = {"g_c", "t_hop", "delta", "edge_fraction", "t_max", "kappa_anti", "kappa_stokes", "t_end", "tol"}
_INTS = {"sites", "initial_site", "t_points", "sweep_points"}
_BOOLS = {"residual_stokes"}

DEFAULTS = {
    "regime": "B",
    "sites": "100",
    "format": "csv",
    "g_left": "-0.25",
    "g_right": "0.5",
    "residual_stokes": "false",
    "g_c": "0.5",
    "pairing_left": "0.2",
    "pairing_right": "0.2",
    "t_eff": "0",
    "t_hop": "0.5",
    "delta": "0.2",
    "gap_window": "auto",
    "ipr_threshold": "auto",
    "edge_fraction": "0.1",
    "initial_site": "1",
    "t_max": "100",
    "t_points": "1001",
    "validate_scheme": "A",
    "nu_list": "20, 40",
    "kappa_anti": "0.35",
    "kappa_stokes": "first-zero",
    "t_end": "5",
    "tol": "1e-6",
}


# regime-specific overrides of DEFAULTS
REGIME_DEFAULTS = {
    "validate": {"sites": "5", "g_left": "-0.5", "g_right": "1.0", "t_points": "51"},
}


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


def parse_text(text: str) -> dict:
    """Parse ``key = value`` lines into a dict of strings."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def load(path) -> dict:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        cfg = doc.get("config", doc)
        if not isinstance(cfg, dict):
            raise ConfigError(f"{path}: 'config' must be an object")
        return {str(k): str(v) for k, v in cfg.items()}
    return parse_text(text)


def _float_list(key, value) -> np.ndarray:
    try:
        vals = [float(x) for x in value.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"{key}: not a number list: {value!r}") from exc
    if not vals:
        raise ConfigError(f"{key}: empty list")
    return np.array(vals)


@dataclass
class RunConfig:
    """Validated configuration; ``raw`` keeps the user-supplied strings."""

    raw: dict
    values: dict = field(default_factory=dict)
    sweep: tuple | None = None

    @classmethod
    def from_mapping(cls, mapping: dict) -> "RunConfig":
        raw = {k.lower(): str(v).strip() for k, v in mapping.items()}
        unknown = sorted(set(raw) - _ALL_KEYS)
        if unknown:
            raise ConfigError(f"unknown keys: {', '.join(unknown)}")
        regime = raw.get("regime", DEFAULTS["regime"])
        if regime not in REGIMES:
            raise ConfigError(f"regime must be one of {REGIMES}, got {regime!r}")
        foreign = sorted(k for k in raw if k not in _GENERIC_KEYS and k not in _MODEL_KEYS[regime])
        if foreign:
            raise ConfigError(f"keys not used by regime {regime}: {', '.join(foreign)}")
        cfg = cls(raw)
        cfg._resolve()
        return cfg

    def get_raw(self, key: str) -> str | None:
        if key in self.raw:
            return self.raw[key]
        regime = self.raw.get("regime", DEFAULTS["regime"])
        return REGIME_DEFAULTS.get(regime, {}).get(key, DEFAULTS.get(key))

    def _convert(self, key, value):
        if value is None:
            return None
        if key in _FLOAT_LISTS:
            return _float_list(key, value)
        if key in _FLOATS:
            if key == "kappa_stokes" and value == "first-zero":
                return bessel_zero(2, 1)
            try:
                return float(value)
            except ValueError as exc:
                raise ConfigError(f"{key}: not a number: {value!r}") from exc
        if key in _INTS:
            try:
                return int(value)
            except ValueError as exc:
                raise ConfigError(f"{key}: not an integer: {value!r}") from exc
        if key in _BOOLS:
            low = value.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ConfigError(f"{key}: not a boolean: {value!r}")
            return low in ("true", "1", "yes")
        if key in ("gap_window", "ipr_threshold"):
            if value == "auto":
                return None
            try:
                return float(value)
            except ValueError as exc:
                raise ConfigError(f"{key}: not a number or 'auto': {value!r}") from exc
        return value

    def _resolve(self):
        keys = set(DEFAULTS) | set(self.raw)
        self.values = {k: self._convert(k, self.get_raw(k)) for k in sorted(keys)}
        v = self.values
        if v["sites"] < 2:
            raise ConfigError("sites must be >= 2")
        if v["format"] not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if v["t_points"] < 2:
            raise ConfigError("t_points must be >= 2")
        if not 0 < v["edge_fraction"] <= 0.5:
            raise ConfigError("edge_fraction must lie in (0, 0.5]")
        if not 1 <= v["initial_site"] <= v["sites"]:
            raise ConfigError("initial_site must lie in 1..sites")
        if "window" in self.raw and (v["window"].size != 2 or v["window"][1] <= v["window"][0]):
            raise ConfigError("window must be 'start, stop' with start < stop")
        if v.get("validate_scheme") not in ("A", "B"):
            raise ConfigError("validate_scheme must be A or B")
        if self.regime == "A" and "lambda" not in self.raw and not {"kappa1", "kappa3"} <= set(self.raw):
            raise ConfigError("regime A needs kappa1 and kappa3, or lambda and gamma")
        if ("lambda" in self.raw) != ("gamma" in self.raw) and self.regime == "A":
            raise ConfigError("lambda and gamma must be given together")
        self._resolve_sweep()

    def _resolve_sweep(self):
        v = self.values
        param = v.get("sweep_param")
        has_vals = v.get("sweep_values") is not None
        has_range = v.get("sweep_range") is not None
        if param is None:
            if has_vals or has_range:
                raise ConfigError("sweep values given without sweep_param")
            self.sweep = None
            return
        if has_vals == has_range:
            raise ConfigError("give exactly one of sweep_values or sweep_range")
        allowed = (_MODEL_KEYS[self.regime] & (_FLOATS | _FLOAT_LISTS)) | {"gap_window"}
        if param not in allowed:
            raise ConfigError(f"cannot sweep {param!r} in regime {self.regime}")
        if has_range:
            rng = v["sweep_range"]
            n = v.get("sweep_points")
            if rng.size != 2 or n is None or n < 1:
                raise ConfigError("sweep_range needs 'start, stop' and sweep_points >= 1")
            values = np.linspace(rng[0], rng[1], n)
        else:
            values = v["sweep_values"]
        self.sweep = (param, [float(x) for x in values])

    @property
    def regime(self) -> str:
        return self.get_raw("regime")

    def __getitem__(self, key):
        return self.values[key]

    def with_value(self, key: str, value: float) -> "RunConfig":
        """Copy with one key overridden and the sweep axis removed."""
        raw = {k: s for k, s in self.raw.items() if not k.startswith("sweep_")}
        raw[key] = repr(float(value))
        return RunConfig.from_mapping(raw)

    def normalized(self) -> dict:
        """User-supplied keys in sorted order, for summaries and round trips."""
        return {k: self.raw[k] for k in sorted(self.raw)}
