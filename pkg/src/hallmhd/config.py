"""Run configuration: YAML file parsing, CLI overrides, total validation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import yaml

from .initial_data import EPSILON_MAX, build_bump, check_resolution, GridResolutionError
from .spectral import Grid

__all__ = ["RunConfig", "ConfigError", "parse_config", "DEFAULTS"]


class ConfigError(ValueError):
    """Invalid configuration document or field value."""


DEFAULTS: dict[str, Any] = {
    "epsilon": 0.2,
    "n_per_axis": 64,
    "box_length": 16.0 * math.pi,
    "dt": 1e-3,
    "t_end": 5.0,
    "output_cadence": 100,
    "smallness_C": 1.0,
    "eta": "auto",
    "strict_linf": False,
    "hall_enabled": True,
}


@dataclass(frozen=True)
class RunConfig:
    """Deterministic experiment configuration (the pipeline is RNG-free)."""

    epsilon: float = DEFAULTS["epsilon"]
    n_per_axis: int = DEFAULTS["n_per_axis"]
    box_length: float = DEFAULTS["box_length"]
    dt: float = DEFAULTS["dt"]
    t_end: float = DEFAULTS["t_end"]
    output_cadence: int = DEFAULTS["output_cadence"]
    smallness_C: float = DEFAULTS["smallness_C"]
    eta: Union[str, float] = DEFAULTS["eta"]
    strict_linf: bool = DEFAULTS["strict_linf"]
    hall_enabled: bool = DEFAULTS["hall_enabled"]

    def validate(self) -> "RunConfig":
        """Check every invariant, naming the offending key on failure."""
        if not (0.0 < self.epsilon < EPSILON_MAX):
            raise ConfigError(
                f"epsilon: must lie in (0, (2-sqrt(2))/2 ~= {EPSILON_MAX:.7f}), got {self.epsilon}"
            )
        if self.n_per_axis < 8 or self.n_per_axis % 2 != 0:
            raise ConfigError(f"n_per_axis: must be even and >= 8, got {self.n_per_axis}")
        if not self.box_length > 0:
            raise ConfigError(f"box_length: must be positive, got {self.box_length}")
        if not self.dt > 0:
            raise ConfigError(f"dt: must be positive, got {self.dt}")
        if self.t_end < 0:
            raise ConfigError(f"t_end: must be nonnegative, got {self.t_end}")
        if self.output_cadence < 1:
            raise ConfigError(f"output_cadence: must be >= 1, got {self.output_cadence}")
        if not self.smallness_C > 0:
            raise ConfigError(f"smallness_C: must be positive, got {self.smallness_C}")
        if isinstance(self.eta, str):
            if self.eta != "auto":
                raise ConfigError(f"eta: must be 'auto' or a positive number, got {self.eta!r}")
        elif not self.eta > 0:
            raise ConfigError(f"eta: must be 'auto' or a positive number, got {self.eta}")
        # The wavevector lattice must actually sample the shell profile.
        try:
            check_resolution(Grid(self.n_per_axis, self.box_length), build_bump(self.epsilon))
        except GridResolutionError as exc:
            raise ConfigError(f"box_length/n_per_axis: {exc}") from exc
        return self

    def grid(self) -> Grid:
        return Grid(self.n_per_axis, self.box_length)


_COERCERS = {
    "epsilon": float,
    "n_per_axis": int,
    "box_length": float,
    "dt": float,
    "t_end": float,
    "output_cadence": int,
    "smallness_C": float,
    "strict_linf": bool,
    "hall_enabled": bool,
}


def _coerce(key: str, value: Any) -> Any:
    if key == "eta":
        if isinstance(value, str):
            return value
        return float(value)
    caster = _COERCERS[key]
    if caster is bool:
        if isinstance(value, bool):
            return value
        raise ConfigError(f"{key}: expected a boolean, got {value!r}")
    if caster is int and (isinstance(value, bool) or (isinstance(value, float) and not value.is_integer())):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    try:
        return caster(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: cannot interpret {value!r} as {caster.__name__}") from exc


def _load_document(source: Union[str, Path]) -> dict:
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {source}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"config parse error{where}: {exc}") from exc
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(f"config document must be a mapping, got {type(doc).__name__}")
    return doc


def parse_config(
    source: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """Build a validated RunConfig from an optional YAML file plus overrides.

    Precedence: overrides (e.g. command-line flags) beat file values beat
    defaults. Unknown keys are rejected by name; an empty or missing document
    yields the defaults.
    """
    merged = dict(DEFAULTS)
    doc = _load_document(source) if source is not None else {}
    for stage in (doc, overrides or {}):
        for key, value in stage.items():
            if value is None:
                continue
            if key not in merged:
                raise ConfigError(f"unknown configuration key {key!r}")
            merged[key] = _coerce(key, value)
    return RunConfig(**merged).validate()
