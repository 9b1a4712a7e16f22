"""Scenario configuration: JSON loading, schema validation and spec resolution."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema

from .core import Grid, UnitSystem, make_grid
from .errors import ConfigError
from .specs import potential_from_dict

_NUMBER = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}

SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["grid", "potential", "motion"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "units": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"hbar": _POS, "mass": _POS},
        },
        "grid": {
            "type": "object",
            "required": ["x_min", "x_max", "n_points"],
            "additionalProperties": False,
            "properties": {"x_min": _NUMBER, "x_max": _NUMBER, "n_points": {"type": "integer", "minimum": 16}},
        },
        "potential": {"type": "object", "required": ["kind"]},
        "motion": {"type": "object", "required": ["kind"]},
        "shape": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["eigen_index"],
                    "additionalProperties": False,
                    "properties": {"eigen_index": {"type": "integer", "minimum": 0}},
                },
                {
                    "type": "object",
                    "required": ["kind"],
                    "additionalProperties": False,
                    "properties": {"kind": {"const": "airy"}},
                },
                {"const": "airy"},
            ]
        },
        "initial": {
            "type": "object",
            "required": ["kind", "sigma"],
            "additionalProperties": False,
            "properties": {"kind": {"const": "gaussian"}, "sigma": _POS, "x0": _NUMBER, "k0": _NUMBER},
        },
        "time": {
            "type": "object",
            "required": ["t_final", "dt"],
            "additionalProperties": False,
            "properties": {
                "t_final": {"type": "number", "minimum": 0},
                "dt": _POS,
                "snapshot_stride": {"type": "integer", "minimum": 1},
            },
        },
        "window": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "fraction": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "density_floor": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
            },
        },
        "references": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"E_n": _NUMBER, "E_cl": _NUMBER},
        },
        "thresholds": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"shape_linf": _POS, "flux": _POS, "phase": _POS, "energy": _POS},
        },
        "consistency": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tol": _POS,
                "max_degree": {"type": "integer", "minimum": 1, "maximum": 16},
                "n_times": {"type": "integer", "minimum": 8},
            },
        },
    },
}

DEFAULT_THRESHOLDS = {"shape_linf": 1e-3, "flux": 1e-3, "phase": 1e-3, "energy": 1e-5}
DEFAULT_CONSISTENCY = {"tol": 1e-8, "max_degree": 8, "n_times": 17}
# phase lattice for `construct` when the config has no time block
DEFAULT_CONSTRUCT_TIME = {"t_final": 1.0, "dt": 1e-3}


@dataclass
class Scenario:
    raw: dict
    units: UnitSystem
    grid: Grid
    potential: Any
    thresholds: dict = field(default_factory=dict)
    consistency: dict = field(default_factory=dict)


def _reject_constant(token: str):
    raise ConfigError(f"non-finite number '{token}' in config")


def _check_finite(node, path="config"):
    if isinstance(node, float) and not math.isfinite(node):
        raise ConfigError(f"{path} is not finite")
    if isinstance(node, dict):
        for k, v in node.items():
            _check_finite(v, f"{path}.{k}")
    elif isinstance(node, list):
        for i, v in enumerate(node):
            _check_finite(v, f"{path}[{i}]")


def load_config(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        raw = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from exc
    validate_config(raw)
    return raw


def validate_config(raw: dict) -> None:
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"schema error at {where}: {exc.message}") from exc
    _check_finite(raw)
    g = raw["grid"]
    if not g["x_max"] > g["x_min"]:
        raise ConfigError("grid.x_max must exceed grid.x_min")


def scenario_from_config(raw: dict) -> Scenario:
    u = raw.get("units", {})
    units = UnitSystem(float(u.get("hbar", 1.0)), float(u.get("mass", 1.0)))
    g = raw["grid"]
    grid = make_grid(g["x_min"], g["x_max"], int(g["n_points"]))
    try:
        pot = potential_from_dict(raw["potential"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"potential: {exc}") from exc
    thresholds = {**DEFAULT_THRESHOLDS, **raw.get("thresholds", {})}
    consistency = {**DEFAULT_CONSISTENCY, **raw.get("consistency", {})}
    return Scenario(raw, units, grid, pot, thresholds, consistency)
