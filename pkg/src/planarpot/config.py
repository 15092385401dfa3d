"""Experiment configuration: JSON schema, validation and domain construction.

A configuration is a JSON object::

    {
      "task": "density",
      "domain": {"preset": "carleson_totik", "params": {"kmax": 4}},
      "grid": {"h": 0.0078125, "focus": [[0, 0]], "h_focus": 1e-4},
      "params": {"eps": 0.000244140625, "lam": 0.5, "n_max": 24},
      "seed": 0,
      "outputs": {"csv": "density.csv"}
    }

``domain`` is either an inline description (``ambient``, ``obstacles``,
``base_point``), a preset with parameters, or a path (relative to the
configuration file) to a JSON file holding an inline description.  Schema
violations are collected and reported together, each prefixed with its JSON
path.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import jsonschema

from . import geometry
from .exceptions import ConfigurationError, PlanarPotError
from .geometry import (
    AmbientDisk, AmbientRect, CombTeeth, CompactSet, Disk, Domain, IntervalFamily, PointCloud, Segment,
)
from .grid import GridSpec

__all__ = [
    "TASKS", "CONFIG_SCHEMA", "ConfigError", "ExperimentConfig", "parse_config", "validate_config",
    "build_domain", "build_compact", "build_grid", "build_primitive", "config_from_dict", "point",
]

TASKS = ("cap", "green", "potential", "bergman", "density", "verify")

_POINT = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_POS = {"type": "number", "exclusiveMinimum": 0}

_PRIMITIVE = {
    "type": "object",
    "required": ["type"],
    "properties": {"type": {"enum": ["disk", "segment", "points", "intervals", "comb"]}},
    "allOf": [
        {"if": {"properties": {"type": {"const": "disk"}}},
         "then": {"required": ["center", "radius"],
                  "properties": {"center": _POINT, "radius": _POS}}},
        {"if": {"properties": {"type": {"const": "segment"}}},
         "then": {"required": ["a", "b"], "properties": {"a": _POINT, "b": _POINT}}},
        {"if": {"properties": {"type": {"const": "points"}}},
         "then": {"required": ["points"],
                  "properties": {"points": {"type": "array", "items": _POINT, "minItems": 1}}}},
        {"if": {"properties": {"type": {"const": "intervals"}}},
         "then": {"required": ["origin", "direction", "log2_bounds"],
                  "properties": {"origin": _POINT, "direction": _POINT,
                                 "log2_bounds": {"type": "array", "minItems": 1, "items": {
                                     "type": "array", "items": {"type": "number"},
                                     "minItems": 2, "maxItems": 2}}}}},
        {"if": {"properties": {"type": {"const": "comb"}}},
         "then": {"required": ["origin", "direction", "lam", "gamma", "depth"],
                  "properties": {"origin": _POINT, "direction": _POINT,
                                 "lam": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                                 "gamma": _POS, "depth": {"type": "integer", "minimum": 1},
                                 "length_scale": _POS}}},
    ],
}

_AMBIENT = {
    "type": "object",
    "required": ["type"],
    "properties": {"type": {"enum": ["disk", "rect"]}},
    "allOf": [
        {"if": {"properties": {"type": {"const": "disk"}}},
         "then": {"required": ["center", "radius"], "properties": {"center": _POINT, "radius": _POS}}},
        {"if": {"properties": {"type": {"const": "rect"}}},
         "then": {"required": ["xmin", "xmax", "ymin", "ymax"],
                  "properties": {k: {"type": "number"} for k in ("xmin", "xmax", "ymin", "ymax")}}},
    ],
}

_INLINE_DOMAIN = {
    "type": "object",
    "required": ["ambient", "base_point"],
    "properties": {"ambient": _AMBIENT, "obstacles": {"type": "array", "items": _PRIMITIVE},
                   "base_point": _POINT},
    "additionalProperties": False,
}

_PRESETS = ("unit_disk", "slit_disk", "punctured_disk", "annulus", "square", "carleson_totik", "comb_domain")

_PRESET_DOMAIN = {
    "type": "object",
    "required": ["preset"],
    "properties": {"preset": {"enum": list(_PRESETS)}, "params": {"type": "object"}},
    "additionalProperties": False,
}

_LAM = {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}
_EPS = {"type": "number", "exclusiveMinimum": 0, "maximum": 1}

_TASK_PARAMS = {
    "cap": {"type": "object", "additionalProperties": False, "required": ["compact"], "properties": {
        "compact": {"type": "array", "items": _PRIMITIVE, "minItems": 1},
        "n": {"type": "integer", "minimum": 8},
        "method": {"enum": ["energy", "fekete"]},
    }},
    "green": {"type": "object", "additionalProperties": False, "properties": {
        "pole": _POINT,
        "samples": {"type": "array", "items": _POINT},
        "approach": {"type": "object", "required": ["point", "direction"], "additionalProperties": False,
                     "properties": {"point": _POINT, "direction": _POINT,
                                    "delta_min": _POS, "delta_max": _POS,
                                    "count": {"type": "integer", "minimum": 2},
                                    "model": {"enum": ["power", "logpower"]}}},
    }},
    "potential": {"type": "object", "additionalProperties": False, "required": ["compact"], "properties": {
        "compact": {"type": "array", "items": _PRIMITIVE, "minItems": 1},
        "samples": {"type": "array", "items": _POINT},
        "n": {"type": "integer", "minimum": 8},
    }},
    "bergman": {"type": "object", "additionalProperties": False, "properties": {
        "degree": {"type": "integer", "minimum": 1, "maximum": 200},
        "samples": {"type": "array", "items": _POINT, "minItems": 1},
        "distance_from": _POINT,
    }},
    "density": {"type": "object", "additionalProperties": False, "properties": {
        "eps": _EPS, "lam": _LAM, "gamma": _POS,
        "n_max": {"type": "integer", "minimum": 1, "maximum": 4096},
        "n_samples": {"type": "integer", "minimum": 1},
        "points": {"type": "array", "items": _POINT, "minItems": 1},
    }},
    "verify": {"type": "object", "additionalProperties": False, "properties": {
        "suite": {"enum": ["acceptance", "domain"]},
        "checks": {"type": "array", "items": {"type": "string", "pattern": "^AC[0-9]{2}$"}, "uniqueItems": True},
    }},
}

CONFIG_SCHEMA: Dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "planarpot experiment configuration",
    "type": "object",
    "required": ["task"],
    "additionalProperties": False,
    "properties": {
        "task": {"enum": list(TASKS)},
        "domain": {"oneOf": [_INLINE_DOMAIN, _PRESET_DOMAIN, {"type": "string", "minLength": 1}]},
        "grid": {"type": "object", "additionalProperties": False, "required": ["h"], "properties": {
            "h": _POS, "focus": {"type": "array", "items": _POINT}, "h_focus": _POS,
            "ratio": {"type": "number", "exclusiveMinimum": 1, "maximum": 2}}},
        "params": {"type": "object"},
        "seed": {"type": "integer", "minimum": 0},
        "outputs": {"type": "object", "additionalProperties": False, "properties": {
            "csv": {"type": "string", "minLength": 1}, "plot": {"type": "string", "minLength": 1},
            "report": {"type": "string", "minLength": 1}}},
    },
    "allOf": [
        {"if": {"properties": {"task": {"const": t}}, "required": ["task"]},
         "then": {"properties": {"params": _TASK_PARAMS[t]}}}
        for t in TASKS
    ] + [
        {"if": {"properties": {"task": {"enum": ["green", "potential", "bergman", "density"]}},
                "required": ["task"]},
         "then": {"required": ["domain"]}},
        {"if": {"properties": {"task": {"const": "verify"},
                               "params": {"properties": {"suite": {"const": "domain"}}, "required": ["suite"]}},
                "required": ["task", "params"]},
         "then": {"required": ["domain"]}},
    ],
}


class ConfigError(ConfigurationError):
    """Configuration rejected; ``errors`` lists every problem found."""

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass
class ExperimentConfig:
    """Validated experiment configuration.

    Attributes
    ----------
    task : str
    domain : Domain or None
    grid : GridSpec or None
    params : dict
    seed : int
    outputs : dict
        Output file names, relative to the output directory.
    raw : dict
        The validated JSON document.
    """

    task: str
    domain: Optional[Domain]
    grid: Optional[GridSpec]
    params: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    outputs: Dict[str, str] = field(default_factory=dict)
    raw: Dict[str, Any] = field(default_factory=dict, repr=False)


def point(p) -> complex:
    """Complex number from an ``[x, y]`` pair."""
    return complex(float(p[0]), float(p[1]))


def _json_path(err) -> str:
    return "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)


def _describe(err) -> str:
    if err.validator == "required":
        missing = [r for r in err.validator_value if isinstance(err.instance, dict) and r not in err.instance]
        where = _json_path(err)
        return "; ".join(f"{where}.{m}: required field is missing" for m in missing) or f"{where}: {err.message}"
    if err.validator == "oneOf" and err.context:
        # Report the alternative that got furthest instead of the generic message.
        best = max(err.context, key=lambda e: len(list(e.absolute_path)))
        return _describe(best)
    return f"{_json_path(err)}: {err.message}"


def validate_config(doc: Any) -> None:
    """Validate a configuration document against :data:`CONFIG_SCHEMA`.

    Raises
    ------
    ConfigError
        Listing every violation with its JSON path, in a deterministic order.
    """
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    messages = sorted({_describe(e) for e in validator.iter_errors(doc)})
    if messages:
        raise ConfigError(messages)


def build_primitive(d: Dict[str, Any]):
    """Geometry primitive from its JSON description."""
    kind = d["type"]
    if kind == "disk":
        return Disk(point(d["center"]), float(d["radius"]))
    if kind == "segment":
        return Segment(point(d["a"]), point(d["b"]))
    if kind == "points":
        return PointCloud(tuple(point(p) for p in d["points"]))
    if kind == "intervals":
        return IntervalFamily(point(d["origin"]), point(d["direction"]),
                              tuple((float(lo), float(hi)) for lo, hi in d["log2_bounds"]))
    if kind == "comb":
        return CombTeeth(point(d["origin"]), point(d["direction"]), float(d["lam"]), float(d["gamma"]),
                         int(d["depth"]), float(d.get("length_scale", 1.0)))
    raise ConfigError([f"unknown primitive type {kind!r}"])


def build_compact(items) -> CompactSet:
    """Compact set from a list of primitive descriptions."""
    return CompactSet(tuple(build_primitive(d) for d in items))


def build_domain(spec, base_dir: Optional[Path] = None) -> Domain:
    """Domain from an inline description, a preset, or a path to a JSON file.

    Raises
    ------
    ConfigError
        If a referenced file is missing or unreadable, or the geometry is
        rejected by the domain validation.
    """
    if isinstance(spec, str):
        path = Path(spec)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError([f"$.domain: referenced file {str(path)!r} does not exist"]) from None
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError([f"$.domain: cannot read {str(path)!r}: {exc}"]) from None
        errors = sorted({f"$.domain -> {_describe(e)}"
                         for e in jsonschema.Draft202012Validator(_INLINE_DOMAIN).iter_errors(doc)})
        if errors:
            raise ConfigError(errors)
        spec = doc
    try:
        if "preset" in spec:
            factory = getattr(geometry, spec["preset"])
            return factory(**spec.get("params", {}))
        ambient = spec["ambient"]
        if ambient["type"] == "disk":
            amb = AmbientDisk(point(ambient["center"]), float(ambient["radius"]))
        else:
            amb = AmbientRect(float(ambient["xmin"]), float(ambient["xmax"]),
                              float(ambient["ymin"]), float(ambient["ymax"]))
        obstacles = tuple(build_primitive(d) for d in spec.get("obstacles", ()))
        return Domain(amb, obstacles, point(spec["base_point"]))
    except TypeError as exc:
        raise ConfigError([f"$.domain.params: {exc}"]) from None
    except PlanarPotError as exc:
        raise ConfigError([f"$.domain: {exc}"]) from None


def build_grid(spec: Optional[Dict[str, Any]]) -> Optional[GridSpec]:
    """Solver grid from its JSON description (``None`` keeps solver defaults)."""
    if spec is None:
        return None
    try:
        return GridSpec(float(spec["h"]), tuple(point(p) for p in spec.get("focus", ())),
                        spec.get("h_focus"), float(spec.get("ratio", 1.15)))
    except PlanarPotError as exc:
        raise ConfigError([f"$.grid: {exc}"]) from None


def config_from_dict(doc: Any, base_dir: Optional[Path] = None) -> ExperimentConfig:
    """Validate ``doc`` and build the configured objects."""
    validate_config(doc)
    domain = build_domain(doc["domain"], base_dir) if "domain" in doc else None
    return ExperimentConfig(
        task=doc["task"], domain=domain, grid=build_grid(doc.get("grid")),
        params=dict(doc.get("params", {})), seed=int(doc.get("seed", 0)),
        outputs=dict(doc.get("outputs", {})), raw=doc,
    )


def parse_config(path) -> ExperimentConfig:
    """Read, validate and build a configuration file.

    Raises
    ------
    ConfigError
        If the file is unreadable, is not JSON, or violates the schema.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError([f"configuration file {str(path)!r} does not exist"]) from None
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError([f"cannot read {str(path)!r}: {exc}"]) from None
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{str(path)!r} is not valid JSON: {exc}"]) from None
    return config_from_dict(doc, path.parent)

