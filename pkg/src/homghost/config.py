"""Experiment configuration: JSON document, defaults and flag overrides.

Precedence, lowest to highest: built-in defaults, the JSON config file,
command-line flags. The resolved document is written next to every output
as a reproducibility manifest.
"""
from __future__ import annotations

import copy
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

from .detection import DetectionConfig
from .objects import BUILTIN_OBJECTS
from .state import PIPELINES


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


DEFAULTS: dict = {
    "grid": {"width": 48, "height": 48, "center": None},
    "object": {"name": "lambda", "path": None, "size": None, "offset": [0, 0]},
    "theta": 0.0,
    "pipeline": "no_bs",
    "scan": {"kind": "raster", "block": 1, "n": 4000, "fill": 0.5, "seed": 0},
    "detection": {"pair_rate": 1.0e5, "integration": 1.0, "seed": 0, "poisson": False, "visibility": 1.0},
    "beamsplitter": {"transmission": 0.5},
    "profile": {"kind": "uniform", "waist": None},
    "projection": "coherent",
    "output": "out",
}

_ANGLE = re.compile(r"^\s*([+-]?\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d*\.?\d+))?\s*$")


def parse_angle(value) -> float:
    """Radians from a number or a string such as ``"pi/4"``, ``"-pi/8"``, ``"3*pi/8"``."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"cannot read angle from {value!r}")
    m = _ANGLE.match(value.lower())
    if m:
        coef = m.group(1)
        k = {"": 1.0, "+": 1.0, "-": -1.0}.get(coef)
        k = float(coef) if k is None else k
        den = float(m.group(2)) if m.group(2) else 1.0
        return k * math.pi / den
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"cannot read angle from {value!r}") from None


def _merge(base: dict, over: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        if key not in base:
            raise ConfigError(f"unknown config field {where + key!r}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"config field {where + key!r} must be an object")
            out[key] = _merge(base[key], val, where + key + ".")
        else:
            out[key] = val
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    doc: dict

    @classmethod
    def from_dict(cls, doc: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
        merged = _merge(DEFAULTS, doc or {})
        if overrides:
            merged = _merge(merged, overrides)
        merged["theta"] = parse_angle(merged["theta"])
        cfg = cls(merged)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path | None, overrides: dict | None = None) -> ExperimentConfig:
        doc = {}
        if path is not None:
            try:
                doc = json.loads(Path(path).read_text())
            except OSError as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from None
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
            if not isinstance(doc, dict):
                raise ConfigError("config document must be a JSON object")
        return cls.from_dict(doc, overrides)

    def with_overrides(self, overrides: dict) -> ExperimentConfig:
        return ExperimentConfig.from_dict(self.doc, overrides)

    def validate(self) -> None:
        d = self.doc
        g = d["grid"]
        if not (isinstance(g["width"], int) and isinstance(g["height"], int) and g["width"] >= 1 and g["height"] >= 1):
            raise ConfigError("grid width and height must be positive integers")
        if g["center"] is not None and len(g["center"]) != 2:
            raise ConfigError("grid.center must be [x, y] or null")
        if d["pipeline"] not in PIPELINES:
            raise ConfigError(f"pipeline must be one of {PIPELINES}, got {d['pipeline']!r}")
        o = d["object"]
        if o["path"] is not None:
            if not Path(o["path"]).is_file():
                raise ConfigError(f"object file {o['path']} does not exist")
        elif o["name"] not in BUILTIN_OBJECTS:
            raise ConfigError(f"object.name must be one of {BUILTIN_OBJECTS}, got {o['name']!r}")
        s = d["scan"]
        if s["kind"] not in ("raster", "random"):
            raise ConfigError(f"scan.kind must be 'raster' or 'random', got {s['kind']!r}")
        if s["kind"] == "raster":
            b = s["block"]
            if not isinstance(b, int) or b < 1 or g["width"] % b or g["height"] % b:
                raise ConfigError(f"scan.block {b} must divide the grid {g['width']}x{g['height']}")
        else:
            if not isinstance(s["n"], int) or s["n"] < 1:
                raise ConfigError("scan.n must be a positive integer")
            if not 0.0 < float(s["fill"]) <= 1.0:
                raise ConfigError("scan.fill must lie in (0, 1]")
        if not isinstance(s["seed"], int) or s["seed"] < 0:
            raise ConfigError("scan.seed must be a non-negative integer")
        try:
            self.detection
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"detection: {exc}") from None
        if not 0.0 <= float(d["beamsplitter"]["transmission"]) <= 1.0:
            raise ConfigError("beamsplitter.transmission must lie in [0, 1]")
        p = d["profile"]
        if p["kind"] not in ("uniform", "gaussian"):
            raise ConfigError("profile.kind must be 'uniform' or 'gaussian'")
        if p["kind"] == "gaussian" and not (p["waist"] and float(p["waist"]) > 0):
            raise ConfigError("gaussian profile needs waist > 0")
        if d["projection"] not in ("coherent", "incoherent"):
            raise ConfigError("projection must be 'coherent' or 'incoherent'")

    @property
    def detection(self) -> DetectionConfig:
        det = self.doc["detection"]
        return DetectionConfig(
            pair_rate=float(det["pair_rate"]),
            integration=float(det["integration"]),
            seed=int(det["seed"]),
            poisson=bool(det["poisson"]),
            visibility=float(det["visibility"]),
        )

    @property
    def theta(self) -> float:
        return float(self.doc["theta"])

    @property
    def pipeline(self) -> str:
        return self.doc["pipeline"]

    @property
    def output(self) -> Path:
        return Path(self.doc["output"])

    def file_stem(self, kind: str = "ghost") -> str:
        """Output name encoding pipeline, theta in milliradians, scan and seed."""
        s = self.doc["scan"]
        mrad = int(math.floor(self.theta * 1000.0 + 0.5))
        if s["kind"] == "raster":
            scan = f"raster-b{s['block']}"
            seed = self.doc["detection"]["seed"]
        else:
            scan = f"random-n{s['n']}-f{s['fill']:g}"
            seed = s["seed"]
        stem = f"{kind}_{self.pipeline}_t{mrad}mrad_{scan}_s{seed}"
        if s["kind"] == "random" and self.doc["detection"]["poisson"]:
            stem += f"_p{self.doc['detection']['seed']}"
        return stem
