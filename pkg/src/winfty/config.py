"""JSON configuration: source, targets, cost, and solver options.

Weights travel as exact strings like "3/20"; decimal weights are rejected
so nothing is rounded on the way in. Parsed configs echo every weight back
in lowest terms through to_json_dict, which is also the canonical form
embedded in exported plans.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

from .cost import CostSpec
from .graph import TransportGraph
from .measures import (AtomicSource, GridSource, Instance, MeasureError,
                       TargetMeasure, parse_rational)

MODES = ("bisect", "exact")


class ConfigError(ValueError):
    """Malformed or inconsistent configuration data."""


@dataclass
class Config:
    instance: Instance
    tolerance: float
    mode: str
    output_dir: str

    def to_json_dict(self) -> dict:
        """Canonical JSON form; weights in lowest terms, stable key order."""
        src = self.instance.source
        if src.kind == "grid":
            source = {"type": "grid",
                      "box": [list(src.box[0]), list(src.box[1])],
                      "resolution": [src.nx, src.ny]}
            if not src.is_uniform:
                source["pixel_masses"] = [str(m) for m in src.pixel_masses]
        else:
            source = {"type": "atomic",
                      "atoms": [{"point": list(p), "weight": str(w)}
                                for p, w in zip(src.points, src.weights)]}
        tgt = self.instance.target
        return {
            "source": source,
            "targets": [{"point": list(p), "weight": str(w)}
                        for p, w in zip(tgt.points, tgt.weights)],
            "cost": {"p": _number_out(self.instance.cost.p),
                     "q": _number_out(self.instance.cost.q)},
            "tolerance": self.tolerance,
            "mode": self.mode,
            "output": self.output_dir,
        }


def _number_out(x: float):
    if math.isinf(x):
        return "inf"
    return int(x) if float(x).is_integer() else float(x)


def _weight(value, where: str) -> Fraction:
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a rational string like \"3/20\"")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value, where)
    if isinstance(value, float):
        raise ConfigError(
            f"{where}: {value!r} is a decimal number; weights must be exact "
            "strings like \"3/20\"")
    raise ConfigError(f"{where}: expected a rational string like \"3/20\"")


def _point_field(value, where: str):
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"{where}: expected a coordinate list")
    try:
        return tuple(float(c) for c in value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: {value!r} is not a coordinate list") from None


def _parse_number(value, where: str, allow_inf: bool = False) -> float:
    if isinstance(value, str):
        s = value.strip().lower()
        if allow_inf and s in ("inf", "infinity"):
            return math.inf
        try:
            return float(s)
        except ValueError:
            raise ConfigError(f"{where}: {value!r} is not a number") from None
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    raise ConfigError(f"{where}: {value!r} is not a number")


def _parse_source(data):
    if not isinstance(data, dict) or "type" not in data:
        raise ConfigError("source: expected an object with a \"type\" field")
    kind = data["type"]
    if kind == "grid":
        if "box" not in data or "resolution" not in data:
            raise ConfigError("source: a grid needs \"box\" and \"resolution\"")
        box = data["box"]
        if not (isinstance(box, list) and len(box) == 2):
            raise ConfigError("source.box: expected [[x0, y0], [x1, y1]]")
        corners = (_point_field(box[0], "source.box[0]"),
                   _point_field(box[1], "source.box[1]"))
        res = data["resolution"]
        if not (isinstance(res, list) and len(res) == 2
                and all(isinstance(v, int) and not isinstance(v, bool) for v in res)):
            raise ConfigError("source.resolution: expected [nx, ny] integers")
        masses = None
        if "pixel_masses" in data:
            masses = tuple(_weight(m, f"source.pixel_masses[{i}]")
                           for i, m in enumerate(data["pixel_masses"]))
        return GridSource(corners, res[0], res[1], masses)
    if kind == "atomic":
        atoms = data.get("atoms")
        if not isinstance(atoms, list) or not atoms:
            raise ConfigError("source.atoms: expected a non-empty list")
        points, weights = [], []
        for i, atom in enumerate(atoms):
            if not isinstance(atom, dict):
                raise ConfigError(f"source.atoms[{i}]: expected an object")
            points.append(_point_field(atom.get("point"), f"source.atoms[{i}].point"))
            weights.append(_weight(atom.get("weight"), f"source.atoms[{i}].weight"))
        return AtomicSource(tuple(points), tuple(weights))
    raise ConfigError(f"source.type: unknown variant {kind!r} (use grid or atomic)")


def _parse_targets(data) -> TargetMeasure:
    if not isinstance(data, list) or not data:
        raise ConfigError("targets: expected a non-empty list")
    points, weights = [], []
    for i, entry in enumerate(data):
        if not isinstance(entry, dict):
            raise ConfigError(f"targets[{i}]: expected an object")
        points.append(_point_field(entry.get("point"), f"targets[{i}].point"))
        weights.append(_weight(entry.get("weight"), f"targets[{i}].weight"))
    return TargetMeasure(tuple(points), tuple(weights))


def _parse_cost(data) -> CostSpec:
    if not isinstance(data, dict) or "p" not in data:
        raise ConfigError("cost: expected an object with \"p\" (and optional \"q\")")
    p = _parse_number(data["p"], "cost.p", allow_inf=True)
    q = _parse_number(data.get("q", 1), "cost.q")
    return CostSpec(p, q)


def parse_config(data) -> Config:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    source = _parse_source(data.get("source"))
    target = _parse_targets(data.get("targets"))
    cost = _parse_cost(data.get("cost"))
    tolerance = _parse_number(data.get("tolerance", 1e-6), "tolerance")
    if not tolerance > 0:
        raise ConfigError(f"tolerance must be positive, got {tolerance}")
    mode = data.get("mode", "bisect")
    if mode not in MODES:
        raise ConfigError(f"mode: {mode!r} is not one of {MODES}")
    output_dir = data.get("output", "out")
    if not isinstance(output_dir, str):
        raise ConfigError("output: expected a directory path string")
    return Config(Instance(source, target, cost), tolerance, mode, output_dir)


def load_config(path) -> Config:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return parse_config(data)


def load_graph_json(path) -> TransportGraph:
    """Read a transport graph: {"n": N, "left": {mask: "a/b"}, "right": [...]}.

    Masks are bitmask integers written as JSON object keys (strings).
    """
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or "n" not in data:
        raise ConfigError("graph file: expected {\"n\", \"left\", \"right\"}")
    try:
        left = {int(k): v for k, v in data.get("left", {}).items()}
    except ValueError:
        raise ConfigError("graph file: left masks must be integers") from None
    right = data.get("right", [])
    try:
        return TransportGraph(data["n"], left, right)
    except MeasureError as exc:
        raise ConfigError(f"graph file: {exc}") from None
