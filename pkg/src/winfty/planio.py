"""Canonical JSON export and import of solve results.

The file carries the accepted threshold, the search trace, and per-cell
masses with the exact mass sent to each target, all rationals as "a/b"
strings. Serialization is canonical (cells by mask, rows by target, fixed
key order, two-space indent), so export -> import -> export round-trips
byte for byte. The solving config is embedded so a plan file alone is
enough to re-derive the decomposition and re-render.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .graph import Matching
from .measures import parse_rational


class PlanIOError(ValueError):
    """Malformed plan file."""


@dataclass(eq=False)
class PlanFile:
    """Parsed contents of an exported plan."""

    omega: float
    iterations: int
    trace: list
    cell_masses: dict
    matching: Matching
    config: dict | None


def _payload(omega, iterations, trace, cells, config) -> dict:
    data = {
        "omega": float(omega),
        "iterations": int(iterations),
        "trace": [[float(w), bool(ok)] for w, ok in trace],
        "cells": [
            {"mask": int(mask), "mass": str(mass),
             "rows": [{"target": int(j), "mass": str(m)} for j, m in rows]}
            for mask, mass, rows in cells
        ],
    }
    if config is not None:
        data["config"] = config
    return data


def _write(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _cells_of(cell_masses: dict, matching: Matching):
    cells = []
    for mask in sorted(cell_masses):
        rows = [(j, matching.mass(mask, j)) for j in range(matching.n_targets)
                if matching.mass(mask, j) > 0]
        cells.append((mask, cell_masses[mask], rows))
    return cells


def export_plan(plan, report, path, config: dict | None = None) -> None:
    """Write a solve result; config (a canonical config dict) makes the file
    self-contained for rendering and re-solving."""
    matching = report.matching
    cells = _cells_of(plan.decomp.masses, matching)
    _write(path, _payload(report.omega, report.iterations, report.trace,
                          cells, config))


def export_imported(plan_file: PlanFile, path) -> None:
    """Re-serialize an imported plan; byte-identical to its source file."""
    cells = _cells_of(plan_file.cell_masses, plan_file.matching)
    _write(path, _payload(plan_file.omega, plan_file.iterations,
                          plan_file.trace, cells, plan_file.config))


def import_plan(path) -> PlanFile:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise PlanIOError(f"{path}: invalid JSON: {exc}") from None
    for key in ("omega", "iterations", "trace", "cells"):
        if key not in data:
            raise PlanIOError(f"{path}: missing field {key!r}")
    config = data.get("config")
    cell_masses = {}
    entries = {}
    max_bits = 1
    for i, cell in enumerate(data["cells"]):
        mask = int(cell["mask"])
        cell_masses[mask] = parse_rational(cell["mass"], f"cells[{i}].mass")
        max_bits = max(max_bits, mask.bit_length())
        for row in cell.get("rows", []):
            j = int(row["target"])
            max_bits = max(max_bits, j + 1)
            entries[(mask, j)] = parse_rational(row["mass"], f"cells[{i}] row mass")
    if config is not None and "targets" in config:
        n_targets = len(config["targets"])
    else:
        n_targets = max_bits
    trace = [(float(w), bool(ok)) for w, ok in data["trace"]]
    if len(trace) != int(data["iterations"]):
        raise PlanIOError(
            f"{path}: trace length {len(trace)} does not match iteration "
            f"count {data['iterations']}")
    matching = Matching(n_targets, entries)
    return PlanFile(float(data["omega"]), int(data["iterations"]), trace,
                    cell_masses, matching, config)
