"""Source and target probability measures with exact rational masses.

Weights are `fractions.Fraction` end to end, so matching feasibility is
decided by exact comparisons and no mass is ever rounded. Coordinates are
ordinary floats; they only enter through cost comparisons against a
threshold. All types are immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .cost import CostSpec

Rational = Fraction

DEFAULT_MAX_TARGETS = 24

_RATIONAL_RE = re.compile(r"^[+-]?\d+(?:/\d+)?$")


class MeasureError(ValueError):
    """Invalid measure data: bad weights, wrong total mass, bad geometry."""


def max_targets() -> int:
    """Active cap on the number of targets (subset tables are O(2^N)).

    Overridable through the WINFTY_MAX_TARGETS environment variable.
    """
    value = os.environ.get("WINFTY_MAX_TARGETS", "").strip()
    return int(value) if value else DEFAULT_MAX_TARGETS


def parse_rational(text: str, where: str = "weight") -> Fraction:
    """Parse an exact rational written as 'num/den' or a plain integer string.

    Decimal strings are rejected so that no weight is silently rounded; the
    error spells out the exact fraction to write instead.
    """
    s = text.strip()
    if _RATIONAL_RE.match(s):
        num, _, den = s.partition("/")
        if den and int(den) == 0:
            raise MeasureError(f"{where}: zero denominator in {text!r}")
        return Fraction(int(num), int(den)) if den else Fraction(int(num))
    try:
        from decimal import Decimal

        exact = Fraction(Decimal(s))
    except Exception:
        raise MeasureError(
            f"{where}: {text!r} is not an exact rational; write it as 'num/den'"
        ) from None
    raise MeasureError(
        f"{where}: decimal string {text!r} is rejected to avoid silent rounding; "
        f"write it as {str(exact)!r}")


def as_rational(value, where: str = "weight") -> Fraction:
    """Coerce an int, Fraction, or 'num/den' string to Fraction; floats are refused."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise MeasureError(f"{where}: expected a rational, got a bool")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value, where)
    raise MeasureError(
        f"{where}: {value!r} ({type(value).__name__}) is not exact; "
        "pass a Fraction, an int, or a 'num/den' string")


def _point(value, where: str) -> tuple[float, ...]:
    try:
        pt = tuple(float(c) for c in value)
    except (TypeError, ValueError):
        raise MeasureError(f"{where}: {value!r} is not a coordinate vector") from None
    if not pt:
        raise MeasureError(f"{where}: empty coordinate vector")
    return pt


@dataclass
class TargetMeasure:
    """The discrete target: N labelled points with positive rational weights."""

    points: tuple
    weights: tuple

    def __post_init__(self):
        pts = tuple(_point(p, f"targets[{i}].point") for i, p in enumerate(self.points))
        ws = tuple(as_rational(w, f"targets[{i}].weight")
                   for i, w in enumerate(self.weights))
        if not pts:
            raise MeasureError("target measure needs at least one point")
        if len(pts) != len(ws):
            raise MeasureError(
                f"{len(pts)} target points but {len(ws)} weights")
        if len({len(p) for p in pts}) != 1:
            raise MeasureError("target points must share one dimension")
        if len(set(pts)) != len(pts):
            raise MeasureError("target points must be pairwise distinct")
        for i, w in enumerate(ws):
            if w <= 0:
                raise MeasureError(f"targets[{i}].weight must be positive, got {w}")
        total = sum(ws)
        if total != 1:
            raise MeasureError(
                f"target weights sum to {total}; off from 1 by {1 - total}")
        self.points = pts
        self.weights = ws

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return len(self.points[0])

    def points_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)


@dataclass
class GridSource:
    """Rasterized source on a 2D box: every pixel is one sample at its center.

    pixel_masses is None for the uniform default of 1/(nx*ny) per pixel;
    samples are indexed row-major, x fastest (k = iy*nx + ix).
    """

    box: tuple
    nx: int
    ny: int
    pixel_masses: tuple | None = None

    kind = "grid"

    def __post_init__(self):
        try:
            (x0, y0), (x1, y1) = self.box
            corners = ((float(x0), float(y0)), (float(x1), float(y1)))
        except (TypeError, ValueError):
            raise MeasureError(f"grid box {self.box!r} must be a pair of corners") from None
        if not (corners[1][0] > corners[0][0] and corners[1][1] > corners[0][1]):
            raise MeasureError(f"grid box {corners} must have positive area")
        if int(self.nx) < 1 or int(self.ny) < 1:
            raise MeasureError(f"grid resolution {self.nx}x{self.ny} must be at least 1x1")
        self.box = corners
        self.nx = int(self.nx)
        self.ny = int(self.ny)
        if self.pixel_masses is not None:
            masses = tuple(as_rational(m, f"pixel_masses[{i}]")
                           for i, m in enumerate(self.pixel_masses))
            if len(masses) != self.nx * self.ny:
                raise MeasureError(
                    f"{len(masses)} pixel masses for {self.nx * self.ny} pixels")
            if any(m < 0 for m in masses):
                raise MeasureError("pixel masses must be nonnegative")
            total = sum(masses)
            if total != 1:
                raise MeasureError(
                    f"pixel masses sum to {total}; off from 1 by {1 - total}")
            self.pixel_masses = masses

    @property
    def dim(self) -> int:
        return 2

    @property
    def n_samples(self) -> int:
        return self.nx * self.ny

    @property
    def is_uniform(self) -> bool:
        return self.pixel_masses is None

    @property
    def pixel_width(self) -> float:
        return (self.box[1][0] - self.box[0][0]) / self.nx

    @property
    def pixel_height(self) -> float:
        return (self.box[1][1] - self.box[0][1]) / self.ny

    def sample_mass(self, k: int) -> Fraction:
        if self.pixel_masses is None:
            return Fraction(1, self.n_samples)
        return self.pixel_masses[k]

    def points_array(self) -> np.ndarray:
        (x0, y0), (x1, y1) = self.box
        xs = x0 + (np.arange(self.nx) + 0.5) * ((x1 - x0) / self.nx)
        ys = y0 + (np.arange(self.ny) + 0.5) * ((y1 - y0) / self.ny)
        pts = np.empty((self.n_samples, 2))
        pts[:, 0] = np.tile(xs, self.ny)
        pts[:, 1] = np.repeat(ys, self.nx)
        return pts


@dataclass
class AtomicSource:
    """Finite atomic source measure; zero-weight atoms are kept but flagged."""

    points: tuple
    weights: tuple

    kind = "atomic"

    def __post_init__(self):
        pts = tuple(_point(p, f"atoms[{i}].point") for i, p in enumerate(self.points))
        ws = tuple(as_rational(w, f"atoms[{i}].weight")
                   for i, w in enumerate(self.weights))
        if not pts:
            raise MeasureError("atomic source needs at least one atom")
        if len(pts) != len(ws):
            raise MeasureError(f"{len(pts)} atoms but {len(ws)} weights")
        if len({len(p) for p in pts}) != 1:
            raise MeasureError("atom points must share one dimension")
        if any(w < 0 for w in ws):
            raise MeasureError("atom weights must be nonnegative")
        total = sum(ws)
        if total != 1:
            raise MeasureError(
                f"atom weights sum to {total}; off from 1 by {1 - total}")
        self.points = pts
        self.weights = ws

    @property
    def dim(self) -> int:
        return len(self.points[0])

    @property
    def n_samples(self) -> int:
        return len(self.points)

    @property
    def is_uniform(self) -> bool:
        return False

    @property
    def zero_weight_atoms(self) -> tuple[int, ...]:
        return tuple(i for i, w in enumerate(self.weights) if w == 0)

    def sample_mass(self, k: int) -> Fraction:
        return self.weights[k]

    def points_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)


@dataclass
class Instance:
    """A full problem: source measure, target measure, and cost."""

    source: GridSource | AtomicSource
    target: TargetMeasure
    cost: CostSpec

    def __post_init__(self):
        if self.source.dim != self.target.dim:
            raise MeasureError(
                f"source lives in R^{self.source.dim} but targets in R^{self.target.dim}")


def make_uniform_grid(box, nx: int, ny: int) -> GridSource:
    """Uniform source on a box: nx*ny pixels of mass 1/(nx*ny), sampled at centers."""
    return GridSource(box, nx, ny)


def make_atomic(points, weights) -> AtomicSource:
    """Atomic source from points and exact weights summing to 1."""
    return AtomicSource(tuple(points), tuple(weights))
