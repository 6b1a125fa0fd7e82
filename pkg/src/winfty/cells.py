"""Threshold cells: the partition of the source samples by reachable targets.

At threshold omega, a sample belongs to the cell labelled by the set of
targets within cost omega of it (ties count as reachable). Cells are keyed
by bitmask; bit i set means target i is reachable. Labelling is a pure
per-sample function, so the vectorized path below is bit-identical to
calling cell_of_point sample by sample, and masses are accumulated in
canonical sample order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cost import CostSpec, cost_matrix, eval_cost
from .measures import MeasureError, TargetMeasure, max_targets


def mask_members(mask: int) -> list[int]:
    """Target indices contained in a bitmask, in increasing order."""
    out = []
    j = 0
    m = mask
    while m:
        if m & 1:
            out.append(j)
        m >>= 1
        j += 1
    return out


def mask_of(indices) -> int:
    """Bitmask with the given target indices set."""
    m = 0
    for j in indices:
        m |= 1 << j
    return m


def mask_name(mask: int, n: int) -> str:
    """Zero-padded binary name with target 0 in the rightmost position."""
    return format(mask, f"0{n}b")


@dataclass(eq=False)
class CellDecomposition:
    """Sample labels and exact cell masses at one threshold.

    masses holds only cells of positive mass, keyed by mask in increasing
    order; labels has one mask per sample in canonical sample order.
    """

    omega: float
    masses: dict
    labels: np.ndarray = field(repr=False)
    source: object = field(repr=False)
    targets: TargetMeasure = field(repr=False)

    def mass(self, mask: int) -> Fraction:
        return self.masses.get(int(mask), Fraction(0))

    def nonempty_masks(self) -> list[int]:
        return [int(m) for m in np.unique(self.labels)]

    def samples_in(self, mask: int) -> np.ndarray:
        return np.nonzero(self.labels == mask)[0]


class CostTable:
    """Precomputed sample-target costs for one instance.

    Shared by the decision procedure, bisection, and the exact threshold
    search so that repeated decompositions reuse one float comparison table.
    """

    def __init__(self, source, target: TargetMeasure, cost: CostSpec):
        if target.n > max_targets():
            raise MeasureError(
                f"{target.n} targets exceeds the subset-table cap of {max_targets()} "
                "(set WINFTY_MAX_TARGETS to raise it)")
        self.source = source
        self.target = target
        self.cost = cost
        self.costs = cost_matrix(cost, source.points_array(), target.points_array())
        self._powers = 1 << np.arange(target.n, dtype=np.int64)

    def labels(self, omega: float) -> np.ndarray:
        """Reachability bitmask of every sample at the given threshold."""
        return (self.costs <= omega).astype(np.int64) @ self._powers

    def decompose(self, omega: float) -> CellDecomposition:
        labels = self.labels(omega)
        src = self.source
        if src.is_uniform:
            values, counts = np.unique(labels, return_counts=True)
            total = src.n_samples
            masses = {int(m): Fraction(int(c), total)
                      for m, c in zip(values, counts)}
        else:
            acc: dict[int, Fraction] = {}
            for k in range(src.n_samples):
                m = int(labels[k])
                acc[m] = acc.get(m, Fraction(0)) + src.sample_mass(k)
            masses = {m: w for m, w in sorted(acc.items()) if w > 0}
        assert sum(masses.values(), Fraction(0)) == 1
        return CellDecomposition(float(omega), masses, labels, src, self.target)

    def candidates(self) -> np.ndarray:
        """Sorted distinct realized cost values; decisions can only flip here."""
        return np.unique(self.costs)

    def bounds(self) -> tuple[float, float]:
        return float(self.costs.min()), float(self.costs.max())


def cell_of_point(x, targets: TargetMeasure, cost: CostSpec, omega: float) -> int:
    """Bitmask of the targets reachable from x within cost omega (ties included)."""
    x = tuple(float(c) for c in x)
    mask = 0
    for j, y in enumerate(targets.points):
        if eval_cost(cost, x, y) <= omega:
            mask |= 1 << j
    return mask


def decompose(source, targets: TargetMeasure, cost: CostSpec,
              omega: float) -> CellDecomposition:
    """Label every sample of the source and accumulate exact cell masses."""
    return CostTable(source, targets, cost).decompose(omega)
