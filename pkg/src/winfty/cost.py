"""The cost family ||x - y||_p ^ q, including p = inf.

The vectorized path accumulates dimension by dimension in the same order as
the scalar one, and every nontrivial power goes through libm's pow on both
paths (numpy's SIMD pow differs from it in the last ulp), so thresholding a
precomputed cost matrix is bit-identical to evaluating points one at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_pow_elementwise = np.frompyfunc(math.pow, 2, 1)


def _array_pow(values: np.ndarray, exponent: float) -> np.ndarray:
    if exponent == 1.0:
        return values
    return _pow_elementwise(values, exponent).astype(np.float64)


class CostError(ValueError):
    """Invalid cost parameters or mismatched point dimensions."""


@dataclass(frozen=True)
class CostSpec:
    """Parameters of the cost c(x, y) = ||x - y||_p ^ q with p > 1 or p = inf."""

    p: float
    q: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "q", float(self.q))
        if math.isnan(self.p) or not self.p > 1.0:
            raise CostError(f"p must satisfy p > 1 (or be inf), got {self.p}")
        if math.isnan(self.q) or math.isinf(self.q) or not self.q > 0.0:
            raise CostError(f"q must be a positive finite number, got {self.q}")

    @property
    def is_linf(self) -> bool:
        return math.isinf(self.p)

    @property
    def exponent(self) -> float:
        """The combined outer exponent q/p used for finite p."""
        return self.q / self.p


def eval_cost(spec: CostSpec, x, y) -> float:
    """Cost of sending x to y: (sum_i |x_i - y_i|^p)^(q/p), max-based for p = inf."""
    if len(x) != len(y):
        raise CostError(f"dimension mismatch: point in R^{len(x)} vs R^{len(y)}")
    if spec.is_linf:
        m = 0.0
        for a, b in zip(x, y):
            d = abs(a - b)
            if d > m:
                m = d
        return math.pow(m, spec.q) if spec.q != 1.0 else m
    s = math.pow(abs(x[0] - y[0]), spec.p)
    for k in range(1, len(x)):
        s += math.pow(abs(x[k] - y[k]), spec.p)
    return math.pow(s, spec.exponent) if spec.exponent != 1.0 else s


def cost_matrix(spec: CostSpec, points, targets) -> np.ndarray:
    """Pairwise costs, one row per source point and one column per target.

    Matches eval_cost bit for bit; cell labelling relies on that.
    """
    pts = np.asarray(points, dtype=float)
    tgt = np.asarray(targets, dtype=float)
    if pts.ndim != 2 or tgt.ndim != 2 or pts.shape[1] != tgt.shape[1]:
        raise CostError(
            f"dimension mismatch: points {pts.shape} vs targets {tgt.shape}")
    out = np.empty((pts.shape[0], tgt.shape[0]))
    for j in range(tgt.shape[0]):
        t = tgt[j]
        if spec.is_linf:
            c = np.abs(pts[:, 0] - t[0])
            for k in range(1, pts.shape[1]):
                np.maximum(c, np.abs(pts[:, k] - t[k]), out=c)
            c = _array_pow(c, spec.q)
        else:
            c = _array_pow(np.abs(pts[:, 0] - t[0]), spec.p)
            for k in range(1, pts.shape[1]):
                c += _array_pow(np.abs(pts[:, k] - t[k]), spec.p)
            c = _array_pow(c, spec.exponent)
        out[:, j] = c
    return out


def cost_bounds(instance) -> tuple[float, float]:
    """(min, max) of the cost over all sample-target pairs of an instance."""
    m = cost_matrix(instance.cost,
                    instance.source.points_array(),
                    instance.target.points_array())
    return float(m.min()), float(m.max())
