"""Realizing arbitrary transport graphs as worst-case transport instances.

The p-norm gadget places one atom per target subset so that, for every
threshold inside a guaranteed gap below 1, each atom reaches exactly its
subset. The optimum of the resulting instance can therefore never fall
strictly inside the gap: it is at most the gap's lower end when the graph
has a perfect matching and at least 1 otherwise, so solving the instance
to better than half the gap width decides matching existence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .cells import CostTable, mask_name
from .cost import CostSpec, eval_cost
from .graph import TransportGraph, hall_feasible
from .measures import AtomicSource, Instance, TargetMeasure, max_targets
from .solver import exact_threshold

_SLACK = 1e-12


class ReductionError(ValueError):
    """Gadget construction failure or a violated dichotomy."""


def _alpha(n: int, p: float) -> float:
    return 1.0 / (1.0 + (n - 1.0) ** (1.0 / (p - 1.0)))


def epsilon(n: int, p: float, q: float) -> float:
    """Width of the cost gap below 1 that the gadget optimum never enters.

    Positive for every n >= 2, finite p > 1, q > 0; equals 1/n at p = q = 2.
    """
    n = int(n)
    p = float(p)
    q = float(q)
    if n < 2:
        raise ReductionError(f"the gadget needs at least two targets, got {n}")
    if math.isinf(p) or math.isnan(p) or not p > 1.0:
        raise ReductionError(f"p must be finite and > 1, got {p}")
    if math.isnan(q) or not q > 0.0:
        raise ReductionError(f"q must be positive, got {q}")
    a = _alpha(n, p)
    inner = (1.0 - a) ** p + (n - 1) * a ** p
    return 1.0 - inner ** (q / p)


def _basis_points(n: int) -> list[tuple[float, ...]]:
    return [tuple(1.0 if i == k else 0.0 for i in range(n)) for k in range(n)]


def gadget_points(n: int, p: float, q: float) -> dict:
    """One point in R^n per target subset, with coordinate alpha on the
    subset's support and 0 elsewhere.

    For thresholds inside the gap, each point reaches exactly its subset of
    the basis targets. Both defining inequalities are re-verified in floats
    (1e-12 slack) before the points are accepted, to catch rounding at
    extreme p.
    """
    if n > max_targets():
        raise ReductionError(
            f"{n} targets exceeds the subset-table cap of {max_targets()}")
    eps = epsilon(n, p, q)
    a = _alpha(n, p)
    spec = CostSpec(p, q)
    basis = _basis_points(n)
    points = {}
    for mask in range(1 << n):
        pt = tuple(a if (mask >> i) & 1 else 0.0 for i in range(n))
        for k in range(n):
            c = eval_cost(spec, pt, basis[k])
            if (mask >> k) & 1:
                if c > 1.0 - eps + _SLACK:
                    raise ReductionError(
                        f"member inequality fails at subset {mask_name(mask, n)}, "
                        f"target {k}: cost {c} > {1.0 - eps}")
            elif c < 1.0 - _SLACK:
                raise ReductionError(
                    f"non-member inequality fails at subset {mask_name(mask, n)}, "
                    f"target {k}: cost {c} < 1")
        points[mask] = pt
    return points


def graph_to_instance(graph: TransportGraph, points: dict, target_points,
                      cost: CostSpec, probe_omegas) -> Instance:
    """Atomic instance whose threshold graph reproduces `graph` at every
    probed threshold: one atom per weighted subset, placed at the given
    point. Each atom's reachable set is re-derived at every probe and must
    equal its subset; the first mismatch is rejected with its witness
    threshold."""
    masks = list(graph.left_weights)
    for m in masks:
        if m not in points:
            raise ReductionError(
                f"no point supplied for weighted subset {mask_name(m, graph.n_targets)}")
    target = TargetMeasure(tuple(target_points), graph.right_weights)
    source = AtomicSource(tuple(points[m] for m in masks),
                          tuple(graph.left_weights[m] for m in masks))
    instance = Instance(source, target, cost)
    table = CostTable(source, target, cost)
    for w in probe_omegas:
        labels = table.labels(float(w))
        for i, m in enumerate(masks):
            got = int(labels[i])
            if got != m:
                raise ReductionError(
                    f"at omega={float(w)} the point for subset "
                    f"{mask_name(m, graph.n_targets)} reaches "
                    f"{mask_name(got, graph.n_targets)} instead")
    return instance


@dataclass(eq=False)
class GadgetInstance:
    """A transport graph embedded as an atomic instance on the basis targets."""

    instance: Instance
    graph: TransportGraph
    epsilon: float
    lambda_interval: tuple   # open interval (1 - epsilon, 1) the optimum avoids
    points: dict
    probes: tuple


def _probe_points(lo: float, hi: float, k: int) -> tuple:
    if k < 1:
        raise ReductionError("need at least one probe threshold")
    width = hi - lo
    if k == 1:
        return (lo + 0.5 * width,)
    edge = 1e-6 * width
    inner = [lo + width * (i + 1) / (k - 1) for i in range(k - 2)]
    return tuple([lo + edge] + inner + [hi - edge])


def build_gadget(graph: TransportGraph, p: float, q: float,
                 n_probes: int = 3) -> GadgetInstance:
    """Embed a transport graph via the p-norm gadget and validate it at
    probe thresholds spread through the gap (near both ends plus interior)."""
    n = graph.n_targets
    eps = epsilon(n, p, q)
    lo, hi = 1.0 - eps, 1.0
    probes = _probe_points(lo, hi, n_probes)
    points = gadget_points(n, p, q)
    instance = graph_to_instance(graph, points, _basis_points(n),
                                 CostSpec(p, q), probes)
    return GadgetInstance(instance, graph, eps, (lo, hi), points, probes)


@dataclass(eq=False)
class DichotomyReport:
    feasible: bool
    optimum: float
    epsilon: float
    lambda_interval: tuple
    branch: str         # "at_or_below_gap" or "at_or_above_one"


def verify_dichotomy(graph: TransportGraph, p: float, q: float,
                     n_probes: int = 3) -> DichotomyReport:
    """Solve the gadget instance exactly and check that its optimum falls on
    the side of the gap that matching feasibility predicts. An optimum
    strictly inside the gap would contradict the construction and raises."""
    gadget = build_gadget(graph, p, q, n_probes)
    feasible = hall_feasible(graph)
    optimum = exact_threshold(gadget.instance)
    lo, hi = gadget.lambda_interval
    if lo + _SLACK < optimum < hi - _SLACK:
        raise ReductionError(
            f"optimum {optimum} lies strictly inside the excluded interval ({lo}, {hi})")
    if feasible:
        if optimum > lo + _SLACK:
            raise ReductionError(
                f"graph has a perfect matching but the optimum {optimum} exceeds {lo}")
        branch = "at_or_below_gap"
    else:
        if optimum < hi - _SLACK:
            raise ReductionError(
                f"graph has no perfect matching but the optimum {optimum} is below {hi}")
        branch = "at_or_above_one"
    return DichotomyReport(feasible, optimum, gadget.epsilon, gadget.lambda_interval, branch)
