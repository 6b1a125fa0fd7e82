"""Decision procedure, threshold searches, and plan/map reconstruction.

decide answers "does a plan of cost at most omega exist" by decomposing the
source into threshold cells and checking the subset graph for a perfect
matching. bisect halves an interval on that decision; exact_threshold binary
searches the sorted realized costs instead, which pins the discretized
optimum exactly because the decision can only flip at a realized cost.
Each solve is single-threaded and deterministic.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cells import CellDecomposition, CostTable, mask_members, mask_name
from .graph import (GraphError, Matching, build_graph, check_perfect,
                    hall_feasible, max_flow_matching)
from .measures import Instance, TargetMeasure


class SolverError(ValueError):
    """Unusable interval, tolerance, plan, or matching."""


@dataclass(eq=False)
class TransportPlan:
    """Cell-conditional transport: row(A)[i] is the fraction of cell A's mass
    sent to target i. Only positive-mass cells carry rows."""

    omega: float
    rows: dict
    decomp: CellDecomposition = field(repr=False)

    def row(self, mask: int) -> tuple:
        return self.rows[int(mask)]

    def pushforward(self) -> tuple:
        """Exact mass delivered to each target."""
        out = [Fraction(0)] * self.decomp.targets.n
        for mask, fracs in self.rows.items():
            m = self.decomp.mass(mask)
            for j, f in enumerate(fracs):
                if f:
                    out[j] += m * f
        return tuple(out)


@dataclass(eq=False)
class TransportMap:
    """Pointwise assignment of samples to targets.

    assignments holds one target per sample (-1 for zero-mass samples);
    samples divided between targets appear in splits with their exact
    pieces and keep their largest piece as the primary assignment.
    """

    omega: float
    mode: str
    assignments: list
    splits: dict
    pushforward: tuple
    marginal_errors: tuple
    decomp: CellDecomposition = field(repr=False)

    def pieces(self, k: int) -> tuple:
        """(target, mass) pieces of sample k; empty for zero-mass samples."""
        if k in self.splits:
            return self.splits[k]
        j = self.assignments[k]
        if j < 0:
            return ()
        return ((j, self.decomp.source.sample_mass(k)),)


@dataclass(eq=False)
class SolveReport:
    """Result of a threshold search; hi is feasible and equals omega."""

    lo: float
    hi: float
    omega: float
    iterations: int
    trace: list
    matching: Matching
    plan: TransportPlan
    mode: str = "bisect"


def _decide(table: CostTable, target: TargetMeasure, omega: float) -> bool:
    return hall_feasible(build_graph(table.decompose(omega), target))


def decide(instance: Instance, omega: float) -> bool:
    """True when some transport plan stays within cost omega everywhere."""
    table = CostTable(instance.source, instance.target, instance.cost)
    return _decide(table, instance.target, float(omega))


def _finish(table, target, lo, hi, trace, mode) -> SolveReport:
    decomp = table.decompose(hi)
    matching = max_flow_matching(build_graph(decomp, target))
    if matching is None:
        raise SolverError(f"internal: no perfect matching at feasible omega {hi}")
    plan = plan_from_matching(decomp, matching, target)
    return SolveReport(lo, hi, hi, len(trace), trace, matching, plan, mode)


def bisect(instance: Instance, tol: float,
           initial_interval=None) -> SolveReport:
    """Interval halving on the feasibility decision.

    The upper endpoint stays feasible throughout, so the returned omega
    overshoots the discretized optimum by less than tol. Without an explicit
    interval the search starts at (min cost, max cost); the maximum realized
    cost is always feasible since every sample then reaches every target.
    """
    if not tol > 0:
        raise SolverError(f"tolerance must be positive, got {tol}")
    table = CostTable(instance.source, instance.target, instance.cost)
    if initial_interval is None:
        lo, hi = table.bounds()
    else:
        lo, hi = float(initial_interval[0]), float(initial_interval[1])
        if lo > hi:
            raise SolverError(f"empty initial interval [{lo}, {hi}]")
        if not _decide(table, instance.target, hi):
            raise SolverError(f"no plan exists below the upper bound {hi}")
    trace = []
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        ok = _decide(table, instance.target, mid)
        trace.append((mid, ok))
        if ok:
            hi = mid
        else:
            lo = mid
    return _finish(table, instance.target, lo, hi, trace, "bisect")


def _threshold_search(table: CostTable, target: TargetMeasure):
    """Index of the smallest feasible candidate cost, plus the probe trace.

    The decision is monotone over the sorted candidates and the largest
    candidate is always feasible, so a standard binary search applies.
    """
    cands = table.candidates()
    trace = []

    def probe(i: int) -> bool:
        ok = _decide(table, target, float(cands[i]))
        trace.append((float(cands[i]), ok))
        return ok

    lo_i, hi_i = 0, len(cands) - 1
    if probe(lo_i):
        return 0, cands, trace
    while hi_i - lo_i > 1:
        mid = (lo_i + hi_i) // 2
        if probe(mid):
            hi_i = mid
        else:
            lo_i = mid
    return hi_i, cands, trace


def exact_threshold(instance: Instance) -> float:
    """Smallest realized cost at which a plan exists: the exact optimum of
    the discretized instance. The previous distinct cost is infeasible."""
    table = CostTable(instance.source, instance.target, instance.cost)
    idx, cands, _ = _threshold_search(table, instance.target)
    return float(cands[idx])


def solve_exact(instance: Instance) -> SolveReport:
    """Exact threshold search packaged like a bisection report."""
    table = CostTable(instance.source, instance.target, instance.cost)
    idx, cands, trace = _threshold_search(table, instance.target)
    omega = float(cands[idx])
    lo = float(cands[idx - 1]) if idx else omega
    return _finish(table, instance.target, lo, omega, trace, "exact")


def plan_from_matching(decomp: CellDecomposition, matching: Matching,
                       target: TargetMeasure) -> TransportPlan:
    """Divide each matching row by its cell mass; zero-mass cells carry no rows."""
    if target.n != decomp.targets.n:
        raise SolverError(
            f"matching over {decomp.targets.n} targets but measure has {target.n}")
    try:
        check_perfect(matching, decomp.masses, target.weights)
    except GraphError as exc:
        raise SolverError(f"matching is not perfect for this decomposition: {exc}") from None
    n = target.n
    rows = {mask: tuple(matching.mass(mask, j) / m for j in range(n))
            for mask, m in decomp.masses.items()}
    return TransportPlan(decomp.omega, rows, decomp)


def matching_from_plan(plan: TransportPlan,
                       decomp: CellDecomposition | None = None) -> Matching:
    """Multiply each plan row by its cell mass.

    Rejects rows that place mass outside their cell; such a row would break
    the plan's cost bound at plan.omega.
    """
    decomp = plan.decomp if decomp is None else decomp
    n = decomp.targets.n
    entries = {}
    for mask, fracs in plan.rows.items():
        if len(fracs) != n:
            raise SolverError(
                f"row of cell {mask_name(mask, n)} has {len(fracs)} entries, wanted {n}")
        total = sum(fracs, Fraction(0))
        if total != 1:
            raise SolverError(
                f"row fractions of cell {mask_name(mask, n)} sum to {total}, not 1")
        m = decomp.mass(mask)
        for j, f in enumerate(fracs):
            if f < 0:
                raise SolverError(f"negative row fraction in cell {mask_name(mask, n)}")
            if f > 0:
                if not (mask >> j) & 1:
                    raise SolverError(
                        f"cell {mask_name(mask, n)} sends mass to target {j} "
                        "outside its reachable set")
                entries[(mask, j)] = m * f
    return Matching(n, entries)


def _cell_groups(decomp: CellDecomposition):
    """(mask, sample indices) per cell, samples in canonical order."""
    labels = decomp.labels
    order = np.argsort(labels, kind="stable")
    sorted_labels = labels[order]
    groups = []
    pos = 0
    total = len(order)
    while pos < total:
        mask = int(sorted_labels[pos])
        end = pos
        while end < total and sorted_labels[end] == mask:
            end += 1
        groups.append((mask, [int(order[i]) for i in range(pos, end)]))
        pos = end
    return groups


def map_from_matching(decomp: CellDecomposition, matching: Matching,
                      mode: str = "fractional") -> TransportMap:
    """Cut each cell's samples against the matching masses in canonical order.

    Samples are consumed row-major (pixels) or in atom order; target i takes
    samples until its matching mass M(A, i) is filled, then target i+1 starts.
    Fractional mode splits the boundary sample exactly, so the pushforward
    matches every demand. Integral mode keeps samples whole and reports the
    per-target error; every cut boundary misplaces less than one sample
    mass, so each error is bounded by the heaviest sample times the number
    of targets. When a sample outweighs a positive matching mass it must
    fill, integral mode cannot approximate the cut and falls back to
    fractional.
    """
    if mode not in ("fractional", "integral"):
        raise SolverError(f"unknown map mode {mode!r}")
    src = decomp.source
    n = decomp.targets.n
    rows = matching.row_sums()
    for mask in sorted(set(rows) | set(decomp.masses)):
        if rows.get(mask, Fraction(0)) != decomp.mass(mask):
            raise SolverError(
                f"matching row at cell {mask_name(mask, n)} does not match its mass")

    groups = [(mask, idxs,
               [(j, matching.mass(mask, j)) for j in mask_members(mask)])
              for mask, idxs in _cell_groups(decomp)]

    if mode == "integral":
        for mask, idxs, budgets in groups:
            positive = [b for _, b in budgets if b > 0]
            if not positive:
                continue
            heaviest = max(src.sample_mass(k) for k in idxs)
            if heaviest > min(positive):
                warnings.warn(
                    "a sample outweighs a matching mass it must fill; "
                    "falling back to the fractional map", RuntimeWarning,
                    stacklevel=2)
                mode = "fractional"
                break

    assignments = [-1] * src.n_samples
    splits: dict[int, tuple] = {}
    push = [Fraction(0)] * n

    for mask, idxs, budgets in groups:
        if mode == "integral":
            ptr = 0
            filled = Fraction(0)
            for k in idxs:
                m = src.sample_mass(k)
                if m == 0:
                    continue
                while ptr < len(budgets) - 1 and filled >= budgets[ptr][1]:
                    ptr += 1
                    filled = Fraction(0)
                j = budgets[ptr][0]
                assignments[k] = j
                push[j] += m
                filled += m
        else:
            pieces: dict[int, list] = {}
            sample_iter = iter(idxs)
            current = -1
            remaining = Fraction(0)
            for j, budget in budgets:
                need = budget
                while need > 0:
                    while remaining == 0:
                        current = next(sample_iter)
                        remaining = src.sample_mass(current)
                    take = min(remaining, need)
                    pieces.setdefault(current, []).append((j, take))
                    push[j] += take
                    remaining -= take
                    need -= take
            for k, plist in pieces.items():
                if len(plist) == 1:
                    assignments[k] = plist[0][0]
                else:
                    best_j, best_m = plist[0]
                    for j, m in plist[1:]:
                        if m > best_m:
                            best_j, best_m = j, m
                    assignments[k] = best_j
                    splits[k] = tuple(plist)

    demands = matching.col_sums()
    errors = tuple(push[j] - demands[j] for j in range(n))
    return TransportMap(decomp.omega, mode, assignments, splits,
                        tuple(push), errors, decomp)
