"""Transport graphs over target subsets: Hall feasibility and exact matching.

Left vertices are target subsets (bitmasks) weighted by cell mass, right
vertices are the targets weighted by demand, and a subset is adjacent to
exactly its member targets. Both weight vectors sum to 1. Graph and
matching values are immutable after construction; solves on different
graphs may run concurrently.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .cells import CellDecomposition, mask_members, mask_name
from .measures import TargetMeasure, as_rational, max_targets


class GraphError(ValueError):
    """Inconsistent graph, matching, or weight data."""


@dataclass
class TransportGraph:
    n_targets: int
    left_weights: dict
    right_weights: tuple

    def __post_init__(self):
        n = int(self.n_targets)
        if n < 1:
            raise GraphError("a transport graph needs at least one target")
        if n > max_targets():
            raise GraphError(
                f"{n} targets exceeds the subset-table cap of {max_targets()} "
                "(set WINFTY_MAX_TARGETS to raise it)")
        left = {}
        for mask, w in self.left_weights.items():
            m = int(mask)
            if not 0 <= m < (1 << n):
                raise GraphError(f"left mask {mask} out of range for {n} targets")
            wf = as_rational(w, f"left weight of {mask_name(m, n)}")
            if wf < 0:
                raise GraphError(f"negative left weight at {mask_name(m, n)}")
            if wf > 0:
                left[m] = wf
        right = tuple(as_rational(w, f"right weight of target {j}")
                      for j, w in enumerate(self.right_weights))
        if len(right) != n:
            raise GraphError(f"{len(right)} right weights for {n} targets")
        if any(w < 0 for w in right):
            raise GraphError("right weights must be nonnegative")
        left_total = sum(left.values(), Fraction(0))
        right_total = sum(right, Fraction(0))
        if left_total != 1 or right_total != 1:
            raise GraphError(
                f"vertex weights must sum to 1 on each side "
                f"(left {left_total}, right {right_total})")
        self.n_targets = n
        self.left_weights = dict(sorted(left.items()))
        self.right_weights = right


@dataclass
class Matching:
    """Nonnegative mass on (subset, member target) pairs; zero entries implicit."""

    n_targets: int
    entries: dict

    def __post_init__(self):
        n = int(self.n_targets)
        clean = {}
        for (mask, j), w in self.entries.items():
            m, jj = int(mask), int(j)
            wf = as_rational(w, f"matching mass at ({mask_name(m, n)}, target {jj})")
            if wf < 0:
                raise GraphError(
                    f"negative matching mass at ({mask_name(m, n)}, target {jj})")
            if wf == 0:
                continue
            if not 0 <= jj < n:
                raise GraphError(f"matching target {jj} out of range")
            if not (m >> jj) & 1:
                raise GraphError(
                    f"matching sends mass from cell {mask_name(m, n)} "
                    f"to target {jj} outside the cell")
            clean[(m, jj)] = wf
        self.n_targets = n
        self.entries = dict(sorted(clean.items()))

    def mass(self, mask: int, j: int) -> Fraction:
        return self.entries.get((int(mask), int(j)), Fraction(0))

    def row_sums(self) -> dict:
        out: dict[int, Fraction] = {}
        for (m, _), w in self.entries.items():
            out[m] = out.get(m, Fraction(0)) + w
        return out

    def col_sums(self) -> tuple:
        out = [Fraction(0)] * self.n_targets
        for (_, j), w in self.entries.items():
            out[j] += w
        return tuple(out)

    def is_perfect_for(self, graph: TransportGraph) -> bool:
        try:
            check_perfect(self, graph.left_weights, graph.right_weights)
        except GraphError:
            return False
        return True


def check_perfect(matching: Matching, left_weights: dict, right_weights) -> None:
    """Raise naming the first row or column whose sum misses its weight."""
    rows = matching.row_sums()
    n = matching.n_targets
    for mask in sorted(set(rows) | set(left_weights)):
        have = rows.get(mask, Fraction(0))
        want = left_weights.get(mask, Fraction(0))
        if have != want:
            raise GraphError(
                f"row sum at cell {mask_name(mask, n)} is {have}, expected {want}")
    cols = matching.col_sums()
    for j, want in enumerate(right_weights):
        if cols[j] != want:
            raise GraphError(
                f"column sum at target {j} is {cols[j]}, expected {want}")


def build_graph(decomp: CellDecomposition, target: TargetMeasure) -> TransportGraph:
    """Weight the subset graph with the cell masses and target demands."""
    if target.points != decomp.targets.points:
        raise GraphError("decomposition and target measure list different targets")
    return TransportGraph(target.n, dict(decomp.masses), target.weights)


def _common_scale(graph: TransportGraph) -> int:
    denoms = [w.denominator for w in graph.left_weights.values()]
    denoms += [w.denominator for w in graph.right_weights]
    return lcm(*denoms, 1)


def hall_feasible(graph: TransportGraph) -> bool:
    """Perfect-matching feasibility via the weighted Hall condition.

    For every target subset S, the mass of left vertices whose reachable
    set lies inside S must not exceed the demand of S; those down-sets are
    the only binding families. One zeta transform over the bitmask lattice
    produces all 2^N inside-sums in O(N 2^N) integer additions after
    scaling every weight by the common denominator.
    """
    n = graph.n_targets
    size = 1 << n
    scale = _common_scale(graph)
    inside = [0] * size
    for mask, w in graph.left_weights.items():
        inside[mask] = int(w * scale)
    for j in range(n):
        bit = 1 << j
        for m in range(size):
            if m & bit:
                inside[m] += inside[m ^ bit]
    demand = [0] * size
    scaled_right = [int(w * scale) for w in graph.right_weights]
    for m in range(1, size):
        low = m & -m
        demand[m] = demand[m ^ low] + scaled_right[low.bit_length() - 1]
    return all(inside[m] <= demand[m] for m in range(size))


class _FlowNetwork:
    """Residual graph with paired forward/backward edges (edge e pairs with e^1)."""

    def __init__(self, n_nodes: int):
        self.adj = [[] for _ in range(n_nodes)]
        self.to: list[int] = []
        self.cap: list[int] = []

    def add_edge(self, u: int, v: int, capacity: int) -> int:
        e = len(self.to)
        self.adj[u].append(e)
        self.to.append(v)
        self.cap.append(capacity)
        self.adj[v].append(e + 1)
        self.to.append(u)
        self.cap.append(0)
        return e

    def flow_on(self, e: int) -> int:
        return self.cap[e ^ 1]

    def max_flow(self, s: int, t: int) -> int:
        total = 0
        while True:
            parent = [-1] * len(self.adj)
            parent[s] = -2
            queue = deque([s])
            while queue:
                u = queue.popleft()
                if u == t:
                    break
                for e in self.adj[u]:
                    v = self.to[e]
                    if parent[v] == -1 and self.cap[e] > 0:
                        parent[v] = e
                        queue.append(v)
            if parent[t] == -1:
                return total
            push = None
            v = t
            while v != s:
                e = parent[v]
                push = self.cap[e] if push is None else min(push, self.cap[e])
                v = self.to[e ^ 1]
            v = t
            while v != s:
                e = parent[v]
                self.cap[e] -= push
                self.cap[e ^ 1] += push
                v = self.to[e ^ 1]
            total += push


def max_flow_matching(graph: TransportGraph) -> Matching | None:
    """Exact perfect matching by max flow, or None when none exists.

    Network: source -> subset vertices (capacity = weight), subset -> member
    targets, target -> sink (capacity = demand), everything scaled by the
    common denominator so capacities are integers. Shortest augmenting paths
    (BFS, vertices in increasing bitmask order) keep the run deterministic,
    and Python integers make the scale safe at any size. The matching is
    perfect exactly when the flow saturates the source side.
    """
    masks = list(graph.left_weights)
    n = graph.n_targets
    k = len(masks)
    scale = _common_scale(graph)
    source, sink = 0, k + n + 1
    net = _FlowNetwork(k + n + 2)
    mid_edges = {}
    for i, mask in enumerate(masks):
        c = int(graph.left_weights[mask] * scale)
        net.add_edge(source, 1 + i, c)
        for j in mask_members(mask):
            mid_edges[(mask, j)] = net.add_edge(1 + i, 1 + k + j, c)
    for j, w in enumerate(graph.right_weights):
        net.add_edge(1 + k + j, sink, int(w * scale))
    if net.max_flow(source, sink) < scale:
        return None
    entries = {}
    for (mask, j), e in mid_edges.items():
        f = net.flow_on(e)
        if f:
            entries[(mask, j)] = Fraction(f, scale)
    return Matching(n, entries)
