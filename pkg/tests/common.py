"""Shared generators and an independent feasibility oracle for the tests."""

from fractions import Fraction
from math import lcm

from winfty import CostSpec, Instance, TargetMeasure, TransportGraph, eval_cost, make_atomic

P_CHOICES = (1.5, 2.0, 3.0, float("inf"))
Q_CHOICES = (0.5, 1.0, 2.0)


def random_weights(rng, k, allow_zero=False):
    """k nonnegative rationals summing to exactly 1."""
    lo = 0 if allow_zero else 1
    nums = [rng.randint(lo, 9) for _ in range(k)]
    if sum(nums) == 0:
        nums[rng.randrange(k)] = 1
    total = sum(nums)
    return [Fraction(a, total) for a in nums]


def random_graph(rng, n_targets=None, max_left=12, allow_empty_mask=True):
    """Random transport graph; the empty mask (when allowed) gives a healthy
    share of infeasible cases."""
    n = n_targets if n_targets is not None else rng.randint(2, 5)
    lo = 0 if allow_empty_mask else 1
    count = rng.randint(1, min((1 << n) - lo, max_left))
    masks = rng.sample(range(lo, 1 << n), count)
    left = dict(zip(masks, random_weights(rng, count)))
    right = random_weights(rng, n)
    return TransportGraph(n, left, right)


def random_atomic_instance(rng, max_atoms=6, max_targets=4):
    n_atoms = rng.randint(1, max_atoms)
    n_targets = rng.randint(1, max_targets)
    atoms = [tuple(round(rng.uniform(0.0, 4.0), 3) for _ in range(2))
             for _ in range(n_atoms)]
    targets = []
    while len(targets) < n_targets:
        pt = tuple(round(rng.uniform(0.0, 4.0), 3) for _ in range(2))
        if pt not in targets:
            targets.append(pt)
    source = make_atomic(atoms, random_weights(rng, n_atoms))
    target = TargetMeasure(tuple(targets), tuple(random_weights(rng, n_targets)))
    cost = CostSpec(rng.choice(P_CHOICES), rng.choice(Q_CHOICES))
    return Instance(source, target, cost)


def atom_flow_feasible(costs, atom_weights, target_weights, omega):
    """Can the atoms be fractionally assigned to targets within cost omega?

    Checked directly on the atom-target network with an adjacency-matrix
    Ford-Fulkerson over scaled integer capacities. Deliberately separate
    from the production path (no cells, no subset graph, no shared flow
    code) so the two routes stay independent.
    """
    na, nt = len(atom_weights), len(target_weights)
    scale = lcm(*(w.denominator for w in atom_weights),
                *(w.denominator for w in target_weights))
    n_nodes = na + nt + 2
    s, t = na + nt, na + nt + 1
    cap = [[0] * n_nodes for _ in range(n_nodes)]
    for i, w in enumerate(atom_weights):
        cap[s][i] = int(w * scale)
    for j, w in enumerate(target_weights):
        cap[na + j][t] = int(w * scale)
    for i in range(na):
        for j in range(nt):
            if costs[i][j] <= omega:
                cap[i][na + j] = scale
    flow = 0
    while True:
        parent = [-1] * n_nodes
        parent[s] = s
        queue = [s]
        while queue:
            u = queue.pop(0)
            for v in range(n_nodes):
                if parent[v] == -1 and cap[u][v] > 0:
                    parent[v] = u
                    queue.append(v)
        if parent[t] == -1:
            break
        push = None
        v = t
        while v != s:
            u = parent[v]
            push = cap[u][v] if push is None else min(push, cap[u][v])
            v = u
        v = t
        while v != s:
            u = parent[v]
            cap[u][v] -= push
            cap[v][u] += push
            v = u
        flow += push
    return flow == scale


def brute_force_threshold(instance):
    """Smallest candidate cost at which the atom-level network is feasible,
    found by scanning every candidate in increasing order."""
    src, tgt = instance.source, instance.target
    costs = [[eval_cost(instance.cost, a, y) for y in tgt.points]
             for a in src.points]
    candidates = sorted({c for row in costs for c in row})
    for omega in candidates:
        if atom_flow_feasible(costs, src.weights, tgt.weights, omega):
            return omega
    raise AssertionError("the largest realized cost must be feasible")
