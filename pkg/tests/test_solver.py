import math
import random
from fractions import Fraction

import pytest

from common import brute_force_threshold, random_atomic_instance
from winfty import (CostSpec, Instance, SolverError, TargetMeasure,
                    TransportPlan, bisect, build_graph, decide, decompose,
                    exact_threshold, make_atomic, make_uniform_grid,
                    map_from_matching, matching_from_plan, max_flow_matching,
                    plan_from_matching, solve_exact)

F = Fraction
LINF = CostSpec(float("inf"), 1)

EX1_TARGETS = TargetMeasure(((0.0, 0.0), (0.0, 4.0), (4.0, 0.0), (2.0, 2.0)),
                            (F(1, 4),) * 4)


def two_point_instance():
    return Instance(make_atomic([(0.0, 0.0)], [F(1)]),
                    TargetMeasure(((1.0, 0.0),), (F(1),)), LINF)


def test_decide_at_max_cost_is_true_random():
    rng = random.Random(53)
    for _ in range(20):
        inst = random_atomic_instance(rng)
        from winfty import cost_bounds
        _, hi = cost_bounds(inst)
        assert decide(inst, hi)


def test_decide_tie_goes_to_reachable():
    inst = two_point_instance()
    assert not decide(inst, 0.5)
    assert decide(inst, 1.0)


def test_decide_monotone_over_probes():
    rng = random.Random(59)
    for _ in range(15):
        inst = random_atomic_instance(rng)
        probes = sorted(rng.uniform(0, 5) for _ in range(8))
        flags = [decide(inst, w) for w in probes]
        assert flags == sorted(flags)


def test_bisect_degenerate_interval():
    inst = two_point_instance()          # min cost == max cost == 1
    rep = bisect(inst, 1e-6)
    assert rep.iterations == 0
    assert rep.omega == 1.0
    assert rep.trace == []


def test_bisect_rejects_infeasible_upper_bound():
    inst = two_point_instance()
    with pytest.raises(SolverError, match="upper bound"):
        bisect(inst, 1e-3, (0.0, 0.5))
    with pytest.raises(SolverError, match="tolerance"):
        bisect(inst, 0.0)


def test_bisect_iteration_count_and_interval():
    src = make_uniform_grid(((0, 0), (4, 4)), 16, 16)
    inst = Instance(src, EX1_TARGETS, LINF)
    rep = bisect(inst, 1e-6, (0.0, 4.0))
    assert rep.iterations == math.ceil(math.log2(4.0 / 1e-6))  # 22
    assert rep.hi - rep.lo <= 1e-6
    assert rep.omega == rep.hi
    assert len(rep.trace) == rep.iterations
    assert decide(inst, rep.hi)
    assert not decide(inst, rep.lo)


def test_bisect_sandwich_against_oracle():
    rng = random.Random(61)
    for _ in range(10):
        inst = random_atomic_instance(rng, max_atoms=5, max_targets=3)
        tol = 1e-6
        rep = bisect(inst, tol)
        star = exact_threshold(inst)
        assert star <= rep.omega <= star + tol
        assert decide(inst, rep.omega)
        assert not decide(inst, rep.omega - tol - 1e-9) or rep.omega - tol - 1e-9 >= star


def test_exact_threshold_examples():
    assert exact_threshold(two_point_instance()) == 1.0
    inst = Instance(
        make_atomic([(0.0, 0.0), (4.0, 4.0)], [F(1, 2), F(1, 2)]),
        TargetMeasure(((0.0, 4.0), (4.0, 0.0)), (F(1, 2), F(1, 2))), LINF)
    assert exact_threshold(inst) == 4.0   # all four pairwise costs equal 4


def test_exact_threshold_matches_brute_force_on_small_grid():
    src = make_uniform_grid(((0, 0), (4, 4)), 4, 4)
    inst = Instance(src, EX1_TARGETS, LINF)
    atoms = [tuple(p) for p in src.points_array()]
    as_atomic = Instance(make_atomic(atoms, [F(1, 16)] * 16), EX1_TARGETS, LINF)
    assert exact_threshold(inst) == brute_force_threshold(as_atomic)


def test_exact_threshold_matches_brute_force_random():
    rng = random.Random(67)
    for _ in range(60):
        inst = random_atomic_instance(rng)
        assert exact_threshold(inst) == brute_force_threshold(inst)


def test_exact_threshold_previous_candidate_infeasible():
    rng = random.Random(71)
    for _ in range(10):
        inst = random_atomic_instance(rng)
        rep = solve_exact(inst)
        assert decide(inst, rep.omega)
        if rep.lo != rep.omega:
            assert not decide(inst, rep.lo)
        assert rep.iterations == len(rep.trace)


def test_plan_from_matching_single_cell():
    src = make_uniform_grid(((0, 0), (4, 4)), 2, 2)
    tgt = TargetMeasure(((0.0, 0.0), (4.0, 4.0)), (F(1, 3), F(2, 3)))
    d = decompose(src, tgt, LINF, 4.0)
    m = max_flow_matching(build_graph(d, tgt))
    plan = plan_from_matching(d, m, tgt)
    assert plan.rows == {0b11: (F(1, 3), F(2, 3))}
    assert plan.pushforward() == tgt.weights


def test_plan_rows_divide_matching_by_cell_mass():
    # the feasible two-target example: cell {t0} feeds target 0 entirely,
    # cell {t0, t1} feeds target 1 entirely
    src = make_atomic([(0.0, 0.0), (1.0, 0.0)], [F(1, 4), F(3, 4)])
    tgt = TargetMeasure(((0.0, 0.0), (2.0, 0.0)), (F(1, 4), F(3, 4)))
    d = decompose(src, tgt, LINF, 1.0)
    assert d.masses == {0b01: F(1, 4), 0b11: F(3, 4)}
    m = max_flow_matching(build_graph(d, tgt))
    plan = plan_from_matching(d, m, tgt)
    assert plan.rows[0b01] == (F(1), F(0))
    assert plan.rows[0b11] == (F(0), F(1))


def test_plan_from_matching_rejects_imperfect():
    src = make_uniform_grid(((0, 0), (4, 4)), 2, 2)
    tgt = TargetMeasure(((0.0, 0.0), (4.0, 4.0)), (F(1, 2), F(1, 2)))
    d = decompose(src, tgt, LINF, 4.0)
    from winfty import Matching
    short = Matching(2, {(0b11, 0): F(1, 2)})
    with pytest.raises(SolverError, match="row sum|column sum"):
        plan_from_matching(d, short, tgt)


def test_matching_plan_round_trip():
    rng = random.Random(73)
    for _ in range(40):
        inst = random_atomic_instance(rng, max_atoms=8, max_targets=5)
        omega = exact_threshold(inst)
        d = decompose(inst.source, inst.target, inst.cost, omega)
        m = max_flow_matching(build_graph(d, inst.target))
        plan = plan_from_matching(d, m, inst.target)
        assert matching_from_plan(plan) == m
        assert plan.pushforward() == inst.target.weights
        for mask, fracs in plan.rows.items():
            assert sum(fracs, F(0)) == 1
            for j, f in enumerate(fracs):
                if f > 0:
                    assert (mask >> j) & 1


def test_matching_from_plan_rejects_mass_outside_mask():
    src = make_atomic([(0.0, 0.0)], [F(1)])
    tgt = TargetMeasure(((0.0, 0.0), (4.0, 4.0)), (F(1, 2), F(1, 2)))
    d = decompose(src, tgt, LINF, 1.0)
    bad = TransportPlan(1.0, {0b01: (F(0), F(1))}, d)
    with pytest.raises(SolverError, match="outside its reachable set"):
        matching_from_plan(bad)


def test_singleton_marginals_exact():
    rng = random.Random(79)
    inst = random_atomic_instance(rng, max_atoms=6, max_targets=4)
    omega = exact_threshold(inst)
    d = decompose(inst.source, inst.target, inst.cost, omega)
    m = max_flow_matching(build_graph(d, inst.target))
    plan = plan_from_matching(d, m, inst.target)
    # each sample's mass is fully distributed across its cell's row
    for k in range(inst.source.n_samples):
        mask = int(d.labels[k])
        w = inst.source.sample_mass(k)
        if w > 0:
            assert sum(plan.rows[mask], F(0)) * w == w


def four_pixel_strip():
    # one row of four pixels, both targets reachable everywhere
    src = make_uniform_grid(((0, 0), (4, 1)), 4, 1)
    tgt = TargetMeasure(((0.0, 0.0), (4.0, 1.0)), (F(1, 2), F(1, 2)))
    d = decompose(src, tgt, LINF, 4.0)
    m = max_flow_matching(build_graph(d, tgt))
    return d, m


def test_map_even_split_exact():
    d, m = four_pixel_strip()
    tm = map_from_matching(d, m, "integral")
    assert tm.assignments == [0, 0, 1, 1]
    assert tm.marginal_errors == (F(0), F(0))
    assert tm.splits == {}


def test_map_three_pixels_integral_vs_fractional():
    src = make_uniform_grid(((0, 0), (3, 1)), 3, 1)
    tgt = TargetMeasure(((0.0, 0.0), (3.0, 1.0)), (F(1, 2), F(1, 2)))
    d = decompose(src, tgt, LINF, 3.0)
    m = max_flow_matching(build_graph(d, tgt))
    ti = map_from_matching(d, m, "integral")
    assert ti.assignments == [0, 0, 1]
    assert ti.pushforward == (F(2, 3), F(1, 3))
    assert ti.marginal_errors == (F(1, 6), F(-1, 6))
    tf = map_from_matching(d, m, "fractional")
    assert tf.marginal_errors == (F(0), F(0))
    assert tf.splits == {1: ((0, F(1, 6)), (1, F(1, 6)))}
    assert tf.pieces(0) == ((0, F(1, 3)),)


def test_map_cost_bound_and_error_bound():
    rng = random.Random(83)
    for _ in range(25):
        inst = random_atomic_instance(rng, max_atoms=7, max_targets=4)
        omega = exact_threshold(inst)
        d = decompose(inst.source, inst.target, inst.cost, omega)
        m = max_flow_matching(build_graph(d, inst.target))
        for mode in ("fractional", "integral"):
            import warnings
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                tm = map_from_matching(d, m, mode)
            heaviest = max(inst.source.weights)
            for k in range(inst.source.n_samples):
                for j, mass in tm.pieces(k):
                    assert (int(d.labels[k]) >> j) & 1
            if tm.mode == "fractional":
                assert all(e == 0 for e in tm.marginal_errors)
            else:
                bound = heaviest * inst.target.n
                assert all(abs(e) <= bound for e in tm.marginal_errors)


def test_map_heavy_atom_falls_back_to_fractional():
    src = make_atomic([(0.0, 0.0), (1.0, 0.0)], [F(1, 2), F(1, 2)])
    tgt = TargetMeasure(((0.0, 0.0), (1.0, 0.0)), (F(3, 4), F(1, 4)))
    d = decompose(src, tgt, LINF, 1.0)
    m = max_flow_matching(build_graph(d, tgt))
    with pytest.warns(RuntimeWarning, match="fractional"):
        tm = map_from_matching(d, m, "integral")
    assert tm.mode == "fractional"
    assert all(e == 0 for e in tm.marginal_errors)


def test_map_skips_zero_mass_samples():
    src = make_atomic([(0.0, 0.0), (0.1, 0.0)], [F(1), F(0)])
    tgt = TargetMeasure(((0.0, 0.0),), (F(1),))
    d = decompose(src, tgt, LINF, 1.0)
    m = max_flow_matching(build_graph(d, tgt))
    tm = map_from_matching(d, m, "integral")
    assert tm.assignments == [0, -1]
    assert tm.pieces(1) == ()


def test_map_rejects_unknown_mode_and_foreign_matching():
    d, m = four_pixel_strip()
    with pytest.raises(SolverError, match="mode"):
        map_from_matching(d, m, "nearest")
    from winfty import Matching
    foreign = Matching(2, {(0b01, 0): F(1, 2), (0b11, 1): F(1, 2)})
    with pytest.raises(SolverError, match="does not match"):
        map_from_matching(d, foreign)
