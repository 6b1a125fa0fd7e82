import random
from fractions import Fraction

import pytest

from common import random_atomic_instance
from winfty import (CostSpec, CostTable, MeasureError, TargetMeasure,
                    cell_of_point, decompose, make_atomic, make_uniform_grid,
                    mask_members, mask_name, mask_of)

LINF = CostSpec(float("inf"), 1)

EX1_TARGETS = TargetMeasure(((0.0, 0.0), (0.0, 4.0), (4.0, 0.0), (2.0, 2.0)),
                            (Fraction(1, 4),) * 4)


def test_mask_helpers():
    assert mask_members(0b1011) == [0, 1, 3]
    assert mask_of([0, 1, 3]) == 0b1011
    assert mask_name(0b0101, 4) == "0101"


def test_cell_of_point_basic():
    tgt = TargetMeasure(((0.0, 0.0), (4.0, 4.0)), (Fraction(1, 2), Fraction(1, 2)))
    assert cell_of_point((0.0, 0.0), tgt, LINF, 1.0) == 0b01


def test_cell_of_point_center_tie_includes_all():
    # every distance is exactly 2 except to the middle target; ties go to reachable
    assert cell_of_point((2.0, 2.0), EX1_TARGETS, LINF, 2.0) == 0b1111


def test_cell_of_point_far_corner_empty():
    assert cell_of_point((3.9, 3.9), EX1_TARGETS, LINF, 1.0) == 0


def test_decompose_all_reachable_single_cell():
    src = make_uniform_grid(((0, 0), (4, 4)), 8, 8)
    d = decompose(src, EX1_TARGETS, LINF, 4.0)
    assert d.masses == {0b1111: Fraction(1)}


def test_decompose_nothing_reachable_single_empty_cell():
    src = make_uniform_grid(((0, 0), (4, 4)), 8, 8)
    d = decompose(src, EX1_TARGETS, LINF, 0.01)
    assert d.masses == {0: Fraction(1)}


def test_partition_masses_sum_to_one_random():
    rng = random.Random(17)
    for _ in range(30):
        inst = random_atomic_instance(rng)
        omega = rng.uniform(0.0, 5.0)
        d = decompose(inst.source, inst.target, inst.cost, omega)
        assert sum(d.masses.values(), Fraction(0)) == 1
        recount = {}
        for k in range(inst.source.n_samples):
            m = int(d.labels[k])
            recount[m] = recount.get(m, Fraction(0)) + inst.source.sample_mass(k)
        assert {m: w for m, w in recount.items() if w > 0} == d.masses


def test_monotone_growth_of_labels():
    rng = random.Random(23)
    for _ in range(20):
        inst = random_atomic_instance(rng)
        table = CostTable(inst.source, inst.target, inst.cost)
        w1, w2 = sorted((rng.uniform(0, 5), rng.uniform(0, 5)))
        l1, l2 = table.labels(w1), table.labels(w2)
        assert all(int(a) & int(b) == int(a) for a, b in zip(l1, l2))


@pytest.mark.parametrize("spec", [LINF, CostSpec(2, 2), CostSpec(1.5, 0.5),
                                  CostSpec(float("inf"), 2), CostSpec(64, 1)])
def test_vectorized_labels_match_cell_of_point(spec):
    rng = random.Random(int(spec.p if spec.p != float("inf") else 99) * 7 + int(spec.q * 2))
    src = make_uniform_grid(((0, 0), (4, 4)), 13, 9)
    tgt = TargetMeasure(tuple((rng.uniform(0, 4), rng.uniform(0, 4)) for _ in range(5)),
                        (Fraction(1, 5),) * 5)
    table = CostTable(src, tgt, spec)
    pts = src.points_array()
    for omega in (0.3, 1.0, 2.0, rng.uniform(0, 4)):
        labels = table.labels(omega)
        for k in range(src.n_samples):
            assert int(labels[k]) == cell_of_point(tuple(pts[k]), tgt, spec, omega)


def test_atomic_labels_match_cell_of_point():
    rng = random.Random(31)
    for _ in range(10):
        inst = random_atomic_instance(rng)
        omega = rng.uniform(0, 4)
        d = decompose(inst.source, inst.target, inst.cost, omega)
        for k, atom in enumerate(inst.source.points):
            assert int(d.labels[k]) == cell_of_point(atom, inst.target, inst.cost, omega)


def test_zero_weight_atoms_keep_labels_but_no_mass():
    src = make_atomic([(0.0, 0.0), (3.0, 3.0)], [Fraction(1), Fraction(0)])
    tgt = TargetMeasure(((0.0, 0.0),), (Fraction(1),))
    d = decompose(src, tgt, LINF, 1.0)
    assert int(d.labels[0]) == 1 and int(d.labels[1]) == 0
    assert d.masses == {1: Fraction(1)}


def test_four_targets_at_two_on_fine_grid_matches_brute_force():
    # threshold 2 reaches every pixel through the middle target, so the empty
    # cell vanishes and only the 15 nonempty subsets can appear
    src = make_uniform_grid(((0, 0), (4, 4)), 256, 256)
    d = decompose(src, EX1_TARGETS, LINF, 2.0)
    assert d.mass(0) == 0
    assert set(d.masses) <= set(range(1, 16))
    pts = src.points_array()
    for k in range(0, src.n_samples, 97):  # stride keeps the scalar scan fast
        assert int(d.labels[k]) == cell_of_point(tuple(pts[k]), EX1_TARGETS, LINF, 2.0)
    full = [cell_of_point(tuple(pts[k]), EX1_TARGETS, LINF, 2.0)
            for k in range(src.n_samples)]
    assert full == [int(v) for v in d.labels]


def test_target_cap_enforced(monkeypatch):
    pts = tuple((float(i), 0.0) for i in range(25))
    tgt = TargetMeasure(pts, (Fraction(1, 25),) * 25)
    src = make_atomic([(0.0, 0.0)], [Fraction(1)])
    with pytest.raises(MeasureError, match="WINFTY_MAX_TARGETS"):
        CostTable(src, tgt, LINF)
    monkeypatch.setenv("WINFTY_MAX_TARGETS", "30")
    CostTable(src, tgt, LINF)
