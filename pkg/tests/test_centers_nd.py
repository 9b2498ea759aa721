import numpy as np
import pytest

from ckmedian.core import ContractError, InvariantViolation, validate
from ckmedian.centers_nd import (CenterSplit, break_cycles_bipartition, check_half_open, compute_radii,
                                 find_centers, half_open, integralize_centers, replacement_cost,
                                 split_centers)
from ckmedian.generators import gen_from_dominating_set
from ckmedian.lp import solve_center_lp
from ckmedian.oracle import brute_force_dominating_set

from conftest import small_metric_instance


def test_radii_examples():
    d = np.array([[0, 2, 4], [2, 0, 2], [4, 2, 0]], dtype=float)
    x = np.zeros((3, 3))
    x[0, 1] = 1.0
    x[1, 1] = x[2, 1] = 1.0
    assert compute_radii(x, d).radius[0] == 2.0
    x = np.eye(3)
    x[0] = [0.5, 0, 0.5]
    assert compute_radii(x, d).radius[0] == 2.0
    x[1] = 0
    with pytest.raises(ContractError):
        compute_radii(x, d)


def test_integral_solution_only_self_shifts():
    inst = small_metric_instance(4, n=6)
    res = half_open(inst.adjacency, inst.float_dist(), np.eye(6), k=6)
    # each center only moves its own opening into y
    assert all(e.source == e.target == e.via for e in res.shifts)
    assert sorted(res.centers) == list(range(6))
    assert np.allclose(res.y, np.eye(6))


def test_single_center_budget():
    for seed in range(6):
        inst = small_metric_instance(seed, n=6, k=1)
        d = inst.float_dist()
        x = solve_center_lp(inst, 1).x
        res = half_open(inst.adjacency, d, x, 1, audit=True)
        assert len(res.centers) <= 2
        assert check_half_open(res, d, 1) == []


def test_replacement_cost_cases():
    d = np.array([[0, 3], [3, 0]], dtype=float)
    y = np.array([[1.0, 0.5], [1.0, 1.0]])
    assert replacement_cost(d, y, 0, 0, 1) == 0
    assert replacement_cost(d, y, 0, 1, 1) == 6  # mass 2 times distance 3
    y_weak = np.array([[1.0, 0.01], [0.0, 1.0]])
    # link 0.01 < 1/16, so the column of 1 (cost 0.01 * 3) is scaled by (1/16) / 0.01
    expect = 1.0 * 3 + 0.03 / 0.01 / 16
    assert replacement_cost(d, y_weak, 0, 1, 1) == pytest.approx(expect)
    with pytest.raises(ContractError):
        replacement_cost(d, np.eye(2), 0, 1, 1)


def test_all_open_centers_leave_nothing_half():
    d = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=float)
    y = np.eye(3)
    split = split_centers(d, y, [0, 1, 2], 3, compute_radii(np.eye(3), d))
    assert split.C_half == [] and sorted(split.C1) == [0, 1, 2]


def _split(half, succ, O=()):
    return CenterSplit(C1=[], C_half=list(half), successor=dict(succ), H=[c for c in half if c not in O],
                       O=list(O), a={}, phi={}, mass={}, replace={}, cost_y=0.0)


def test_odd_cycle_rewire_towards_grandparent():
    # cycle 0 -> 1 -> 2 -> 0; cycle node 0, parent 2, grandparent 1; d(1,2) <= d(2,0)
    d = np.array([[0, 5, 5], [5, 0, 1], [5, 1, 0]], dtype=float)
    bip = break_cycles_bipartition(_split([0, 1, 2], {0: 1, 1: 2, 2: 0}), d)
    assert bip.successor[2] == 1 and bip.F == [1]
    assert bip.rewired[0]["set"] == [2, 1]


def test_odd_cycle_rewire_towards_cycle_node():
    d = np.array([[0, 5, 1], [5, 0, 9], [1, 9, 0]], dtype=float)
    bip = break_cycles_bipartition(_split([0, 1, 2], {0: 1, 1: 2, 2: 0}), d)
    assert bip.successor[1] == 0 and bip.F == [0]


def test_odd_cycle_uses_the_open_center():
    d = np.ones((3, 3)) - np.eye(3)
    bip = break_cycles_bipartition(_split([0, 1, 2], {0: 1, 1: 2, 2: 0}, O=[1]), d)
    assert bip.rewired[0]["c"] == 1 and bip.rewired[0]["p"] == 0
    with pytest.raises(InvariantViolation):
        break_cycles_bipartition(_split([0, 1, 2], {0: 1, 1: 2, 2: 0}, O=[1, 2]), d)


def test_even_cycle_keeps_alternate_centers():
    d = np.ones((4, 4)) - np.eye(4)
    bip = break_cycles_bipartition(_split(range(4), {0: 1, 1: 2, 2: 3, 3: 0}), d)
    assert bip.rewired == [] and bip.F == [0, 2]


def test_integralize_without_drops():
    y = np.array([[0.6, 0.4, 0.0], [0.0, 1.0, 0.0], [0.0, 0.3, 0.7]])
    z = integralize_centers(np.zeros((3, 3)), y, [0, 1, 2], [], {}, [], 3)
    expect = y.copy()
    np.fill_diagonal(expect, 1.0)
    assert np.allclose(z, expect)
    with pytest.raises(InvariantViolation):
        integralize_centers(np.zeros((3, 3)), y, [0, 1, 2], [], {}, [], 2)


def test_integralize_merges_dropped_column():
    y = np.array([[0.5, 0.5], [0.5, 0.5]])
    z = integralize_centers(np.zeros((2, 2)), y, [0], [1], {1: 0}, [], 1)
    assert np.allclose(z[:, 0], [1.0, 1.0]) and np.allclose(z[:, 1], 0)


def test_every_node_a_center():
    inst = small_metric_instance(2, n=6, k=6)
    res = find_centers(inst)
    assert res.cost == pytest.approx(0.0, abs=1e-9)


def test_pipeline_on_small_instances():
    for seed in range(8):
        inst = small_metric_instance(seed, n=7, k=2)
        res = find_centers(inst, audit=True)
        assert validate(inst, res.clustering) == []
        assert len(res.clustering.centers) <= 2
        assert res.stages["problems"] == []


def test_domset_instance_cost_at_least_domset():
    edges = [(0, 1), (1, 2), (2, 3), (3, 0)]
    inst = gen_from_dominating_set(4, edges)
    res = find_centers(inst, k=2)
    assert validate(inst, res.clustering) == []
    assert res.cost >= brute_force_dominating_set(4, edges)[0] - 1e-9
