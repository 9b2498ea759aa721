import itertools

import numpy as np
import pytest

from ckmedian.core import ContractError, is_connected_set
from ckmedian.generators import (all_trees, enumerate_formulas, gen_from_3sat, gen_from_dominating_set,
                                 gen_random, gen_star, read_dimacs)
from ckmedian.oracle import brute_force_dominating_set, brute_force_non_disjoint


def _adj(inst):
    adj = [[] for _ in range(inst.n)]
    for u, v in inst.edges:
        adj[u].append(v)
        adj[v].append(u)
    return adj


@pytest.mark.parametrize("a,b,m", [(1, 1, 1), (2, 3, 2), (3, 2, 3)])
def test_reduction_node_count(a, b, m):
    clauses = [[(i % a) + 1] for i in range(b)]
    inst = gen_from_3sat(clauses, m=m, num_vars=a)
    assert inst.n == 2 + (m + 2) * a + m * b
    assert inst.is_metric()
    assert is_connected_set(_adj(inst), range(inst.n))


def test_small_formula_shape():
    inst = gen_from_3sat([[-1, 2]], m=2)
    assert inst.n == 12
    # 4 literal nodes x (T, F) + 4 literal nodes x 2 variable copies + 2 literals x 2 clause copies
    assert len(inst.edges) == 20
    assert inst.labels[:4] == ("T", "F", "x1", "~x1")
    d = inst.dist
    T, F, x1 = 0, 1, 2
    assert d[T, F] == 2 and d[T, x1] == 1 and d[F, x1] == 1
    eps = gen_from_3sat([[-1, 2]], m=2, epsilon=0.01)
    assert eps.dist[2, 3] == 0.01 and eps.dist[0, 1] == 2


def test_reduction_rejects_bad_clauses():
    with pytest.raises(ContractError):
        gen_from_3sat([[0, 1]], m=2)
    with pytest.raises(ContractError):
        gen_from_3sat([[1]], m=0)


def test_domset_reduction_small_graphs():
    inst = gen_from_dominating_set(2, [(0, 1)])
    assert inst.n == 6 and inst.centers == (0, 1)
    assert brute_force_non_disjoint(inst).cost == 1
    tri = gen_from_dominating_set(3, [(0, 1), (1, 2), (0, 2)])
    assert brute_force_non_disjoint(tri).cost == 1
    empty = gen_from_dominating_set(4, [])
    assert brute_force_non_disjoint(empty).cost == 4
    assert brute_force_dominating_set(4, [])[0] == 4


def test_random_families_are_seeded_and_metric():
    for model in ("gnp", "tree", "grid"):
        a = gen_random(9, 2, 5, model=model)
        b = gen_random(9, 2, 5, model=model)
        assert a.edges == b.edges and np.array_equal(a.dist, b.dist)
        assert a.is_metric() and is_connected_set(_adj(a), range(9))
    sp = gen_random(7, 2, 1, metric="shortest_path")
    assert sp.is_metric()
    star = gen_star(6, 3)
    assert len(star.edges) == 5 and star.is_metric()
    assert gen_random(9, 2, 6).edges != gen_random(9, 2, 5).edges or not np.array_equal(
        gen_random(9, 2, 6).dist, gen_random(9, 2, 5).dist)
    with pytest.raises(ContractError):
        gen_random(5, 2, 0, model="ring")


def test_read_dimacs():
    text = "c example\np cnf 3 2\n1 -2 0\n2 3\n0\n"
    assert read_dimacs(text) == (3, [[1, -2], [2, 3]])
    with pytest.raises(ContractError):
        read_dimacs("p dnf 3 2\n1 0\n")


def test_all_trees_counts():
    assert [len(all_trees(n)) for n in range(1, 8)] == [1, 1, 1, 2, 3, 6, 11]
    for edges in all_trees(6):
        assert len(edges) == 5


def test_formula_enumeration():
    counts = {(a, b): len(enumerate_formulas(a, b)) for a, b in itertools.product((2, 3), repeat=2)}
    assert counts == {(2, 2): 5, (2, 3): 10, (3, 2): 11, (3, 3): 74}
    for f in enumerate_formulas(2, 3):
        assert len(f) == 3 and {abs(l) for c in f for l in c} == {1, 2}
