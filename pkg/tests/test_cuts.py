from fractions import Fraction
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ckmedian.core import ContractError
from ckmedian.cuts import delta, interior, max_flow_value, sep, sep_value
from ckmedian.oracle import brute_force_separator

from conftest import connected_edges


def _adj(n, edges):
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    return adj


PATH3 = _adj(3, [(0, 1), (1, 2)])


def test_single_bottleneck():
    res = sep(PATH3, [1, 1, 1], {0}, {2})
    assert res.value == 1
    assert res.nodes == frozenset({0})  # source-side minimal cut among the three ties
    assert 0 in res.hull


def test_adjacent_endpoints_cut_the_lighter_one():
    adj = _adj(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    w = [0.3, 0.5, 9.0, 9.0]
    res = sep(adj, w, {0}, {1})
    assert res.value == pytest.approx(0.3)
    assert brute_force_separator(adj, w, {0}, {1})[0] == pytest.approx(0.3)


def test_disconnected_sets_and_empty_source():
    adj = _adj(4, [(0, 1), (2, 3)])
    res = sep(adj, [1, 1, 1, 1], {0}, {3})
    assert res.value == 0 and res.nodes == frozenset()
    assert sep(adj, [1, 1, 1, 1], set(), {3}).value == 0
    with pytest.raises(ContractError):
        sep(adj, [1, 1, 1, 1], {0}, set())


def test_delta_conventions():
    w = [0.2, 0.7, 0.4]
    assert delta(PATH3, w, {0}, 0, {2}) == 0
    assert delta(PATH3, w, set(), 0, {2}) == pytest.approx(sep_value(PATH3, w, {0}, {2}))
    # adding the target itself: the only cuts left are those containing t
    assert delta(PATH3, w, set(), 2, {2}) == pytest.approx(0.4)


def test_max_flow():
    adj = _adj(2, [(0, 1)])
    assert max_flow_value(adj, [1, 1], 0, 1) == 1
    # two node-disjoint paths 0-1-3 and 0-2-3 with bottlenecks 0.5 and 0.25
    adj = _adj(4, [(0, 1), (1, 3), (0, 2), (2, 3)])
    assert max_flow_value(adj, [5, 0.5, 0.25, 5], 0, 3) == pytest.approx(0.75)
    assert max_flow_value(adj, [5, 0, 0, 5], 0, 3) == 0
    with pytest.raises(ContractError):
        max_flow_value(adj, [1, 1, 1, 1], 2, 2)


def test_exact_weights_stay_rational():
    w = [Fraction(1, 3), Fraction(1, 7), Fraction(2, 5)]
    res = sep(PATH3, w, {0}, {2})
    assert isinstance(res.value, Fraction) and res.value == Fraction(1, 7)


def test_matches_exhaustive_separator():
    rng = np.random.default_rng(11)
    for trial in range(120):
        n = int(rng.integers(2, 7))
        adj = _adj(n, connected_edges(n, 0.5, rng))
        w = rng.uniform(0, 1, n).round(3).tolist()
        S = {int(v) for v in rng.choice(n, size=int(rng.integers(1, n)), replace=False)}
        T = {int(rng.integers(n))}
        res = sep(adj, w, S, T)
        value, _ = brute_force_separator(adj, w, S, T)
        assert res.value == pytest.approx(value, abs=1e-9)
        assert res.value == pytest.approx(sum(w[v] for v in res.nodes), abs=1e-12)
        assert S <= res.hull


def test_interior_is_cut_off_from_target():
    adj = _adj(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    assert interior(adj, {2}, {4}) == frozenset({0, 1})
    assert interior(adj, {4}, {4}) == frozenset({0, 1, 2, 3})


def test_symmetry_small_exhaustive():
    adj = _adj(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)])
    w = [0.3, 0.1, 0.6, 0.2, 0.5]
    sets = [set(c) for r in (1, 2) for c in itertools.combinations(range(5), r)]
    for S in sets:
        for T in sets:
            assert sep_value(adj, w, S, T) == pytest.approx(sep_value(adj, w, T, S), abs=1e-12)


@st.composite
def _weighted_graph(draw):
    n = draw(st.integers(2, 6))
    pairs = list(itertools.combinations(range(n), 2))
    edges = [p for p in pairs if draw(st.booleans())]
    w = draw(st.lists(st.fractions(0, 3, max_denominator=6), min_size=n, max_size=n))
    S = draw(st.sets(st.integers(0, n - 1), min_size=1))
    T = draw(st.sets(st.integers(0, n - 1), min_size=1))
    return _adj(n, edges), w, S, T


@settings(max_examples=150, deadline=None)
@given(_weighted_graph())
def test_exact_cut_matches_oracle_and_is_symmetric(case):
    adj, w, S, T = case
    res = sep(adj, w, S, T)
    assert res.value == brute_force_separator(adj, w, S, T)[0]
    assert res.value == sep(adj, w, T, S).value
    assert S <= res.hull
