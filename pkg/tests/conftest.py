"""Shared instance builders for the test suite."""

from __future__ import annotations

from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from ckmedian.core import Instance


def metric_closure(d: np.ndarray) -> np.ndarray:
    d = d.copy()
    for m in range(len(d)):
        d = np.minimum(d, d[:, m:m + 1] + d[m:m + 1, :])
    return d


def connected_edges(n: int, p: float, rng: np.random.Generator) -> list[tuple[int, int]]:
    if n == 1:
        return []
    while True:
        g = nx.gnp_random_graph(n, p, seed=int(rng.integers(2**31)))
        if nx.is_connected(g):
            return list(g.edges())


def small_metric_instance(seed: int, n: int | None = None, k: int | None = None) -> Instance:
    """Small integer metric (values 1..5 closed under shortest paths) on a cycle or a G(n, 0.3) graph.

    The tight value range makes fractional LP optima common, which is what
    exercises the shifting and splitting stages.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 11)) if n is None else n
    k = int(rng.integers(1, 4)) if k is None else k
    if seed % 3 == 0:
        edges = [(i, (i + 1) % n) for i in range(n)] if n > 2 else [(0, 1)]
    else:
        edges = connected_edges(n, 0.3, rng)
    d = rng.integers(1, 6, (n, n)).astype(float)
    d = np.minimum(d, d.T)
    np.fill_diagonal(d, 0.0)
    return Instance(n, metric_closure(d), tuple(edges), k, metric=True)


def random_weights_instance(edges, n: int, k: int, rng: np.random.Generator, exact: bool = False) -> Instance:
    """Arbitrary symmetric non-negative distances (no triangle inequality)."""
    if exact:
        d = np.empty((n, n), dtype=object)
        for i in range(n):
            d[i, i] = Fraction(0)
            for j in range(i + 1, n):
                d[i, j] = d[j, i] = Fraction(int(rng.integers(0, 40)), int(rng.integers(1, 7)))
        return Instance(n, d, tuple(edges), k)
    d = rng.uniform(0.0, 10.0, (n, n))
    d = np.triu(d, 1)
    d = d + d.T
    return Instance(n, d, tuple(edges), k)


@pytest.fixture
def path4() -> Instance:
    """Path 0-1-2-3 with the path metric."""
    d = np.abs(np.subtract.outer(np.arange(4), np.arange(4))).astype(float)
    return Instance(4, d, ((0, 1), (1, 2), (2, 3)), 2, metric=True)
