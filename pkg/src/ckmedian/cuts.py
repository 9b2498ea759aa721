"""Minimum node-weight vertex cuts between node sets.

sep(S, T) is the smallest total weight of a node set N such that every path
from S to T, endpoints included, meets N. It is computed as a max-flow on the
node-split graph: every node v becomes v_in -> v_out with capacity w(v) and
every edge becomes two infinite arcs between the out- and in-copies. The
super source feeds the in-copies of S and the out-copies of T drain into the
super sink, so nodes of S and T can themselves be cut.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import ContractError, StructuralError


@dataclass(frozen=True)
class CutResult:
    value: float
    nodes: frozenset[int]
    interior: frozenset[int]

    @property
    def hull(self) -> frozenset[int]:
        return self.nodes | self.interior


def _adjacency(graph) -> Sequence[Sequence[int]]:
    if hasattr(graph, "adjacency"):
        return graph.adjacency
    return graph


def _is_exact(weights) -> bool:
    return all(isinstance(x, (int, Fraction)) and not isinstance(x, bool) for x in weights)


class _FlowNetwork:
    """Dinic max-flow on a small arc list. Capacities may be floats or Fractions."""

    def __init__(self, size: int, eps):
        self.size = size
        self.eps = eps
        self.head: list[list[int]] = [[] for _ in range(size)]
        self.to: list[int] = []
        self.cap: list = []

    def add_arc(self, u: int, v: int, c) -> None:
        self.head[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(c)
        self.head[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0 * c)

    def _levels(self, s: int, t: int):
        level = [-1] * self.size
        level[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for a in self.head[u]:
                v = self.to[a]
                if level[v] < 0 and self.cap[a] > self.eps:
                    level[v] = level[u] + 1
                    queue.append(v)
        return level if level[t] >= 0 else None

    def _push(self, u, t, limit, level, it):
        if u == t:
            return limit
        arcs = self.head[u]
        while it[u] < len(arcs):
            a = arcs[it[u]]
            v = self.to[a]
            if self.cap[a] > self.eps and level[v] == level[u] + 1:
                got = self._push(v, t, min(limit, self.cap[a]), level, it)
                if got > self.eps:
                    self.cap[a] -= got
                    self.cap[a ^ 1] += got
                    return got
            it[u] += 1
        return 0

    def max_flow(self, s: int, t: int):
        total = 0
        while True:
            level = self._levels(s, t)
            if level is None:
                return total
            it = [0] * self.size
            while True:
                f = self._push(s, t, float("inf"), level, it)
                if not f > self.eps:
                    break
                total += f

    def reachable(self, s: int) -> list[bool]:
        seen = [False] * self.size
        seen[s] = True
        stack = [s]
        while stack:
            u = stack.pop()
            for a in self.head[u]:
                v = self.to[a]
                if not seen[v] and self.cap[a] > self.eps:
                    seen[v] = True
                    stack.append(v)
        return seen


def _check_nodes(nodes: Iterable[int], n: int, what: str) -> set[int]:
    out = set()
    for v in nodes:
        v = int(v)
        if not 0 <= v < n:
            raise StructuralError(f"{what} contains node {v} outside 0..{n - 1}")
        out.add(v)
    return out


def interior(graph, cut: Iterable[int], T: Iterable[int]) -> frozenset[int]:
    """Nodes outside ``cut`` that have no path to ``T`` once ``cut`` is removed."""
    adj = _adjacency(graph)
    n = len(adj)
    cut = set(cut)
    seen = {t for t in T if t not in cut}
    stack = list(seen)
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in cut and w not in seen:
                seen.add(w)
                stack.append(w)
    return frozenset(v for v in range(n) if v not in cut and v not in seen)


def sep(graph, weights: Sequence, S: Iterable[int], T: Iterable[int]) -> CutResult:
    """Minimum weight of a node set meeting every S-T path.

    Among minimum cuts the one closest to S (smallest source side) is returned.
    ``sep(empty, T)`` is 0 with an empty cut. An empty ``T`` is an error.
    """
    adj = _adjacency(graph)
    n = len(adj)
    if len(weights) != n:
        raise StructuralError(f"expected {n} weights, got {len(weights)}")
    S = _check_nodes(S, n, "S")
    T = _check_nodes(T, n, "T")
    if not T:
        raise ContractError("sep needs a non-empty target set")
    if any(w < 0 for w in weights):
        raise ContractError("node weights must be non-negative")
    exact = _is_exact(weights)
    zero = Fraction(0) if exact else 0.0
    if not S:
        return CutResult(zero, frozenset(), interior(adj, (), T))

    total = sum(weights, zero)
    big = total + 1
    eps = 0 if exact else 1e-13 * (1.0 + float(total))
    src, snk = 2 * n, 2 * n + 1
    net = _FlowNetwork(2 * n + 2, eps)
    for v in range(n):
        net.add_arc(v, n + v, weights[v] if exact else float(weights[v]))
    for v in range(n):
        for u in adj[v]:
            net.add_arc(n + v, u, big)
    for s in sorted(S):
        net.add_arc(src, s, big)
    for t in sorted(T):
        net.add_arc(n + t, snk, big)
    value = net.max_flow(src, snk)
    seen = net.reachable(src)
    nodes = frozenset(v for v in range(n) if seen[v] and not seen[n + v])
    if not exact:
        # the node weights of the cut are the cleaner number
        value = float(sum(float(weights[v]) for v in nodes))
    return CutResult(value, nodes, interior(adj, nodes, T))


def sep_value(graph, weights: Sequence, S: Iterable[int], T: Iterable[int]):
    return sep(graph, weights, S, T).value


def delta(graph, weights: Sequence, S: Iterable[int], v: int, T: Iterable[int]):
    """Marginal separation sep(S + v, T) - sep(S, T)."""
    S = set(S)
    T = list(T)
    return sep(graph, weights, S | {v}, T).value - sep(graph, weights, S, T).value


def max_flow_value(graph, node_capacities: Sequence, s: int, t: int):
    """Maximum s-t flow with node capacities (s and t capacitated too); equals sep({s}, {t})."""
    if s == t:
        raise ContractError("max_flow_value needs distinct endpoints")
    return sep(graph, node_capacities, {s}, {t}).value
