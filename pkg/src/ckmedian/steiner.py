"""Node-weighted Steiner trees: the Klein-Ravi spider greedy and its LP lower bound."""

from __future__ import annotations

import heapq
import itertools
from typing import Sequence

from .core import ContractError, InfeasibleError, SolverError, components
from .cuts import sep
from .lp.simplex import OPTIMAL, LinearProgram, solve_lp


def _adjacency(graph):
    return graph.adjacency if hasattr(graph, "adjacency") else graph


def _reachable(adj, start: int) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def _node_dijkstra(adj, wp: Sequence[float], source: int):
    """Cheapest paths from ``source``; a path pays the weight of every node after the source.

    Ties go to fewer hops, then to the smaller node index, which also fixes
    the predecessor chosen for each node.
    """
    n = len(adj)
    dist = [float("inf")] * n
    hops = [n + 1] * n
    pred = [-1] * n
    dist[source], hops[source] = 0.0, 0
    heap = [(0.0, 0, source)]
    done = [False] * n
    while heap:
        d_u, h_u, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for w in adj[u]:
            if done[w]:
                continue
            cand = (d_u + wp[w], h_u + 1)
            if cand < (dist[w], hops[w]) or (cand == (dist[w], hops[w]) and u < pred[w]):
                dist[w], hops[w] = cand
                pred[w] = u
                heapq.heappush(heap, (cand[0], cand[1], w))
    return dist, hops, pred


def klein_ravi(graph, weights: Sequence[float], terminals) -> frozenset[int]:
    """Connected node set containing ``terminals``; weight within 2 ln|T| of optimal.

    Start from the terminals. While the chosen set has more than one
    component, pick the spider (a center plus cheapest paths to r >= 2
    components) with the smallest cost per component reached and add it.
    Ties go to the smaller center index, then to fewer legs.
    """
    adj = _adjacency(graph)
    n = len(adj)
    terminals = sorted(set(int(t) for t in terminals))
    if not terminals:
        raise ContractError("klein_ravi needs at least one terminal")
    for t in terminals:
        if not 0 <= t < n:
            raise ContractError(f"terminal {t} outside 0..{n - 1}")
    if any(weights[v] < 0 for v in range(n)):
        raise ContractError("node weights must be non-negative")
    if len(terminals) == 1:
        return frozenset(terminals)
    if not set(terminals) <= _reachable(adj, terminals[0]):
        raise InfeasibleError("terminals lie in different components of the graph")

    chosen = set(terminals)
    scale = 1.0 + sum(float(weights[v]) for v in range(n))
    while True:
        comps = components(adj, chosen)
        if len(comps) == 1:
            return frozenset(chosen)
        wp = [0.0 if v in chosen else float(weights[v]) for v in range(n)]
        best = None  # (ratio, center, r, path nodes)
        for v in range(n):
            dist, hops, pred = _node_dijkstra(adj, wp, v)
            legs = []
            for comp in comps:
                u = min(comp, key=lambda x: (dist[x], hops[x], x))
                if dist[u] < float("inf"):
                    legs.append((dist[u], hops[u], u))
            legs.sort()
            if len(legs) < 2:
                continue
            acc = wp[v]
            for r, leg in enumerate(legs, start=1):
                acc += leg[0]
                if r < 2:
                    continue
                ratio = acc / r
                if best is None or ratio < best[0] - 1e-12 * scale:
                    best = (ratio, v, legs[:r], pred)
        if best is None:
            raise SolverError("no spider connects two components")
        _, v, legs, pred = best
        chosen.add(v)
        for _, _, u in legs:
            while u != v and u != -1:
                chosen.add(u)
                u = pred[u]


def steiner_lp_value(graph, weights: Sequence[float], terminals, backend: str = "simplex",
                     tol: float = 1e-9) -> float:
    """Fractional Steiner LP over the non-terminal weight, by cutting planes.

    Terminals are fixed at 1. For every terminal pair the LP asks that each
    node set separating them carries x-weight at least 1; violated separators
    are found by max-flow and added until none remain.
    """
    adj = _adjacency(graph)
    n = len(adj)
    terms = sorted(set(int(t) for t in terminals))
    if len(terms) <= 1:
        return 0.0
    if not set(terms) <= _reachable(adj, terms[0]):
        raise InfeasibleError("terminals lie in different components of the graph")
    others = [v for v in range(n) if v not in terms]
    lp = LinearProgram()
    for v in others:
        lp.add_var(f"x_{v}", cost=float(weights[v]))
    seen = set()
    for _ in range(10 * n ** 3 + 10):
        if lp.rows:
            res = solve_lp(lp, backend=backend)
            if res.status != OPTIMAL:
                raise SolverError(f"Steiner LP returned {res.status}")
            value, xs = res.value, res.x
        else:
            value, xs = 0.0, [0.0] * len(others)
        w = [1.0] * n
        for j, v in enumerate(others):
            w[v] = max(0.0, float(xs[j]))
        added = 0
        for a, b in itertools.combinations(terms, 2):
            cut = sep(adj, w, {a}, {b})
            if cut.value < 1 - tol and cut.nodes not in seen:
                seen.add(cut.nodes)
                lp.add_row({f"x_{v}": 1.0 for v in cut.nodes}, ">=", 1.0)
                added += 1
        if added == 0:
            return float(value)
    raise SolverError("Steiner LP row generation did not converge")


def steiner_weight(weights: Sequence[float], nodes, terminals) -> float:
    """Weight of the non-terminal part of a Steiner set."""
    terminals = set(terminals)
    return float(sum(weights[v] for v in nodes if v not in terminals))
