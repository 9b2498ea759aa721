"""Exhaustive reference solvers.

These are slow on purpose and kept simple enough to trust at a glance. They
are the ground truth for the tests of every other module.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import (Clustering, ContractError, InfeasibleError, Instance, SizeGuardError,
                   evaluate_cost, mask_connected)

MAX_DISJOINT_N = 10
MAX_NON_DISJOINT_N = 14
MAX_MEMBERSHIP_NK = 14
MAX_DOMSET_N = 16
MAX_SEPARATOR_N = 16
MAX_BIPARTITIONS = 1 << 26


@dataclass
class OracleResult:
    cost: float
    clustering: Clustering


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _zero(instance: Instance):
    return Fraction(0) if instance.exact else 0.0


# ---------------------------------------------------------------- separators

def brute_force_separator(adj: Sequence[Sequence[int]], weights: Sequence, S, T):
    """Lightest node set meeting every S-T path; ties go to the lexicographically smallest set."""
    n = len(adj)
    if n > MAX_SEPARATOR_N:
        raise SizeGuardError(f"brute_force_separator is limited to n <= {MAX_SEPARATOR_N}")
    S, T = set(S), set(T)
    best = None
    for size in range(n + 1):
        for cut in itertools.combinations(range(n), size):
            blocked = set(cut)
            seen = {s for s in S if s not in blocked}
            stack = list(seen)
            while stack:
                u = stack.pop()
                for w in adj[u]:
                    if w not in blocked and w not in seen:
                        seen.add(w)
                        stack.append(w)
            if seen & T:
                continue
            value = sum((weights[v] for v in cut), 0 * weights[0] if n else 0)
            key = (value, cut)
            if best is None or value < best[0] or (value == best[0] and cut < best[1]):
                best = key
    return best[0], frozenset(best[1])


# ------------------------------------------------------------ disjoint oracle

def brute_force_disjoint(instance: Instance, k: int | None = None, centers: Sequence[int] | None = None,
                         method: str = "auto") -> OracleResult:
    """Optimal disjoint connected clustering with at most k clusters.

    ``method="enumerate"`` walks every assignment vector V -> {1..k} in
    canonical (restricted growth) form and keeps those whose blocks are
    connected; each block takes its best center. It is guarded at n <= 10.
    ``method="bipartition"`` handles k <= 2 on larger inputs: it walks the
    two-sided splits of V, collapsing interchangeable nodes (same
    neighbourhood and the same distances to everything else) into counts.
    ``auto`` picks the first that applies. With ``centers`` every listed
    center must head its own cluster and no other node may be a center.
    """
    k = instance.k if k is None else k
    if k < 1:
        raise ContractError("k must be positive")
    if method == "auto":
        method = "enumerate" if instance.n <= MAX_DISJOINT_N or centers is not None else "bipartition"
    if method == "enumerate":
        return _disjoint_enumerate(instance, k, centers)
    if method == "bipartition":
        if centers is not None or k > 2:
            raise SizeGuardError("the bipartition oracle handles free centers and k <= 2 only")
        return _disjoint_bipartition(instance, k)
    raise ContractError(f"unknown method {method!r}")


def _disjoint_enumerate(instance: Instance, k: int, centers) -> OracleResult:
    n = instance.n
    if n > MAX_DISJOINT_N:
        raise SizeGuardError(f"brute_force_disjoint enumeration is limited to n <= {MAX_DISJOINT_N}")
    d = instance.dist
    nbr = instance.neighbor_masks()
    conn_memo: dict[int, bool] = {}
    cost_memo: dict[int, tuple] = {}
    fixed = None if centers is None else sorted(set(int(c) for c in centers))

    def connected(mask):
        if mask not in conn_memo:
            conn_memo[mask] = mask_connected(nbr, mask)
        return conn_memo[mask]

    def best_center(mask):
        if mask not in cost_memo:
            members = _bits(mask)
            pool = members if fixed is None else [c for c in members if c in fixed]
            best = None
            for c in pool:
                cost = sum((d[c, v] for v in members), _zero(instance))
                if best is None or cost < best[0]:
                    best = (cost, c)
            cost_memo[mask] = best
        return cost_memo[mask]

    best = None
    if fixed is not None:
        if len(fixed) > k:
            raise ContractError("more fixed centers than k")
        others = [v for v in range(n) if v not in fixed]
        for labels in itertools.product(range(len(fixed)), repeat=len(others)):
            masks = [1 << c for c in fixed]
            for v, lab in zip(others, labels):
                masks[lab] |= 1 << v
            if not all(connected(m) for m in masks):
                continue
            total = sum((sum((d[c, v] for v in _bits(m)), _zero(instance))
                         for c, m in zip(fixed, masks)), _zero(instance))
            if best is None or total < best[0]:
                best = (total, list(zip(fixed, masks)))
    else:
        assign = [0] * n

        def walk(v, blocks):
            nonlocal best
            if v == n:
                masks = [0] * blocks
                for u, lab in enumerate(assign):
                    masks[lab] |= 1 << u
                if not all(connected(m) for m in masks):
                    return
                parts = [best_center(m) for m in masks]
                total = sum((p[0] for p in parts), _zero(instance))
                if best is None or total < best[0]:
                    best = (total, [(p[1], m) for p, m in zip(parts, masks)])
                return
            for lab in range(min(blocks + 1, k)):
                assign[v] = lab
                walk(v + 1, max(blocks, lab + 1))

        walk(0, 0)
    if best is None:
        raise InfeasibleError("no feasible disjoint clustering")
    clustering = Clustering.from_pairs((c, _bits(m)) for c, m in sorted(best[1]))
    return OracleResult(best[0], clustering)


def twin_classes(instance: Instance) -> list[list[int]]:
    """Classes of pairwise interchangeable nodes.

    u and v are interchangeable when they are non-adjacent, have the same
    neighbours and the same distance to every third node. Swapping them is
    then an automorphism of the instance, so only how many members of a class
    fall on each side of a split matters.
    """
    n = instance.n
    adj = [set(a) for a in instance.adjacency]
    d = instance.dist
    classes: list[list[int]] = []
    for v in range(n):
        for cls in classes:
            u = cls[0]
            if v in adj[u] or adj[u] != adj[v]:
                continue
            if all(d[u, w] == d[v, w] for w in range(n) if w not in (u, v)):
                if all(d[u, w] == d[u, v] for w in cls[1:]):
                    cls.append(v)
                    break
        else:
            classes.append([v])
    return classes


def _vector_connected(masks: np.ndarray, nbr: Sequence[int], n: int) -> np.ndarray:
    masks = masks.astype(np.uint64)
    seen = masks & (~masks + np.uint64(1))
    frontier = seen.copy()
    nbr_arr = np.array(nbr, dtype=np.uint64)
    one = np.uint64(1)
    for _ in range(n):
        grow = np.zeros_like(masks)
        for i in range(n):
            has = ((frontier >> np.uint64(i)) & one).astype(bool)
            grow[has] |= nbr_arr[i]
        frontier = grow & masks & ~seen
        if not frontier.any():
            break
        seen |= frontier
    return seen == masks


def _vector_best_center(masks: np.ndarray, d: np.ndarray, n: int):
    bits = ((masks[:, None] >> np.arange(n, dtype=np.uint64)[None, :]) & np.uint64(1)).astype(float)
    costs = bits @ d
    costs[bits == 0] = np.inf
    idx = np.argmin(costs, axis=1)
    return costs[np.arange(len(masks)), idx], idx


def _disjoint_bipartition(instance: Instance, k: int) -> OracleResult:
    n = instance.n
    if n > 62:
        raise SizeGuardError("bipartition oracle needs n <= 62")
    d = instance.float_dist()
    nbr = instance.neighbor_masks()
    full = (1 << n) - 1
    best_cost, best_pairs = np.inf, None
    if instance.is_connected():
        costs, idx = _vector_best_center(np.array([full], dtype=np.uint64), d, n)
        best_cost, best_pairs = float(costs[0]), [(int(idx[0]), full)]
    if k >= 2:
        classes = twin_classes(instance)
        sizes = [len(c) for c in classes]
        total = int(np.prod([s + 1 for s in sizes], dtype=object))
        if total > MAX_BIPARTITIONS:
            raise SizeGuardError(f"{total} split patterns exceed the guard of {MAX_BIPARTITIONS}")
        prefix = []
        for cls in classes:
            masks, acc = [0], 0
            for v in cls:
                acc |= 1 << v
                masks.append(acc)
            prefix.append(np.array(masks, dtype=np.uint64))
        # mixed-radix walk over per-class counts, in chunks
        radices = [s + 1 for s in sizes]
        chunk = 1 << 18
        for start in range(0, total, chunk):
            ids = np.arange(start, min(total, start + chunk), dtype=np.int64)
            side = np.zeros(len(ids), dtype=np.uint64)
            rest = ids.copy()
            for r, pm in zip(radices, prefix):
                side |= pm[rest % r]
                rest //= r
            other = np.uint64(full) & ~side
            ok = (side != 0) & (other != 0) & (side < other)
            side, other = side[ok], other[ok]
            ok = _vector_connected(side, nbr, n)
            side, other = side[ok], other[ok]
            ok = _vector_connected(other, nbr, n)
            side, other = side[ok], other[ok]
            if len(side) == 0:
                continue
            ca, ia = _vector_best_center(side, d, n)
            cb, ib = _vector_best_center(other, d, n)
            tot = ca + cb
            j = int(np.argmin(tot))
            if tot[j] < best_cost - 1e-12:
                best_cost = float(tot[j])
                best_pairs = [(int(ia[j]), int(side[j])), (int(ib[j]), int(other[j]))]
    if best_pairs is None:
        raise InfeasibleError("no feasible disjoint clustering")
    clustering = Clustering.from_pairs((c, _bits(m)) for c, m in sorted(best_pairs))
    return OracleResult(evaluate_cost(instance, clustering), clustering)


# -------------------------------------------------------- non-disjoint oracle

def _connected_masks(instance: Instance) -> np.ndarray:
    nbr = instance.neighbor_masks()
    return np.array([mask_connected(nbr, m) for m in range(1 << instance.n)], dtype=bool)


def brute_force_non_disjoint(instance: Instance, k: int | None = None,
                             centers: Sequence[int] | None = None) -> OracleResult:
    """Optimal overlapping connected clustering with at most k clusters.

    Any family of connected member sets covering V is a candidate; each set
    pays the cost of its best center (or of its fixed center). The search is
    a dynamic program over covered-node bitmasks: after i sets, ``h[U]`` is
    the cheapest way to cover at least U. Guarded at n <= 14.
    """
    n = instance.n
    if n > MAX_NON_DISJOINT_N:
        raise SizeGuardError(f"brute_force_non_disjoint is limited to n <= {MAX_NON_DISJOINT_N}")
    k = instance.k if k is None else k
    centers = instance.centers if centers is None else centers
    d = instance.float_dist()
    size = 1 << n
    full = size - 1
    conn = _connected_masks(instance)
    masks = np.arange(size, dtype=np.uint64)
    bits = ((masks[:, None] >> np.arange(n, dtype=np.uint64)[None, :]) & np.uint64(1)).astype(float)
    sums = bits @ d  # sums[S, c] = sum_{v in S} d(v, c)
    all_ids = np.arange(size)

    def step(h_prev, set_cost):
        """h[U] = min over S of set_cost[S] + h_prev[U minus S]; returns (h, choice)."""
        h = np.full(size, np.inf)
        choice = np.full(size, -1, dtype=np.int64)
        for S in np.flatnonzero(np.isfinite(set_cost)):
            cand = set_cost[S] + h_prev[all_ids & ~int(S)]
            better = cand < h - 1e-12
            h[better] = cand[better]
            choice[better] = S
        return h, choice

    empty = np.full(size, np.inf)
    empty[0] = 0.0
    layers = []
    if centers is not None:
        centers = [int(c) for c in centers]
        if len(centers) > k:
            raise ContractError("more fixed centers than k")
        h = empty
        for c in centers:
            cost = np.where(conn & (bits[:, c] > 0), sums[:, c], np.inf)
            h, choice = step(h, cost)
            layers.append((c, choice))
    else:
        best = np.where(bits > 0, sums, np.inf)
        best_c = np.argmin(best, axis=1)
        cost = np.where(conn, best[all_ids, best_c], np.inf)
        cost[0] = np.inf
        h = empty
        for _ in range(k):
            h_new, choice = step(h, cost)
            keep = h <= h_new
            h_new[keep] = h[keep]
            choice[keep] = -1
            h = h_new
            layers.append((None, choice))
    if not np.isfinite(h[full]):
        raise InfeasibleError("no feasible connected cover")
    pairs = []
    U = full
    for c, choice in reversed(layers):
        S = int(choice[U])
        if S < 0:
            if c is not None:
                S = 1 << c
            else:
                continue
        center = c if c is not None else int(best_c[S])
        pairs.append((center, S))
        U &= ~S
    merged: dict[int, int] = {}
    for c, S in pairs:
        merged[c] = merged.get(c, 0) | S
    clustering = Clustering.from_pairs((c, _bits(m)) for c, m in sorted(merged.items()))
    return OracleResult(evaluate_cost(instance, clustering), clustering)


def non_disjoint_by_memberships(instance: Instance, k: int | None = None,
                                centers: Sequence[int] | None = None) -> OracleResult:
    """Literal search over membership matrices in {0,1}^(n x k); for cross-checking tiny cases."""
    n = instance.n
    k = instance.k if k is None else k
    centers = instance.centers if centers is None else centers
    if centers is not None:
        k = len(centers)
    if n * k > MAX_MEMBERSHIP_NK:
        raise SizeGuardError(f"membership enumeration is limited to n*k <= {MAX_MEMBERSHIP_NK}")
    nbr = instance.neighbor_masks()
    d = instance.dist
    full = (1 << n) - 1
    center_choices = [tuple(centers)] if centers is not None else itertools.product(range(n), repeat=k)
    best = None
    for cs in center_choices:
        for masks in itertools.product(range(1 << n), repeat=k):
            if any(not (m >> c) & 1 for m, c in zip(masks, cs)):
                continue
            union = 0
            for m in masks:
                union |= m
            if union != full or not all(mask_connected(nbr, m) for m in masks):
                continue
            cost = sum((d[c, v] for c, m in zip(cs, masks) for v in _bits(m)), _zero(instance))
            if best is None or cost < best[0]:
                best = (cost, list(zip(cs, masks)))
    if best is None:
        raise InfeasibleError("no feasible connected cover")
    return OracleResult(best[0], Clustering.from_pairs((c, _bits(m)) for c, m in best[1]))


# ------------------------------------------------------------- small problems

def brute_force_dominating_set(n: int, edges: Sequence[tuple[int, int]]) -> tuple[int, tuple[int, ...]]:
    """Size of a minimum dominating set and the lexicographically first one of that size."""
    if n > MAX_DOMSET_N:
        raise SizeGuardError(f"brute_force_dominating_set is limited to n <= {MAX_DOMSET_N}")
    closed = [1 << v for v in range(n)]
    for u, v in edges:
        closed[u] |= 1 << v
        closed[v] |= 1 << u
    full = (1 << n) - 1
    for size in range(n + 1):
        for subset in itertools.combinations(range(n), size):
            covered = 0
            for v in subset:
                covered |= closed[v]
            if covered == full:
                return size, subset
    raise AssertionError("unreachable")


def brute_force_sat(clauses: Sequence[Sequence[int]], num_vars: int) -> tuple[bool, ...] | None:
    """A satisfying assignment (index i holds x_{i+1}) or None."""
    for values in itertools.product((False, True), repeat=num_vars):
        if all(any(values[abs(l) - 1] == (l > 0) for l in clause) for clause in clauses):
            return values
    return None


def brute_force_steiner(adj: Sequence[Sequence[int]], weights: Sequence, terminals) -> tuple[float, frozenset]:
    """Lightest connected node set containing the terminals (weight counted on non-terminals)."""
    n = len(adj)
    if n > MAX_SEPARATOR_N:
        raise SizeGuardError(f"brute_force_steiner is limited to n <= {MAX_SEPARATOR_N}")
    terminals = set(terminals)
    others = [v for v in range(n) if v not in terminals]
    nbr = [sum(1 << w for w in a) for a in adj]
    base = sum(1 << t for t in terminals)
    best = None
    for size in range(len(others) + 1):
        for extra in itertools.combinations(others, size):
            mask = base | sum(1 << v for v in extra)
            if not mask_connected(nbr, mask):
                continue
            w = sum(weights[v] for v in extra)
            if best is None or w < best[0]:
                best = (w, frozenset(terminals | set(extra)))
    if best is None:
        raise InfeasibleError("terminals are not connected")
    return best
