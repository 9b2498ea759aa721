"""Exact disjoint connected k-median on trees in O(n^2 k^2).

Root the tree and let T_a be the subtree of a. Two tables drive the DP:

* ``I[a][b][j]`` for b in T_a: cheapest cost of T_a when a is served by
  center b and T_a opens at most j centers (b included).
* ``C[a][b][j]`` for b outside T_a: cheapest cost of T_a when a may join the
  cluster of the outside center b, or T_a is served on its own by at most j
  of its nodes.

Internal nodes fold their children in one at a time through the partial
tables X (a's center lies in the part seen so far) and Y (it lies outside).
Values are plain Python numbers, so Fraction distances stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import Clustering, ContractError, InfeasibleError, Instance

INF = math.inf


@dataclass
class TreeResult:
    cost: float
    clustering: Clustering
    assignment: list[int]


def _rooted(instance: Instance, root: int):
    n = instance.n
    if len(instance.edges) != n - 1 or not instance.is_connected():
        raise ContractError("the tree DP needs a tree (connected, n - 1 edges)")
    if not 0 <= root < n:
        raise ContractError(f"root {root} outside 0..{n - 1}")
    adj = instance.adjacency
    parent = [-1] * n
    order = [root]
    seen = [False] * n
    seen[root] = True
    for u in order:
        for w in adj[u]:
            if not seen[w]:
                seen[w] = True
                parent[w] = u
                order.append(w)
    children = [sorted(w for w in adj[u] if w != parent[u]) for u in range(n)]
    post = list(reversed(order))
    sub = [None] * n
    for a in post:
        s = {a}
        for c in children[a]:
            s |= sub[c]
        sub[a] = frozenset(s)
    return children, post, sub


def _fold(left, right, lo: int, K: int):
    """min over k1 >= lo of left[k1] + right[j - k1]; the smallest k1 wins ties."""
    vals = [INF] * (K + 1)
    args = [-1] * (K + 1)
    for j in range(K + 1):
        best, arg = INF, -1
        for k1 in range(lo, j + 1):
            v = left[k1] + right[j - k1]
            if v < best:
                best, arg = v, k1
        vals[j], args[j] = best, arg
    return vals, args


def solve_tree(instance: Instance, k: int | None = None, root: int = 0) -> TreeResult:
    """Optimal disjoint connected clustering of a tree with at most k clusters."""
    K = instance.k if k is None else int(k)
    if K < 1:
        raise ContractError("k must be positive")
    n = instance.n
    d = instance.dist
    children, post, sub = _rooted(instance, root)

    I: list[dict] = [None] * n
    C: list[dict] = [None] * n
    C_pick: list[dict] = [None] * n       # C_pick[a][b][j]: True when joining b is chosen
    I_best: list[list] = [None] * n       # I_best[a][j] = (value, b)
    arg_x: list[list] = [None] * n        # arg_x[a][i][b][j] for fold steps i >= 1 (0-based)
    arg_y: list[list] = [None] * n

    for a in post:
        kids = children[a]
        outside = [b for b in range(n) if b not in sub[a]]
        if not kids:
            X = {a: [INF] + [0 * d[a, a]] * K}
            Y = {b: [d[a, b]] * (K + 1) for b in outside}
            arg_x[a], arg_y[a] = [], []
        else:
            c1 = kids[0]
            X = {a: [INF] + [C[c1][a][j - 1] for j in range(1, K + 1)]}
            for b in sub[c1]:
                X[b] = [d[b, a] + I[c1][b][j] for j in range(K + 1)]
            Y = {b: [d[b, a] + C[c1][b][j] for j in range(K + 1)]
                 for b in range(n) if b != a and b not in sub[c1]}
            ax_steps, ay_steps = [], []
            for c in kids[1:]:
                nx_, ny_, ax, ay = {}, {}, {}, {}
                for b, row in X.items():
                    nx_[b], ax[b] = _fold(row, C[c][b], 1, K)
                for b in sub[c]:
                    vals, args = [INF] * (K + 1), [-1] * (K + 1)
                    yb, ib = Y[b], I[c][b]
                    for j in range(K + 1):
                        best, arg = INF, -1
                        for k1 in range(0, j):
                            v = yb[k1] + ib[j - k1]
                            if v < best:
                                best, arg = v, k1
                        vals[j], args[j] = best, arg
                    nx_[b], ax[b] = vals, args
                for b, row in Y.items():
                    if b not in sub[c]:
                        ny_[b], ay[b] = _fold(row, C[c][b], 0, K)
                X, Y = nx_, ny_
                ax_steps.append(ax)
                ay_steps.append(ay)
            arg_x[a], arg_y[a] = ax_steps, ay_steps

        I[a] = X
        best = []
        for j in range(K + 1):
            val, who = INF, -1
            for b in sorted(X):
                if X[b][j] < val:
                    val, who = X[b][j], b
            best.append((val, who))
        I_best[a] = best
        C[a], C_pick[a] = {}, {}
        for b in outside:
            row, pick = [], []
            for j in range(K + 1):
                join = Y[b][j]
                if join <= best[j][0]:
                    row.append(join)
                    pick.append(True)
                else:
                    row.append(best[j][0])
                    pick.append(False)
            C[a][b], C_pick[a][b] = row, pick
    cost, center = I_best[root][K]
    if cost == INF:
        raise InfeasibleError("no feasible clustering")

    assign = [-1] * n
    stack = [("I", root, center, K)]
    while stack:
        kind, a, b, j = stack.pop()
        if kind == "C":
            if C_pick[a][b][j]:
                assign[a] = b
                _expand_y(a, b, j, children, arg_y, stack)
            else:
                stack.append(("I", a, I_best[a][j][1], j))
            continue
        assign[a] = b
        _expand_x(a, b, j, children, sub, arg_x, arg_y, stack)
    clustering = Clustering.from_assignment(assign)
    return TreeResult(cost, clustering, assign)


def _expand_x(a, b, j, children, sub, arg_x, arg_y, stack):
    kids = children[a]
    i = len(kids) - 1
    while i >= 1:
        c = kids[i]
        k1 = arg_x[a][i - 1][b][j]
        if b in sub[c]:
            stack.append(("I", c, b, j - k1))
            _expand_y(a, b, k1, children, arg_y, stack, upto=i - 1)
            return
        stack.append(("C", c, b, j - k1))
        j = k1
        i -= 1
    if kids:
        c = kids[0]
        if b == a:
            stack.append(("C", c, a, j - 1))
        else:
            stack.append(("I", c, b, j))


def _expand_y(a, b, j, children, arg_y, stack, upto=None):
    kids = children[a]
    i = len(kids) - 1 if upto is None else upto
    while i >= 1:
        c = kids[i]
        k1 = arg_y[a][i - 1][b][j]
        stack.append(("C", c, b, j - k1))
        j = k1
        i -= 1
    if kids:
        stack.append(("C", kids[0], b, j))


def solve_tree_fixed(instance: Instance, centers: Sequence[int] | None = None,
                     root: int = 0) -> TreeResult:
    """Optimal disjoint clustering of a tree around a given center set, in O(n |centers|)."""
    centers = instance.centers if centers is None else centers
    if not centers:
        raise ContractError("a non-empty center set is required")
    cset = sorted(set(int(c) for c in centers))
    if len(cset) > instance.k:
        raise ContractError("more fixed centers than k")
    n = instance.n
    d = instance.dist
    children, post, sub = _rooted(instance, root)
    is_center = [False] * n
    for c in cset:
        is_center[c] = True
    J = [None] * n
    own = [None] * n  # own[a] = (value, b) best center inside T_a
    for a in post:
        row = {}
        for b in cset:
            if is_center[a] and b != a:
                row[b] = INF
                continue
            total = d[a, b]
            for c in children[a]:
                if b in sub[c]:
                    total += J[c][b]
                else:
                    total += min(J[c][b], own[c][0])
            row[b] = total
        J[a] = row
        inside = [(row[b], b) for b in cset if b in sub[a]]
        own[a] = min(inside) if inside else (INF, -1)
    cost, center = own[root]
    if cost == INF:
        raise InfeasibleError("no feasible clustering around the given centers")
    assign = [-1] * n
    stack = [(root, center)]
    while stack:
        a, b = stack.pop()
        assign[a] = b
        for c in children[a]:
            if b in sub[c] or J[c][b] <= own[c][0]:
                stack.append((c, b))
            else:
                stack.append((c, own[c][1]))
    return TreeResult(cost, Clustering.from_assignment(assign), assign)
