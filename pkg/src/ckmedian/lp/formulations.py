"""The connected k-median LP relaxations, in flow form and in cut form.

Both relaxations ask that every node v is assigned to centers with total
weight at least 1 and that the x-weight of every node set separating v from c
is at least x_v^c. The flow form states this with one commodity per (v, c)
pair; the cut form generates separator rows on demand with a max-flow oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..core import ContractError, InfeasibleError, Instance, InvariantViolation, SolverError
from ..cuts import sep
from .simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram, solve_lp

POST_CHECK_TOL = 1e-7


@dataclass
class LPSolution:
    """Optimal fractional assignment; ``x[v, c]`` is zero outside the allowed center columns."""

    value: float
    x: np.ndarray
    columns: tuple[int, ...]
    backend: str
    rounds: int = 1
    rows_added: int = 0
    model_size: tuple[int, int] = (0, 0)
    extra: dict = field(default_factory=dict)


def _columns(instance: Instance, centers) -> tuple[tuple[int, ...], bool]:
    if centers is None:
        return tuple(range(instance.n)), False
    cols = tuple(sorted(set(int(c) for c in centers)))
    if not cols:
        raise ContractError("the center set is empty")
    for c in cols:
        if not 0 <= c < instance.n:
            raise ContractError(f"center {c} outside 0..{instance.n - 1}")
    return cols, True


def _x_name(v: int, c: int) -> str:
    return f"x_{v}_{c}"


def _add_x_block(lp: LinearProgram, instance: Instance, cols, fixed: bool, k):
    d = instance.float_dist()
    n = instance.n
    for v in range(n):
        for c in cols:
            lp.add_var(_x_name(v, c), cost=d[v, c])
    for v in range(n):
        lp.add_row({_x_name(v, c): 1.0 for c in cols}, ">=", 1.0, f"cover_{v}")
    if fixed:
        for c in cols:
            lp.add_row({_x_name(c, c): 1.0}, "==", 1.0, f"open_{c}")
    else:
        lp.add_row({_x_name(c, c): 1.0 for c in cols}, "<=", float(k), "budget")
    # the separator {c} itself: nobody is assigned to c more than c is opened
    for c in cols:
        for v in range(n):
            if v != c:
                lp.add_row({_x_name(v, c): 1.0, _x_name(c, c): -1.0}, "<=", 0.0, f"open_{v}_{c}")


def _add_flow_block(lp: LinearProgram, instance: Instance, cols) -> None:
    """One commodity per (v, c): v sends x_v^c units to c through nodes of capacity x_u^c.

    Arcs entering the source v or leaving the sink c are left out. With them a
    commodity could leave v and come straight back, which satisfies the
    out-flow row without any flow reaching c.
    """
    adj = instance.adjacency
    n = instance.n
    for c in cols:
        for v in range(n):
            if v == c:
                continue
            arcs = [(u, w) for u in range(n) for w in adj[u] if w != v and u != c]
            names = {}
            for u, w in arcs:
                names[u, w] = lp.add_var(f"y_{u}_{w}_{v}_{c}")
            out_v = {names[v, w]: 1.0 for w in adj[v]}
            out_v[lp.var(_x_name(v, c))] = -1.0
            lp.add_row(out_v, "==", 0.0, f"src_{v}_{c}")
            for u in range(n):
                if u in (v, c):
                    continue
                inflow = {names[w, u]: 1.0 for w in adj[u] if (w, u) in names}
                balance = dict(inflow)
                for w in adj[u]:
                    if (u, w) in names:
                        balance[names[u, w]] = balance.get(names[u, w], 0.0) - 1.0
                lp.add_row(balance, "==", 0.0, f"cons_{u}_{v}_{c}")
                cap = dict(inflow)
                cap[lp.var(_x_name(u, c))] = -1.0
                lp.add_row(cap, "<=", 0.0, f"cap_{u}_{v}_{c}")


def build_flow_assignment_lp(instance: Instance, centers: Sequence[int] | None = None) -> LinearProgram:
    """Flow form of the assignment LP for a fixed center set (defaults to ``instance.centers``)."""
    centers = instance.centers if centers is None else centers
    if centers is None:
        raise ContractError("the assignment LP needs a center set")
    cols, _ = _columns(instance, centers)
    lp = LinearProgram()
    _add_x_block(lp, instance, cols, True, None)
    _add_flow_block(lp, instance, cols)
    return lp


def build_flow_center_lp(instance: Instance, k: int | None = None) -> LinearProgram:
    """Flow form of the LP where every node is a potential center and at most k are opened."""
    k = instance.k if k is None else k
    cols, _ = _columns(instance, None)
    lp = LinearProgram()
    _add_x_block(lp, instance, cols, False, k)
    _add_flow_block(lp, instance, cols)
    return lp


def _extract(instance: Instance, lp: LinearProgram, xs: np.ndarray, cols) -> np.ndarray:
    x = np.zeros((instance.n, instance.n))
    for v in range(instance.n):
        for c in cols:
            x[v, c] = xs[lp.var(_x_name(v, c))]
    x[np.abs(x) < 1e-12] = 0.0
    return x


def _check_status(status: str) -> None:
    if status == INFEASIBLE:
        raise InfeasibleError("the LP relaxation is infeasible (some node cannot reach a center)")
    if status == UNBOUNDED:
        raise SolverError("the LP relaxation is unbounded")
    if status != OPTIMAL:
        raise SolverError(f"unexpected LP status {status}")


def solve_flow_lp(instance: Instance, centers: Sequence[int] | None = None, k: int | None = None,
                  backend: str = "highs") -> LPSolution:
    """Solve the flow form. With ``centers`` it is the assignment LP, otherwise the center LP."""
    if centers is not None:
        lp = build_flow_assignment_lp(instance, centers)
        cols, _ = _columns(instance, centers)
    else:
        lp = build_flow_center_lp(instance, k)
        cols = tuple(range(instance.n))
    res = solve_lp(lp, backend=backend)
    _check_status(res.status)
    x = _extract(instance, lp, res.x, cols)
    return LPSolution(res.value, x, cols, res.backend, model_size=(len(lp.rows), lp.num_vars))


def solve_cut_lp(instance: Instance, centers: Sequence[int] | None = None, k: int | None = None,
                 backend: str = "simplex", tol: float = 1e-9) -> LPSolution:
    """Solve the cut form by row generation.

    Every round solves the current restriction, then for each (v, c) finds a
    minimum separator of v from c under weights x[., c]. A separator lighter
    than x_v^c - tol becomes a new row. The loop stops when no row is added.
    """
    if centers is None and k is None:
        k = instance.k
    cols, fixed = _columns(instance, centers)
    n = instance.n
    adj = instance.adjacency
    lp = LinearProgram()
    _add_x_block(lp, instance, cols, fixed, k)
    cap = 10 * n ** 3
    added = 0
    seen: set[tuple[int, int, frozenset]] = set()
    rounds = 0
    while True:
        rounds += 1
        res = solve_lp(lp, backend=backend)
        _check_status(res.status)
        x = _extract(instance, lp, res.x, cols)
        new_rows = 0
        for c in cols:
            w = x[:, c].tolist()
            for v in range(n):
                if v == c or x[v, c] <= tol:
                    continue
                cut = sep(adj, w, {v}, {c})
                if cut.value < x[v, c] - tol:
                    key = (v, c, cut.nodes)
                    if key in seen:
                        continue  # solver round-off on a row we already have
                    seen.add(key)
                    row = {_x_name(u, c): 1.0 for u in cut.nodes}
                    row[_x_name(v, c)] = row.get(_x_name(v, c), 0.0) - 1.0
                    lp.add_row(row, ">=", 0.0, f"cut_{v}_{c}_{len(seen)}")
                    new_rows += 1
        added += new_rows
        if added > cap:
            raise SolverError(f"row generation exceeded {cap} rows")
        if new_rows == 0:
            break
    sol = LPSolution(res.value, x, cols, res.backend, rounds=rounds, rows_added=added,
                     model_size=(len(lp.rows), lp.num_vars))
    post_check(instance, sol.x, cols)
    return sol


def post_check(instance: Instance, x: np.ndarray, cols=None, tol: float = POST_CHECK_TOL) -> None:
    """Every separator of v from c carries x-weight at least x_v^c - tol."""
    cols = range(instance.n) if cols is None else cols
    adj = instance.adjacency
    for c in cols:
        w = x[:, c].tolist()
        for v in range(instance.n):
            if v != c and x[v, c] > tol:
                value = sep(adj, w, {v}, {c}).value
                if value < x[v, c] - tol:
                    raise InvariantViolation(
                        f"separator of {v} from {c} has weight {value:.3g} < x={x[v, c]:.3g}")


def solve_center_lp(instance: Instance, k: int | None = None, method: str = "flow",
                    backend: str | None = None) -> LPSolution:
    """Convenience wrapper: the center LP by either formulation."""
    if method == "flow":
        return solve_flow_lp(instance, None, k, backend=backend or "highs")
    if method == "cut":
        return solve_cut_lp(instance, None, k if k is not None else instance.k,
                            backend=backend or "simplex")
    raise ContractError(f"unknown LP method {method!r}")
