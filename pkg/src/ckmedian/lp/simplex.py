"""A small linear-programming layer: a model builder and two solver backends.

The in-repo backend is a dense two-phase tableau simplex. It prices with
Dantzig's rule and falls back to Bland's rule after a run of degenerate
pivots, so it cannot cycle. The ``highs`` backend hands the same model to
scipy's HiGHS and is used for the larger flow formulations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import ContractError, SolverError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_SENSES = ("<=", ">=", "==")


@dataclass
class Row:
    coeffs: dict[int, float]
    sense: str
    rhs: float
    name: str | None = None


@dataclass
class LinearProgram:
    """Minimise c.x over named non-negative variables subject to linear rows."""

    names: list[str] = field(default_factory=list)
    upper: list[float | None] = field(default_factory=list)
    cost: list[float] = field(default_factory=list)
    rows: list[Row] = field(default_factory=list)
    index: dict[str, int] = field(default_factory=dict)

    @property
    def num_vars(self) -> int:
        return len(self.names)

    def add_var(self, name: str, cost: float = 0.0, ub: float | None = None) -> int:
        if name in self.index:
            raise ContractError(f"duplicate variable {name!r}")
        self.index[name] = len(self.names)
        self.names.append(name)
        self.upper.append(ub)
        self.cost.append(float(cost))
        return self.index[name]

    def var(self, name: str) -> int:
        return self.index[name]

    def add_row(self, coeffs: dict, sense: str, rhs: float, name: str | None = None) -> None:
        if sense not in _SENSES:
            raise ContractError(f"unknown row sense {sense!r}")
        clean: dict[int, float] = {}
        for key, a in coeffs.items():
            j = self.index[key] if isinstance(key, str) else int(key)
            if not 0 <= j < self.num_vars:
                raise ContractError(f"row references unknown variable {key!r}")
            clean[j] = clean.get(j, 0.0) + float(a)
        self.rows.append(Row(clean, sense, float(rhs), name))

    def dense(self):
        """Return (c, A, senses, b, ub) as numpy arrays."""
        m, n = len(self.rows), self.num_vars
        A = np.zeros((m, n))
        for i, row in enumerate(self.rows):
            for j, a in row.coeffs.items():
                A[i, j] = a
        b = np.array([r.rhs for r in self.rows], dtype=float)
        senses = [r.sense for r in self.rows]
        ub = np.array([np.inf if u is None else u for u in self.upper], dtype=float)
        return np.array(self.cost, dtype=float), A, senses, b, ub

    def to_lp_format(self) -> str:
        """CPLEX LP text, handy for checking a model with an external solver."""

        def term(a, name, first):
            sign = "-" if a < 0 else ("" if first else "+")
            mag = abs(a)
            coef = "" if mag == 1 else f"{mag:.17g} "
            return f"{sign} {coef}{name}".strip() if not first else f"{sign}{coef}{name}"

        def expr(coeffs):
            items = sorted((j, a) for j, a in coeffs.items() if a != 0)
            if not items:
                return "0 " + self.names[0] if self.names else "0"
            return " ".join(term(a, self.names[j], i == 0) for i, (j, a) in enumerate(items))

        lines = ["Minimize", " obj: " + expr(dict(enumerate(self.cost))), "Subject To"]
        for i, row in enumerate(self.rows):
            op = {"<=": "<=", ">=": ">=", "==": "="}[row.sense]
            lines.append(f" {row.name or f'r{i}'}: {expr(row.coeffs)} {op} {row.rhs:.17g}")
        lines.append("Bounds")
        for name, u in zip(self.names, self.upper):
            lines.append(f" 0 <= {name} <= {u:.17g}" if u is not None else f" {name} >= 0")
        lines.append("End")
        return "\n".join(lines) + "\n"


@dataclass
class LPResult:
    status: str
    value: float | None
    x: np.ndarray | None
    iterations: int = 0
    backend: str = "simplex"

    def __getitem__(self, j: int) -> float:
        return float(self.x[j])


def solve_lp(lp: LinearProgram, backend: str = "simplex", tol: float = 1e-9) -> LPResult:
    if backend == "simplex":
        return _solve_tableau(lp, tol)
    if backend == "highs":
        return _solve_highs(lp)
    raise ContractError(f"unknown LP backend {backend!r}")


def _solve_highs(lp: LinearProgram) -> LPResult:
    from scipy.optimize import linprog
    from scipy.sparse import coo_matrix

    n = lp.num_vars
    ub_r, ub_c, ub_v, b_ub = [], [], [], []
    eq_r, eq_c, eq_v, b_eq = [], [], [], []
    for row in lp.rows:
        if row.sense == "==":
            i = len(b_eq)
            for j, a in row.coeffs.items():
                eq_r.append(i), eq_c.append(j), eq_v.append(a)
            b_eq.append(row.rhs)
        else:
            sign = 1.0 if row.sense == "<=" else -1.0
            i = len(b_ub)
            for j, a in row.coeffs.items():
                ub_r.append(i), ub_c.append(j), ub_v.append(sign * a)
            b_ub.append(sign * row.rhs)
    A_ub = coo_matrix((ub_v, (ub_r, ub_c)), shape=(len(b_ub), n)).tocsr() if b_ub else None
    A_eq = coo_matrix((eq_v, (eq_r, eq_c)), shape=(len(b_eq), n)).tocsr() if b_eq else None
    bounds = [(0, u) for u in lp.upper]
    res = linprog(np.array(lp.cost), A_ub=A_ub, b_ub=b_ub or None, A_eq=A_eq,
                  b_eq=b_eq or None, bounds=bounds, method="highs")
    if res.status == 0:
        return LPResult(OPTIMAL, float(res.fun), np.asarray(res.x), int(res.nit), "highs")
    if res.status == 2:
        return LPResult(INFEASIBLE, None, None, int(res.nit), "highs")
    if res.status == 3:
        return LPResult(UNBOUNDED, None, None, int(res.nit), "highs")
    raise SolverError(f"HiGHS failed: {res.message}")


class _Tableau:
    def __init__(self, T: np.ndarray, basis: list[int], tol: float, max_iter: int):
        self.T = T
        self.basis = basis
        self.tol = tol
        self.max_iter = max_iter
        self.iterations = 0

    def pivot(self, r: int, j: int) -> None:
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[np.abs(T) < 1e-13] = 0.0
        self.basis[r] = j
        self.iterations += 1

    def run(self, allowed: np.ndarray) -> str:
        """Minimise the objective stored in the last row over columns in ``allowed``."""
        T, tol = self.T, self.tol
        m = T.shape[0] - 1
        degenerate_run = 0
        while True:
            if self.iterations > self.max_iter:
                raise SolverError("simplex iteration cap exceeded")
            rc = T[-1, :-1]
            candidates = np.flatnonzero((rc < -tol) & allowed)
            if candidates.size == 0:
                return OPTIMAL
            if degenerate_run > 50:
                j = int(candidates[0])  # Bland
            else:
                j = int(candidates[np.argmin(rc[candidates])])
            column = T[:m, j]
            rows = np.flatnonzero(column > tol)
            if rows.size == 0:
                return UNBOUNDED
            ratios = T[rows, -1] / column[rows]
            best = ratios.min()
            ties = rows[ratios <= best + tol * max(1.0, abs(best))]
            r = int(min(ties, key=lambda i: self.basis[i]))
            degenerate_run = degenerate_run + 1 if T[r, -1] <= tol else 0
            self.pivot(r, j)


def _solve_tableau(lp: LinearProgram, tol: float) -> LPResult:
    c, A, senses, b, ub = lp.dense()
    n = lp.num_vars
    rows = [(A[i], senses[i], b[i]) for i in range(A.shape[0])]
    for j in range(n):
        if np.isfinite(ub[j]):
            e = np.zeros(n)
            e[j] = 1.0
            rows.append((e, "<=", ub[j]))
    m = len(rows)
    if m == 0:
        if np.any(c < 0):
            return LPResult(UNBOUNDED, None, None)
        return LPResult(OPTIMAL, 0.0, np.zeros(n))

    norm = []
    for a, s, rhs in rows:
        if rhs < 0:
            a, rhs = -a, -rhs
            s = {"<=": ">=", ">=": "<=", "==": "=="}[s]
        norm.append((a, s, rhs))
    n_slack = sum(1 for _, s, _ in norm if s != "==")
    n_art = sum(1 for _, s, _ in norm if s != "<=")
    width = n + n_slack + n_art
    T = np.zeros((m + 1, width + 1))
    basis = [0] * m
    slack_at, art_at = n, n + n_slack
    artificial = np.zeros(width, dtype=bool)
    for i, (a, s, rhs) in enumerate(norm):
        T[i, :n] = a
        T[i, -1] = rhs
        if s == "<=":
            T[i, slack_at] = 1.0
            basis[i] = slack_at
            slack_at += 1
        else:
            if s == ">=":
                T[i, slack_at] = -1.0
                slack_at += 1
            T[i, art_at] = 1.0
            artificial[art_at] = True
            basis[i] = art_at
            art_at += 1

    tab = _Tableau(T, basis, tol, max_iter=50 * (m + width) + 1000)
    if n_art:
        art_rows = [i for i in range(m) if artificial[basis[i]]]
        T[-1, :] = -T[art_rows, :].sum(axis=0)
        T[-1, :-1][artificial] = 0.0
        tab.run(np.ones(width, dtype=bool))
        if -T[-1, -1] > tol * max(1.0, float(np.abs(b).max(initial=0.0))) * 10:
            return LPResult(INFEASIBLE, None, None, tab.iterations)
        # drive zero-level artificials out of the basis, dropping redundant rows
        keep = []
        for i in range(m):
            if artificial[tab.basis[i]]:
                cands = np.flatnonzero((np.abs(T[i, :-1]) > tol) & ~artificial)
                if cands.size:
                    tab.pivot(i, int(cands[0]))
                    keep.append(i)
            else:
                keep.append(i)
        if len(keep) < m:
            T = np.vstack([T[keep], T[-1:]])
            tab.T = T
            tab.basis = [tab.basis[i] for i in keep]
            m = len(keep)

    T = tab.T
    cost = np.zeros(width)
    cost[:n] = c
    T[-1, :-1] = cost
    T[-1, -1] = 0.0
    for i, j in enumerate(tab.basis):
        if cost[j] != 0.0:
            T[-1] -= cost[j] * T[i]
    status = tab.run(~artificial)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, None, None, tab.iterations)
    x = np.zeros(width)
    for i, j in enumerate(tab.basis):
        x[j] = T[i, -1]
    x = np.maximum(x[:n], 0.0)
    return LPResult(OPTIMAL, float(c @ x), x, tab.iterations)
