"""Half-open center selection.

Starting from an optimal fractional solution x~ of the center LP, nodes are
visited in order of their fractional radius. A node whose cheap fractional
openings still sum to at least 1/2 becomes a center; any other node joins the
set S_c of a nearby center that already serves it. Between visits the
algorithm performs every shift cheaper than four times the next radius: the
opening of some c' is moved towards a center c over the members of S_c.

After a shift over node v, column c' of x is reset to the marginal
separation values Delta(D_c', ., c') under weights x~[., c'], where D_c' collects
every node shifted away from c'. This keeps x cut-feasible while it shrinks.
The result y is half-open: every chosen center serves itself with weight at
least 1/2 and y is 1/(8k)-connected.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import ContractError, InvariantViolation
from ..cuts import sep

ZERO = 1e-9
AUDIT_TOL = 1e-7
AUDIT_MAX_N = 12


def _le(a: float, b: float) -> bool:
    """a <= b up to round-off in the distances and radii."""
    return a <= b + 1e-9 * max(1.0, abs(b))


def clean_solution(x: np.ndarray) -> np.ndarray:
    x = np.array(x, dtype=float)
    x[x < ZERO] = 0.0
    return x


@dataclass
class Radii:
    mass: np.ndarray     # m_v = sum_c x~_v^c
    price: np.ndarray    # p_v = sum_c x~_v^c d(v, c)
    radius: np.ndarray   # r_v = p_v / m_v


def compute_radii(x: np.ndarray, d: np.ndarray) -> Radii:
    """Fractional radius of every node; also checks that 3/4 of its mass lies within 4 r_v."""
    x = np.asarray(x, dtype=float)
    mass = x.sum(axis=1)
    if np.any(mass <= 0):
        raise ContractError("every node needs positive fractional assignment")
    price = (x * d).sum(axis=1)
    radius = price / mass
    for v in range(len(x)):
        near = x[v, [c for c in range(len(x)) if _le(d[v, c], 4 * radius[v])]].sum()
        if near < 0.75 * mass[v] - AUDIT_TOL:
            raise InvariantViolation(f"node {v}: only {near:.6g} of its mass within 4 r_v")
    return Radii(mass, price, radius)


@dataclass
class ShiftEvent:
    source: int          # c', whose opening moves
    target: int          # c, the receiving center
    via: int             # the member of S_c shifted over
    amount: float        # f
    source_open_before: float
    source_open_after: float


@dataclass
class HalfOpenResult:
    y: np.ndarray                       # aggregated y[v, c]
    centers: list[int]                  # C, in the order chosen
    members: dict[int, list[int]]       # S_c
    pair_y: dict[tuple[int, int], np.ndarray]   # y^{c', c} keyed by (c', c)
    removed: dict[int, list[int]]       # D_c'
    radii: Radii
    x_tilde: np.ndarray
    x_final: np.ndarray
    trace: list = field(default_factory=list)
    shifts: list[ShiftEvent] = field(default_factory=list)
    audits: int = 0

    def to_json(self) -> dict:
        return {
            "centers": self.centers,
            "members": {str(c): m for c, m in self.members.items()},
            "y": self.y.tolist(),
            "radius": self.radii.radius.tolist(),
            "shifts": [vars(s) for s in self.shifts],
            "trace": self.trace,
        }


class _State:
    def __init__(self, adj, d, xt, k, audit):
        self.adj = adj
        self.d = d
        self.n = len(xt)
        self.k = k
        self.xt = xt
        self.x = xt.copy()
        self.removed = {c: set() for c in range(self.n)}
        self.snap: dict[tuple[int, int], np.ndarray] = {}
        self.pair_y: dict[tuple[int, int], np.ndarray] = {}
        self.centers: list[int] = []
        self.members: dict[int, list[int]] = {}
        self.shifts: list[ShiftEvent] = []
        self.trace: list[dict] = []
        self.audit = audit
        self.audits = 0

    def y_total(self) -> np.ndarray:
        y = np.zeros((self.n, self.n))
        for (_, c), col in self.pair_y.items():
            y[:, c] += col
        return y

    def refresh_column(self, cp: int) -> None:
        """x[., cp] = Delta(D_cp, ., cp) under weights x~[., cp]."""
        w = self.xt[:, cp].tolist()
        D = self.removed[cp]
        base = sep(self.adj, w, D, {cp}).value
        col = self.x[:, cp]
        for v in range(self.n):
            if v in D or col[v] == 0.0:
                col[v] = 0.0  # Delta only shrinks as D grows
                continue
            val = sep(self.adj, w, D | {v}, {cp}).value - base
            col[v] = val if val >= ZERO else 0.0

    def next_shift(self):
        """Cheapest possible shift (target center c, source c').

        A shift is possible when some member of S_c still has x-weight
        towards c'. Under the cut invariant this is the same as S_c not being
        separated from c' by a zero-weight set.
        """
        best = None
        for c in self.centers:
            rows = self.x[self.members[c], :]
            for cp in np.flatnonzero(rows.max(axis=0) > 0.0):
                key = (self.d[c, cp], c, int(cp))
                if best is None or key < best:
                    best = key
        return best

    def shift(self, c: int, cp: int, cap: int) -> None:
        key = (cp, c)
        if key not in self.snap:
            self.snap[key] = self.x[:, cp].copy()
            self.pair_y[key] = np.zeros(self.n)
        yk, uk = self.pair_y[key], self.snap[key]
        while True:
            live = [v for v in self.members[c] if self.x[v, cp] > 0.0]
            if not live:
                return
            v = min(live)
            f = float(self.x[v, cp])
            before = float(self.x[cp, cp])
            self.removed[cp].add(v)
            self.refresh_column(cp)
            yk[c] += f
            others = np.arange(self.n) != c
            yk[others] = np.minimum(uk[others], yk[c])
            event = ShiftEvent(cp, c, v, f, before, float(self.x[cp, cp]))
            self.shifts.append(event)
            self.trace.append({"event": "shift", **vars(event)})
            if len(self.shifts) > cap:
                raise InvariantViolation(f"more than {cap} shifts; the shift loop does not terminate")
            if self.audit:
                self.check(cp, c)

    def check(self, cp: int | None = None, c: int | None = None) -> None:
        """Audit the half-open invariants; with (cp, c) only the columns a shift touched."""
        self.audits += 1
        tol = AUDIT_TOL
        x, y, k = self.x, self.y_total(), self.k
        cover = x.sum(axis=1) + y.sum(axis=1)
        if np.any(cover < 1 - tol):
            raise InvariantViolation(f"coverage of x + y fell to {cover.min():.9g}")
        opened = float(np.trace(x) + np.trace(y))
        if opened > k + tol:
            raise InvariantViolation(f"total opening {opened:.9g} exceeds k={k}")
        x_cols = range(self.n) if cp is None else [cp]
        y_cols = self.centers if c is None else [c]
        for col in x_cols:
            w = x[:, col].tolist()
            for v in range(self.n):
                if v != col and x[v, col] > tol:
                    val = sep(self.adj, w, {v}, {col}).value
                    if val < x[v, col] - tol:
                        raise InvariantViolation(
                            f"x lost cut-feasibility: sep({v},{col})={val:.9g} < {x[v, col]:.9g}")
        for col in y_cols:
            w = y[:, col].tolist()
            need_cap = 1.0 / (8 * k)
            for v in range(self.n):
                if v != col and y[v, col] > tol:
                    val = sep(self.adj, w, {v}, {col}).value
                    if val < min(need_cap, y[v, col]) - tol:
                        raise InvariantViolation(
                            f"y lost 1/(8k)-connectivity: sep({v},{col})={val:.9g}")
        for col in x_cols:
            D = self.removed[col]
            if not D:
                continue
            w = self.xt[:, col].tolist()
            base = sep(self.adj, w, D, {col}).value
            for v in range(self.n):
                expect = 0.0 if v in D else sep(self.adj, w, D | {v}, {col}).value - base
                if abs(max(expect, 0.0) - x[v, col]) > tol:
                    raise InvariantViolation(f"x[{v},{col}] drifted from its marginal separation value")


def half_open(adj, d: np.ndarray, x_tilde: np.ndarray, k: int, audit: bool | None = None) -> HalfOpenResult:
    """Turn an optimal center-LP solution into a half-open 1/(8k)-connected solution.

    ``audit`` (default: on for n <= 12) re-checks the invariants after every shift
    and raises :class:`InvariantViolation` on the first failure.
    """
    adj = adj.adjacency if hasattr(adj, "adjacency") else adj
    d = np.asarray(d, dtype=float)
    xt = clean_solution(x_tilde)
    n = len(xt)
    if audit is None:
        audit = n <= AUDIT_MAX_N
    radii = compute_radii(xt, d)
    r = radii.radius
    order = sorted(range(n), key=lambda v: (r[v], v))
    st = _State(adj, d, xt, k, audit)
    if audit:
        st.check()
    cap = n * n + 1
    qi = 0
    while st.x.max() > 0.0:
        if qi == n:
            raise InvariantViolation("x is not zero but every node has been visited")
        v = order[qi]
        qi += 1
        rstar = r[v]
        good = sum(st.x[v, c] for c in range(n) if _le(d[c, v], 4 * rstar))
        if good >= 0.5 - ZERO:
            st.centers.append(v)
            st.members[v] = [v]
            st.trace.append({"event": "center", "node": v, "radius": float(rstar), "good": float(good)})
        else:
            y = st.y_total()
            need = 1.0 / (8 * k)
            cands = [c for c in st.centers if y[v, c] >= need - ZERO]
            if not cands:
                raise InvariantViolation(f"node {v} has no center serving it with weight 1/(8k)")
            c = min(cands, key=lambda c: (d[v, c], c))
            st.members[c].append(v)
            st.trace.append({"event": "join", "node": v, "center": c, "radius": float(rstar)})
        r_next = r[order[qi]] if qi < n else np.inf
        while True:
            nxt = st.next_shift()
            if nxt is None or not _le(nxt[0], 4 * r_next):
                break
            _, c, cp = nxt
            st.shift(c, cp, cap)

    y = st.y_total()
    y[np.abs(y) < 1e-15] = 0.0
    return HalfOpenResult(y, st.centers, st.members, st.pair_y,
                          {c: sorted(D) for c, D in st.removed.items() if D}, radii, xt, st.x,
                          st.trace, st.shifts, st.audits)


def check_half_open(result: HalfOpenResult, d: np.ndarray, k: int, tol: float = AUDIT_TOL) -> list[str]:
    """Postconditions and the shift-level bounds; returns the failures."""
    problems = []
    y, xt, r = result.y, result.x_tilde, result.radii.radius
    for c in result.centers:
        if y[c, c] < 0.5 - tol:
            problems.append(f"center {c} opens only {y[c, c]:.9g}")
    if len(result.centers) > 2 * k:
        problems.append(f"{len(result.centers)} centers exceed 2k")
    cost_x = float((xt * d).sum())
    cost_y = float((y * d).sum())
    if cost_y > 20 * k * cost_x + tol:
        problems.append(f"cost(y)={cost_y:.9g} exceeds 20k cost(x~)={20 * k * cost_x:.9g}")
    for ev in result.shifts:
        if abs((ev.source_open_before - ev.source_open_after) - ev.amount) > tol:
            problems.append(f"shift {ev.source}->{ev.target} over {ev.via}: opening of the source "
                            f"dropped by {ev.source_open_before - ev.source_open_after:.9g}, not {ev.amount:.9g}")
    for (cp, c), col in result.pair_y.items():
        for v in range(len(col)):
            if col[v] <= tol:
                continue
            if v != c and col[v] > xt[v, cp] + tol:
                problems.append(f"y^({cp},{c})_{v} exceeds x~")
            if not _le(d[v, c], 2 * d[v, cp] + 8 * r[v]):
                problems.append(f"d({v},{c}) > 2 d({v},{cp}) + 8 r_{v}")
            if not _le(r[c], 0.25 * d[v, cp] + 2 * r[v]):
                problems.append(f"r_{c} > d({v},{cp})/4 + 2 r_{v}")
    weighted = float((y * r[None, :]).sum())
    if weighted > 4.5 * k * cost_x + tol:
        problems.append(f"sum y r_c = {weighted:.9g} exceeds 4.5k cost(x~)")
    return problems
