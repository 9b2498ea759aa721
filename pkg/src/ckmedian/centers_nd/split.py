"""From half-open centers to at most k integral centers.

The half-open centers are split into C1 (kept) and C_half (kept or replaced).
Every c in C_half gets a successor s(c) whose cost of taking over c's
assignments is bounded. The successor graph is then made bipartite, and the
smaller side of each component is kept, so every dropped center has a kept
successor. Finally the columns of dropped centers are merged into their
successors to give z.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import ContractError, InvariantViolation
from ..cuts import sep
from .halfopen import AUDIT_TOL, ZERO, Radii

A_MIN = 1e-9


def _cost(w: np.ndarray, d: np.ndarray) -> float:
    return float((w * d).sum())


def replacement_cost(d: np.ndarray, y: np.ndarray, c: int, ct: int, k: int) -> float:
    """Cost bound for handing every assignment of center c over to center ct.

    When y_c^ct is below 1/(16k) the column of ct is first scaled up until c is
    1/(16k)-connected to it, which adds the second term.
    """
    link = float(y[c, ct])
    if link <= 0.0:
        raise ContractError(f"y[{c},{ct}] is zero; {ct} cannot replace {c}")
    mass = float(y[:, c].sum())
    value = mass * float(d[c, ct])
    need = 1.0 / (16 * k)
    if link < need:
        value += float((y[:, ct] * d[:, ct]).sum()) / link * need
    return value


@dataclass
class CenterSplit:
    C1: list[int]
    C_half: list[int]
    successor: dict[int, int]
    H: list[int]
    O: list[int]
    a: dict[int, float]
    phi: dict[int, float]
    mass: dict[int, float]
    replace: dict[int, float]          # R(c, s(c)) for c in C_half
    cost_y: float
    loop_heads: list[float] = field(default_factory=list)   # |C1| + |C_half|/2 + sum_{O'} y_c^c
    trace: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "C1": self.C1, "C_half": self.C_half, "H": self.H, "O": self.O,
            "successor": {str(c): s for c, s in self.successor.items()},
            "a": {str(c): v for c, v in self.a.items()},
            "phi": {str(c): v for c, v in self.phi.items()},
            "replace": {str(c): v for c, v in self.replace.items()},
            "loop_heads": self.loop_heads,
            "trace": self.trace,
        }


def _path_end(c: int, succ: dict[int, int], half: set[int]):
    """Follow successors from c; the last node outside C_half, or None on a cycle."""
    seen = {c}
    cur = c
    while cur in half:
        cur = succ[cur]
        if cur in seen:
            return None
        seen.add(cur)
    return cur


def split_centers(d: np.ndarray, y: np.ndarray, centers, k: int, radii: Radii) -> CenterSplit:
    """Split the half-open centers into C1 and C_half and choose successors."""
    d = np.asarray(d, dtype=float)
    C = list(centers)
    r = radii.radius
    cost_y = _cost(y, d)
    a = {c: min(1.0, max(0.0, 1.0 - float(y[c, c]))) for c in C}
    mass = {c: float(y[:, c].sum()) for c in C}
    phi = {c: 3 * mass[c] * float(r[c]) + cost_y / (16 * k) for c in C}
    H = [c for c in C if y[c, c] < 0.75]
    O = [c for c in C if y[c, c] >= 0.75]
    succ: dict[int, int] = {}
    replace: dict[int, float] = {}
    trace: list[dict] = []
    need = 1.0 / (16 * k)
    for c in H:
        cands = [ct for ct in C if ct != c and y[c, ct] >= need - ZERO]
        if not cands:
            raise InvariantViolation(f"half-open center {c} has no center it is 1/(16k)-linked to")
        succ[c] = min(cands, key=lambda ct: (d[c, ct], ct))
        replace[c] = replacement_cost(d, y, c, succ[c], k)
        trace.append({"event": "H", "center": c, "successor": succ[c]})
    C1: list[int] = []
    half = list(H)
    rest = list(O)
    heads = []
    while True:
        heads.append(len(C1) + 0.5 * len(half) + float(sum(y[c, c] for c in rest)))
        if len(rest) + len(C1) + 0.5 * len(half) <= k:
            break
        pick = [c for c in rest if a[c] > A_MIN]
        if not pick:
            raise InvariantViolation("the split loop must continue but every open center is fully opened")
        c = min(pick, key=lambda c: (phi[c] / a[c], c))
        cands = [ct for ct in C if ct != c and y[c, ct] > ZERO]
        if not cands:
            raise InvariantViolation(f"center {c} is assigned to no other center")
        costs = {ct: replacement_cost(d, y, c, ct, k) for ct in cands}
        succ[c] = min(cands, key=lambda ct: (costs[ct], ct))
        replace[c] = costs[succ[c]]
        rest.remove(c)
        half.append(c)
        end = _path_end(c, succ, set(half))
        event = {"event": "O", "center": c, "successor": succ[c], "path_end": end}
        if end is not None and end in rest:
            rest.remove(end)
            C1.append(end)
            event["opened"] = end
        trace.append(event)
    C1 += rest
    return CenterSplit(C1, half, succ, H, O, a, phi, mass, replace, cost_y, heads, trace)


def check_split(split: CenterSplit, cost_x: float, k: int, radii: Radii, d: np.ndarray,
                tol: float = AUDIT_TOL) -> list[str]:
    """The counting invariant and the cost bounds of the split; returns the failures."""
    problems = []
    for i, h in enumerate(split.loop_heads):
        if h > k + tol:
            problems.append(f"loop head {i}: |C1| + |C_half|/2 + open mass = {h:.9g} > k")
    if len(split.C1) + 0.5 * len(split.C_half) > k + tol:
        problems.append("|C1| + |C_half|/2 exceeds k")
    if set(split.C1) & set(split.C_half):
        problems.append("C1 and C_half overlap")
    phi_o = sum(split.phi[c] for c in split.O)
    if phi_o > 13.5 * k * cost_x + split.cost_y / 8 + tol:
        problems.append(f"sum of O potentials {phi_o:.9g} exceeds 13.5k cost(x~) + cost(y)/8")
    r = radii.radius
    for c in split.H:
        if d[c, split.successor[c]] > 16 * r[c] + tol * max(1.0, 16 * r[c]):
            problems.append(f"H center {c}: successor farther than 16 r_c")
    o_half = [c for c in split.C_half if c in set(split.O)]
    for c in o_half:
        bound = split.phi[c] / split.a[c]
        if split.replace[c] > bound + tol * max(1.0, bound):
            problems.append(f"O center {c}: R(c, s(c)) = {split.replace[c]:.9g} > phi/a = {bound:.9g}")
    total = sum(split.replace[c] for c in o_half)
    if total > 27 * k * cost_x + split.cost_y / 4 + tol:
        problems.append(f"replacement cost of O in C_half {total:.9g} exceeds 27k cost(x~) + cost(y)/4")
    for c, s in split.successor.items():
        if s == c:
            problems.append(f"center {c} is its own successor")
    return problems


@dataclass
class Bipartition:
    F: list[int]
    successor: dict[int, int]
    rewired: list[dict]
    sides: list[tuple[list[int], list[int]]]

    def to_json(self) -> dict:
        return {"F": self.F, "successor": {str(c): s for c, s in self.successor.items()},
                "rewired": self.rewired, "sides": [list(map(list, p)) for p in self.sides]}


def _cycles(half: set[int], succ: dict[int, int]) -> list[list[int]]:
    """Directed cycles of the successor graph on C_half, each listed along its edges."""
    state: dict[int, int] = {}
    cycles = []
    for start in sorted(half):
        if start in state:
            continue
        path, pos = [], {}
        cur = start
        while cur in half and cur not in state:
            state[cur] = 1
            pos[cur] = len(path)
            path.append(cur)
            cur = succ[cur]
        if cur in pos:
            cycles.append(path[pos[cur]:])
        for v in path:
            state[v] = 2
    return cycles


def break_cycles_bipartition(split: CenterSplit, d: np.ndarray) -> Bipartition:
    """Remove odd successor cycles, 2-colour C_half and keep the smaller side of each component."""
    half = set(split.C_half)
    O = set(split.O)
    succ = dict(split.successor)
    rewired = []
    for cyc in _cycles(half, succ):
        if len(cyc) % 2 == 0:
            continue
        in_o = [c for c in cyc if c in O]
        if len(in_o) > 1:
            raise InvariantViolation(f"odd successor cycle {cyc} holds {len(in_o)} open centers")
        c = in_o[0] if in_o else min(cyc)
        i = cyc.index(c)
        p, g = cyc[i - 1], cyc[i - 2]
        if d[g, p] <= d[p, c]:
            succ[p] = g
            rewired.append({"cycle": cyc, "c": c, "p": p, "g": g, "set": [p, g]})
        else:
            succ[g] = c
            rewired.append({"cycle": cyc, "c": c, "p": p, "g": g, "set": [g, c]})

    nbrs: dict[int, set[int]] = {c: set() for c in half}
    for c in half:
        s = succ[c]
        if s in half:
            nbrs[c].add(s)
            nbrs[s].add(c)
    colour: dict[int, int] = {}
    F: list[int] = []
    sides = []
    for start in sorted(half):
        if start in colour:
            continue
        colour[start] = 0
        comp = [start]
        for u in comp:
            for w in sorted(nbrs[u]):
                if w not in colour:
                    colour[w] = 1 - colour[u]
                    comp.append(w)
                elif colour[w] == colour[u]:
                    raise InvariantViolation(f"successor graph is not bipartite at {u}-{w}")
        zero = sorted(v for v in comp if colour[v] == 0)
        one = sorted(v for v in comp if colour[v] == 1)
        sides.append((zero, one))
        F += zero if len(zero) <= len(one) else one
    F.sort()
    kept = set(F) | set(split.C1)
    if len(F) > len(half) / 2:
        raise InvariantViolation(f"|F| = {len(F)} exceeds half of C_half")
    for c in half - set(F):
        if succ[c] not in kept:
            raise InvariantViolation(f"dropped center {c} has dropped successor {succ[c]}")
    return Bipartition(F, succ, rewired, sides)


def integralize_centers(d: np.ndarray, y: np.ndarray, C1_final, C0, successor: dict[int, int],
                        O, k: int) -> np.ndarray:
    """Merge the column of every dropped center into its successor.

    Kept centers open fully. A kept center that inherits an open center c
    linked to it by less than 1/(16k) has its column scaled by
    1/(16k y_c^s(c)) first. Entries are capped at 1.
    """
    C1_final = sorted(C1_final)
    if len(C1_final) > k:
        raise InvariantViolation(f"{len(C1_final)} final centers exceed k={k}")
    n = len(y)
    O = set(O)
    z = np.zeros((n, n))
    need = 1.0 / (16 * k)
    for c in C1_final:
        heirs = [ct for ct in C0 if ct in O and successor[ct] == c]
        alpha = max((need / y[ct, c] for ct in heirs), default=0.0)
        col = y[:, c] * alpha if alpha > 1 else y[:, c].copy()
        z[:, c] = np.minimum(1.0, col)
        z[c, c] = 1.0
    for c in C0:
        s = successor[c]
        if s not in C1_final:
            raise InvariantViolation(f"successor {s} of dropped center {c} is not kept")
        z[:, s] = np.minimum(1.0, z[:, s] + y[:, c])
    return z


def z_connectivity_gaps(adj, z: np.ndarray, centers, alpha: float, tol: float = AUDIT_TOL) -> list[tuple[int, int, float]]:
    """(v, c, sep) for every pair where sep^z(v, c) < min(alpha, z_v^c)."""
    gaps = []
    for c in centers:
        w = z[:, c].tolist()
        for v in range(len(z)):
            if v != c and z[v, c] > tol:
                val = sep(adj, w, {v}, {c}).value
                if val < min(alpha, z[v, c]) - tol:
                    gaps.append((v, c, float(val)))
    return gaps
