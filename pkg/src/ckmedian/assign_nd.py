"""Non-disjoint connected k-median with given centers, within O(k log n) of optimal.

Solve the cut LP with the center set fixed and multiply it by k. Every node
then has weight at least 1 towards some center, so the sets
T_c = {c} u {v : k x_v^c >= 1} cover V. Each T_c is joined by a node-weighted
Steiner tree with weights d(., c), which costs at most 2 ln n times the
scaled LP column. The bound holds for arbitrary (non-metric) distances.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (Cluster, Clustering, ContractError, InfeasibleError, Instance,
                   InvariantViolation, evaluate_cost, is_connected_set)
from .lp import solve_cut_lp, solve_flow_lp
from .steiner import klein_ravi

TERMINAL_TOL = 1e-7


@dataclass
class AssignmentResult:
    clustering: Clustering
    lp_value: float
    terminal_sets: dict[int, frozenset[int]]
    cost: float
    stages: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict, repr=False)   # raw stage outputs (arrays)

    def to_json(self) -> dict:
        out = {
            "cost": float(self.cost),
            "lp_value": float(self.lp_value),
            "clusters": self.clustering.to_json()["clusters"],
            "terminal_sets": {str(c): sorted(t) for c, t in self.terminal_sets.items()},
        }
        if self.stages:
            out["stages"] = self.stages
        return out


def terminal_sets(x: np.ndarray, centers: Sequence[int], threshold: float = 1 - TERMINAL_TOL):
    """T_c = {c} u {v : x[v, c] >= threshold}; every node must land in some T_c."""
    n = len(x)
    sets = {}
    for c in centers:
        sets[c] = frozenset({c} | {v for v in range(n) if x[v, c] >= threshold})
    covered = set().union(*sets.values()) if sets else set()
    missing = sorted(set(range(n)) - covered)
    if missing:
        raise InvariantViolation(f"nodes {missing} reach no terminal set after scaling")
    return sets


def steiner_clusters(instance: Instance, sets: dict[int, frozenset[int]]) -> Clustering:
    """One Klein-Ravi tree per center, weighted by the distance to that center."""
    adj = instance.adjacency
    d = instance.float_dist()
    clusters = []
    for c, terms in sets.items():
        nodes = klein_ravi(adj, d[:, c].tolist(), terms)
        clusters.append(Cluster(c, frozenset(nodes)))
    return Clustering(clusters)


def trim_clustering(instance: Instance, clustering: Clustering) -> Clustering:
    """Drop a node from its more expensive clusters when that keeps them connected."""
    adj = instance.adjacency
    d = instance.float_dist()
    members = {cl.center: set(cl.members) for cl in clustering.clusters}
    for v in range(instance.n):
        homes = sorted((d[v, c], c) for c, m in members.items() if v in m)
        for _, c in homes[1:]:
            if v == c:
                continue
            rest = members[c] - {v}
            if is_connected_set(adj, rest):
                members[c] = rest
    return Clustering([Cluster(c, frozenset(m)) for c, m in members.items()])


def assign_non_disjoint(instance: Instance, centers: Sequence[int] | None = None,
                        lp_method: str = "cut", trim: bool = False) -> AssignmentResult:
    """Connected, possibly overlapping clusters around ``centers``."""
    centers = instance.centers if centers is None else centers
    if not centers:
        raise ContractError("a non-empty center set is required")
    centers = sorted(set(int(c) for c in centers))
    for c in centers:
        if not 0 <= c < instance.n:
            raise ContractError(f"center {c} outside 0..{instance.n - 1}")
    adj = instance.adjacency
    reach = set()
    stack = list(centers)
    reach.update(centers)
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in reach:
                reach.add(w)
                stack.append(w)
    if len(reach) < instance.n:
        raise InfeasibleError(f"nodes {sorted(set(range(instance.n)) - reach)} reach no center")

    if lp_method == "cut":
        sol = solve_cut_lp(instance, centers=centers)
    elif lp_method == "flow":
        sol = solve_flow_lp(instance, centers=centers)
    else:
        raise ContractError(f"unknown LP method {lp_method!r}")
    scaled = len(centers) * np.asarray(sol.x, dtype=float)
    sets = terminal_sets(scaled, centers)
    clustering = steiner_clusters(instance, sets)
    if trim:
        clustering = trim_clustering(instance, clustering)
    cost = evaluate_cost(instance, clustering)
    return AssignmentResult(clustering, float(sol.value), sets, cost)
