"""End-to-end non-disjoint connected k-median without given centers."""

from __future__ import annotations

import numpy as np

from ..assign_nd import AssignmentResult, steiner_clusters, terminal_sets
from ..core import ContractError, Instance, InvariantViolation, evaluate_cost
from ..lp import solve_center_lp
from .halfopen import check_half_open, half_open
from .split import (break_cycles_bipartition, check_split, integralize_centers, split_centers,
                    z_connectivity_gaps)


def find_centers(instance: Instance, k: int | None = None, lp_method: str = "cut",
                 audit: bool | None = None, strict: bool = False) -> AssignmentResult:
    """Pick at most k centers and connected clusters around them.

    Stages: center LP, half-open centers, split into C1 / C_half, bipartition,
    merged solution z, then z scaled by 16k (capped at 1) is rounded with one
    Steiner tree per center. ``audit`` re-checks the shift invariants; with
    ``strict`` any failed stage bound raises instead of being reported.
    """
    k = instance.k if k is None else int(k)
    if k < 1:
        raise ContractError("k must be positive")
    adj = instance.adjacency
    d = instance.float_dist()
    sol = solve_center_lp(instance, k, method=lp_method)
    xt = np.asarray(sol.x, dtype=float)
    cost_x = float((xt * d).sum())

    ho = half_open(adj, d, xt, k, audit=audit)
    split = split_centers(d, ho.y, ho.centers, k, ho.radii)
    bip = break_cycles_bipartition(split, d)
    C1_final = sorted(set(split.C1) | set(bip.F))
    C0 = sorted(set(ho.centers) - set(C1_final))
    z = integralize_centers(d, ho.y, C1_final, C0, bip.successor, split.O, k)
    cost_z = float((z * d).sum())

    problems = check_half_open(ho, d, k) + check_split(split, cost_x, k, ho.radii, d)
    if cost_z > 196 * k * cost_x + 1e-7:
        problems.append(f"cost(z)={cost_z:.9g} exceeds 196k cost(x~)")
    gaps = z_connectivity_gaps(adj, z, C1_final, 1.0 / (16 * k)) if ho.audits else []
    if strict and problems:
        raise InvariantViolation("; ".join(problems))

    zs = np.minimum(1.0, 16 * k * z)
    sets = terminal_sets(zs, C1_final)
    clustering = steiner_clusters(instance, sets)
    cost = evaluate_cost(instance, clustering)
    stages = {
        "lp": {"value": float(sol.value), "method": lp_method, "backend": sol.backend},
        "half_open": {"centers": ho.centers, "shifts": len(ho.shifts), "audits": ho.audits,
                      "cost_y": float((ho.y * d).sum())},
        "split": split.to_json(),
        "bipartition": bip.to_json(),
        "z": {"centers": C1_final, "cost": cost_z,
              "connectivity_gaps": [list(g) for g in gaps]},
        "problems": problems,
    }
    artifacts = {"x_tilde": xt, "half_open": ho, "split": split, "bipartition": bip, "z": z}
    return AssignmentResult(clustering, float(sol.value), sets, cost, stages, artifacts)
