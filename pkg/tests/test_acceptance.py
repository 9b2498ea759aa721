"""Acceptance suite: eight end-to-end properties, each checked against brute force.

Every test prints one ``ACCEPTANCE <id> PASS|FAIL`` line (visible even without -s)
and then asserts, so a failure is both reported and fails the run.
"""

import itertools
import math
import time

import networkx as nx
import numpy as np
import pytest

from ckmedian.assign_nd import assign_non_disjoint
from ckmedian.centers_nd import check_half_open, check_split, find_centers
from ckmedian.core import validate
from ckmedian.cuts import interior, sep
from ckmedian.generators import all_trees, enumerate_formulas, gen_from_3sat, gen_from_dominating_set
from ckmedian.lp import solve_cut_lp, solve_flow_lp
from ckmedian.oracle import (brute_force_disjoint, brute_force_dominating_set, brute_force_non_disjoint,
                             brute_force_sat)
from ckmedian.tree_dp import solve_tree

from conftest import random_weights_instance, small_metric_instance

TOL = 1e-7


@pytest.fixture
def report(capsys):
    def emit(ident, title, failures, detail):
        status = "PASS" if not failures else "FAIL"
        with capsys.disabled():
            print(f"\nACCEPTANCE {ident} {status}: {title} ({detail})")
            for f in failures[:10]:
                print(f"    {f}")
    return emit


# --------------------------------------------------------------- 1: tree DP

def test_1_tree_dp_exact(report):
    start = time.time()
    failures = []
    runs = 0
    rng = np.random.default_rng(101)
    trees = [(n, edges) for n in range(1, 8) for edges in all_trees(n)]
    for n, edges in trees:
        for k in (1, 2, 3):
            for _ in range(3):
                for exact in (True, False):
                    inst = random_weights_instance(edges, n, k, rng, exact=exact)
                    got = solve_tree(inst).cost
                    opt = brute_force_disjoint(inst).cost
                    ok = got == opt if exact else abs(got - opt) <= 1e-9
                    runs += 1
                    if not ok:
                        failures.append(f"n={n} k={k} exact={exact} edges={edges}: dp {got} vs oracle {opt}")
    secs = time.time() - start
    if secs >= 120:
        failures.append(f"runtime {secs:.1f}s exceeds 2 min")
    report(1, "tree DP equals brute force", failures,
           f"{len(trees)} trees, {runs} runs, {secs:.1f}s")
    assert len(trees) == 25
    assert not failures


# ------------------------------------------------------- 2: LP formulations

def test_2_flow_and_cut_lp_agree(report):
    failures = []
    worst = 0.0
    for seed in range(50):
        rng = np.random.default_rng(200 + seed)
        n = int(rng.integers(4, 9))
        k = int(rng.integers(1, 4))
        inst = small_metric_instance(200 + seed, n=n, k=k)
        opt = brute_force_non_disjoint(inst, k).cost
        flow = solve_flow_lp(inst, k=k).value
        cut = solve_cut_lp(inst, k=k).value
        centers = sorted(rng.choice(n, size=min(k, n), replace=False).tolist())
        flow_a = solve_flow_lp(inst, centers=centers).value
        cut_a = solve_cut_lp(inst, centers=centers).value
        opt_a = brute_force_non_disjoint(inst, centers=centers).cost
        worst = max(worst, abs(flow - cut), abs(flow_a - cut_a))
        if abs(flow - cut) > 1e-6 or abs(flow_a - cut_a) > 1e-6:
            failures.append(f"seed {seed}: flow {flow} / cut {cut}; assignment flow {flow_a} / cut {cut_a}")
        if max(flow, cut) > opt + TOL or max(flow_a, cut_a) > opt_a + TOL:
            failures.append(f"seed {seed}: LP above oracle ({flow}, {cut} vs {opt}; {flow_a}, {cut_a} vs {opt_a})")
    report(2, "flow and cut LP agree and lower-bound the optimum", failures,
           f"50 instances, max gap {worst:.2e}")
    assert not failures


# ------------------------------------------- 3: assignment with fixed centers

def test_3_assignment_guarantee(report):
    start = time.time()
    failures = []
    ratios = []
    for seed in range(30):
        rng = np.random.default_rng(300 + seed)
        n = int(rng.integers(4, 7))
        inst = small_metric_instance(300 + seed, n=n, k=2)
        centers = sorted(rng.choice(n, size=2, replace=False).tolist())
        res = assign_non_disjoint(inst, centers=centers)
        bound = 2 * 2 * math.log(n)
        problems = validate(inst, res.clustering, fixed_centers=centers)
        opt = brute_force_non_disjoint(inst, centers=centers).cost
        ratio = res.cost / opt if opt > 0 else (1.0 if res.cost == 0 else math.inf)
        ratios.append(ratio)
        if problems:
            failures.append(f"seed {seed}: infeasible {problems}")
        if res.cost > bound * res.lp_value + TOL:
            failures.append(f"seed {seed}: cost {res.cost} > 2k ln n * LP = {bound * res.lp_value}")
        if ratio > bound:
            failures.append(f"seed {seed}: ratio {ratio} > 2k ln n = {bound}")
    secs = time.time() - start
    if secs >= 60:
        failures.append(f"runtime {secs:.1f}s exceeds 1 min")
    report(3, "fixed-center assignment within 2k ln n", failures,
           f"30 instances, ratios mean {np.mean(ratios):.3f} max {max(ratios):.3f}, {secs:.1f}s")
    assert not failures


# ----------------------------------------------- 4-6: center selection runs

def _audit_instances():
    """20 seeded instances with n <= 10 whose center LP optimum is fractional."""
    out = []
    seed = 400
    while len(out) < 20:
        inst = small_metric_instance(seed)
        x = solve_cut_lp(inst, k=inst.k).x
        if np.any((x > 1e-6) & (x < 1 - 1e-6)):
            out.append((seed, inst))
        seed += 1
    return out


@pytest.fixture(scope="module")
def audit_runs():
    runs = []
    for seed, inst in _audit_instances():
        res = find_centers(inst, audit=True)
        runs.append((seed, inst, res))
    return runs


def test_4_half_open_audit(audit_runs, report):
    failures = []
    shifts = audits = 0
    for seed, inst, res in audit_runs:
        k = inst.k
        d = inst.float_dist()
        ho = res.artifacts["half_open"]
        xt = res.artifacts["x_tilde"]
        shifts += len(ho.shifts)
        audits += ho.audits
        if ho.audits < len(ho.shifts):
            failures.append(f"seed {seed}: {ho.audits} audits for {len(ho.shifts)} shifts")
        for c in ho.centers:
            if ho.y[c, c] < 0.5 - TOL:
                failures.append(f"seed {seed}: center {c} opened only {ho.y[c, c]}")
        if len(ho.centers) > 2 * k:
            failures.append(f"seed {seed}: {len(ho.centers)} centers > 2k")
        cost_y = float((ho.y * d).sum())
        cost_x = float((xt * d).sum())
        if cost_y > 20 * k * cost_x + TOL:
            failures.append(f"seed {seed}: cost(y) {cost_y} > 20k cost(x~) {20 * k * cost_x}")
        failures += [f"seed {seed}: {p}" for p in check_half_open(ho, d, k)]
    report(4, "half-open stage invariants", failures,
           f"{len(audit_runs)} runs, {shifts} shifts, {audits} invariant audits")
    assert not failures


def test_5_split_and_bipartition_audit(audit_runs, report):
    failures = []
    cycles = 0
    gaps = 0
    worst_z = 0.0
    for seed, inst, res in audit_runs:
        k = inst.k
        d = inst.float_dist()
        ho = res.artifacts["half_open"]
        split = res.artifacts["split"]
        bip = res.artifacts["bipartition"]
        z = res.artifacts["z"]
        cost_x = float((res.artifacts["x_tilde"] * d).sum())
        if len(split.C1) + 0.5 * len(split.C_half) > k + TOL:
            failures.append(f"seed {seed}: |C1| + |C_half|/2 > k")
        phi_o = sum(split.phi[c] for c in split.O)
        if phi_o > 13.5 * k * cost_x + split.cost_y / 8 + TOL:
            failures.append(f"seed {seed}: sum of O potentials {phi_o} over budget")
        for event in bip.rewired:
            cycles += 1
            open_nodes = [c for c in event["cycle"] if c in set(split.O)]
            if len(open_nodes) > 1:
                failures.append(f"seed {seed}: odd cycle {event['cycle']} has open centers {open_nodes}")
        gaps += len(res.stages["z"]["connectivity_gaps"])
        cost_z = float((z * d).sum())
        if cost_x > 0:
            worst_z = max(worst_z, cost_z / (k * cost_x))
        if cost_z > 196 * k * cost_x + TOL:
            failures.append(f"seed {seed}: cost(z) {cost_z} > 196k cost(x~) {196 * k * cost_x}")
        failures += [f"seed {seed}: {p}" for p in check_split(split, cost_x, k, ho.radii, d)]
    report(5, "split and bipartition bounds", failures,
           f"{len(audit_runs)} runs, {cycles} odd cycles rewired, {gaps} z-connectivity gaps, "
           f"max cost(z)/(k cost(x~)) {worst_z:.2f}")
    assert not failures


def test_6_find_centers_end_to_end(audit_runs, report):
    failures = []
    for seed, inst, res in audit_runs:
        problems = validate(inst, res.clustering)
        if problems:
            failures.append(f"seed {seed}: infeasible {problems}")
        if len(res.clustering.centers) > inst.k:
            failures.append(f"seed {seed}: {len(res.clustering.centers)} centers > k={inst.k}")
    ratios = []
    for seed in range(20):
        rng = np.random.default_rng(600 + seed)
        n = int(rng.integers(4, 7))
        inst = small_metric_instance(600 + seed, n=n, k=2)
        res = find_centers(inst, k=2)
        opt = brute_force_non_disjoint(inst, 2).cost
        if validate(inst, res.clustering) or len(res.clustering.centers) > 2:
            failures.append(f"small seed {seed}: infeasible output")
        ratio = res.cost / opt if opt > 0 else (1.0 if res.cost <= TOL else math.inf)
        if not math.isfinite(ratio):
            failures.append(f"small seed {seed}: cost {res.cost} with optimum 0")
        ratios.append(ratio)
        composite = 196 * 2 * 2 * math.log(n) * 16 * 2 * res.lp_value
        if res.cost > composite + TOL:
            failures.append(f"small seed {seed}: cost {res.cost} above composite bound {composite}")
    report(6, "find_centers feasible with at most k centers", failures,
           f"{len(audit_runs)} audit runs; n<=6,k=2 ratios mean {np.mean(ratios):.3f} max {max(ratios):.3f}")
    assert not failures


# ----------------------------------------------------------- 7: reductions

def test_7_reduction_dichotomies(report):
    start = time.time()
    failures = []
    count = 0
    largest = 0
    for a, b in itertools.product((1, 2, 3), repeat=2):
        for formula in enumerate_formulas(a, b):
            sat = brute_force_sat(formula, a) is not None
            for m in (2, 3):
                for eps in (None, 1e-3):
                    inst = gen_from_3sat(formula, m, a, eps)
                    largest = max(largest, inst.n)
                    opt = brute_force_disjoint(inst, 2).cost
                    count += 1
                    if eps is None:
                        hit = opt == 2 * a
                    else:
                        hit = 2 * a - 1e-9 <= opt <= 2 * a + inst.n * eps + 1e-9
                    if hit != sat or (not sat and opt < 2 * m - 1e-9):
                        failures.append(f"{formula} m={m} eps={eps}: opt {opt}, satisfiable={sat}")
    graphs = 0
    for g in nx.graph_atlas_g()[1:]:
        if g.number_of_nodes() > 5:
            break
        graphs += 1
        n, edges = g.number_of_nodes(), list(g.edges())
        size, _ = brute_force_dominating_set(n, edges)
        opt = brute_force_non_disjoint(gen_from_dominating_set(n, edges)).cost
        if abs(opt - size) > 1e-9:
            failures.append(f"graph n={n} {edges}: optimum {opt} vs dominating set {size}")
    secs = time.time() - start
    if secs >= 300:
        failures.append(f"runtime {secs:.1f}s exceeds 5 min")
    report(7, "3-SAT and dominating-set reductions", failures,
           f"{count} formula instances up to n={largest}, {graphs} graphs, {secs:.1f}s")
    assert not failures


# ---------------------------------------------------------- 8: cut lemmas

def _masks_to_sets(n):
    return [[v for v in range(n) if (m >> v) & 1] for m in range(1 << n)]


def test_8_cut_lemmas(report):
    start = time.time()
    failures = []
    checks = {"submodular": 0, "symmetric": 0, "cut_of_cut": 0}
    rng = np.random.default_rng(800)
    for g_id in range(200):
        n = int(rng.integers(2, 7))
        graph = nx.gnp_random_graph(n, float(rng.uniform(0.3, 0.8)), seed=int(rng.integers(2**31)))
        adj = [sorted(graph[v]) for v in range(n)]
        w = rng.uniform(0, 1, n).round(2)
        w[rng.random(n) < 0.2] = 0.0
        w = w.tolist()
        sets = _masks_to_sets(n)
        size = 1 << n
        idx = np.arange(size)
        for t in range(n):
            fwd = np.array([sep(adj, w, S, {t}).value for S in sets])
            back = np.array([sep(adj, w, {t}, S).value if S else 0.0 for S in sets])
            checks["symmetric"] += size
            bad = np.flatnonzero(np.abs(fwd - back) > 1e-9)
            failures += [f"graph {g_id} t={t}: sep({sets[s]},t)={fwd[s]} vs reverse {back[s]}" for s in bad]

            # marginals shrink as the source set grows: delta(S', v) <= delta(S, v) for S <= S'
            for v in range(n):
                dv = fwd[idx | (1 << v)] - fwd
                sub = (idx[:, None] & idx[None, :]) == idx[:, None]  # sub[S, S'] = S <= S'
                viol = sub & (dv[None, :] > dv[:, None] + 1e-9)
                checks["submodular"] += int(sub.sum())
                for S, Sp in np.argwhere(viol)[:3]:
                    failures.append(f"graph {g_id} t={t} v={v}: delta grows from {sets[S]} to {sets[Sp]}")

            # a cut N between S and t: sep(N + S', t) >= sep(S + S', t) for every S'
            union = fwd[idx[:, None] | idx[None, :]]  # union[A, S'] = sep(A + S', t)
            for N in range(size):
                hull = N | sum(1 << u for u in interior(adj, sets[N], {t}))
                inside = np.flatnonzero((idx & ~hull) == 0)
                worst = union[inside].max(axis=0)
                checks["cut_of_cut"] += len(inside) * size
                bad = np.flatnonzero(union[N] < worst - 1e-9)
                for Sp in bad[:3]:
                    failures.append(f"graph {g_id} t={t}: cut {sets[N]} with S'={sets[Sp]} breaks cut-of-cut")
        for _ in range(20):
            S = [int(v) for v in rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False)]
            T = [int(v) for v in rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False)]
            checks["symmetric"] += 1
            if abs(sep(adj, w, S, T).value - sep(adj, w, T, S).value) > 1e-9:
                failures.append(f"graph {g_id}: sep({S},{T}) is not symmetric")
    secs = time.time() - start
    detail = ", ".join(f"{k} {v}" for k, v in checks.items())
    report(8, "vertex cut lemmas", failures, f"200 graphs, {detail}, {secs:.1f}s")
    assert not failures
