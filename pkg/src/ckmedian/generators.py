"""Instance generators: the two hardness reductions plus random families."""

from __future__ import annotations

import itertools
from typing import Sequence

import networkx as nx
import numpy as np

from .core import ContractError, Instance, SolverError

MAX_RESAMPLES = 1000


def read_dimacs(text: str) -> tuple[int, list[list[int]]]:
    """Parse DIMACS CNF text into (number of variables, clauses)."""
    num_vars = None
    clauses: list[list[int]] = []
    current: list[int] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) < 4 or parts[1] != "cnf":
                raise ContractError(f"bad DIMACS header: {line!r}")
            num_vars = int(parts[2])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                if current:
                    clauses.append(current)
                current = []
            else:
                current.append(lit)
    if current:
        clauses.append(current)
    if num_vars is None:
        num_vars = max((abs(l) for c in clauses for l in c), default=0)
    return num_vars, clauses


def sat_node_labels(num_vars: int, num_clauses: int, m: int) -> list[str]:
    labels = ["T", "F"]
    for i in range(1, num_vars + 1):
        labels += [f"x{i}", f"~x{i}"]
    labels += [f"c{i}_{j}" for i in range(1, num_clauses + 1) for j in range(1, m + 1)]
    labels += [f"e{i}_{j}" for i in range(1, num_vars + 1) for j in range(1, m + 1)]
    return labels


def gen_from_3sat(clauses: Sequence[Sequence[int]], m: int, num_vars: int | None = None,
                  epsilon: float | None = None) -> Instance:
    """Connected 2-median instance encoding a CNF formula.

    Nodes: T and copies c_{i,j} of each clause (group L), the literals x_i and
    not-x_i (group M), F and copies e_{i,j} of each variable (group R).
    Distances: 0 inside a group, 1 between M and L or R, 2 between L and R.
    ``epsilon`` replaces the in-group zeros between distinct nodes.
    A satisfiable formula has optimum 2a; an unsatisfiable one costs at least 2m.
    """
    clauses = [list(c) for c in clauses]
    a = num_vars if num_vars is not None else max((abs(l) for c in clauses for l in c), default=0)
    b = len(clauses)
    if m < 1:
        raise ContractError("m must be positive")
    for c in clauses:
        if not c or any(l == 0 or abs(l) > a for l in c):
            raise ContractError(f"bad clause {c}")
    n = 2 + 2 * a + m * b + m * a
    T, F = 0, 1

    def lit(l: int) -> int:
        return 2 + 2 * (abs(l) - 1) + (0 if l > 0 else 1)

    def cnode(i: int, j: int) -> int:  # clause i, copy j, both 0-based
        return 2 + 2 * a + i * m + j

    def enode(i: int, j: int) -> int:
        return 2 + 2 * a + m * b + i * m + j

    group = [0] * n
    group[F] = 2
    for v in range(2, 2 + 2 * a):
        group[v] = 1
    for v in range(2 + 2 * a + m * b, n):
        group[v] = 2
    gap = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=float)
    g = np.array(group)
    dist = gap[g[:, None], g[None, :]]
    if epsilon is not None:
        same = (g[:, None] == g[None, :]) & ~np.eye(n, dtype=bool)
        dist[same] = float(epsilon)
    edges = []
    for i in range(1, a + 1):
        for l in (i, -i):
            edges += [(T, lit(l)), (F, lit(l))]
            edges += [(lit(l), enode(i - 1, j)) for j in range(m)]
    for i, clause in enumerate(clauses):
        for l in sorted(set(clause)):
            edges += [(lit(l), cnode(i, j)) for j in range(m)]
    return Instance(n, dist, tuple(edges), 2, None, True, tuple(sat_node_labels(a, b, m)))


def gen_from_dominating_set(n: int, edges: Sequence[tuple[int, int]]) -> Instance:
    """Non-disjoint 2-median instance whose optimum equals the minimum dominating set size.

    Nodes a, b, x_1..x_n, y_1..y_n. Edges {x_i, a}, {x_i, b}, {x_i, y_i} and,
    for each source edge {i, j}, {x_i, y_j} and {x_j, y_i}. a and every x_i
    sit at position 0, b and every y_i at position 1. Centers are fixed to (a, b).
    """
    if n < 1:
        raise ContractError("the source graph needs at least one node")
    A, B = 0, 1

    def x(i):
        return 2 + i

    def y(i):
        return 2 + n + i

    size = 2 + 2 * n
    pos = np.zeros(size)
    pos[B] = 1.0
    pos[2 + n:] = 1.0
    dist = np.abs(pos[:, None] - pos[None, :])
    new_edges = []
    for i in range(n):
        new_edges += [(x(i), A), (x(i), B), (x(i), y(i))]
    for i, j in edges:
        if i == j:
            continue
        new_edges += [(x(i), y(j)), (x(j), y(i))]
    labels = ["a", "b"] + [f"x{i}" for i in range(n)] + [f"y{i}" for i in range(n)]
    return Instance(size, dist, tuple(new_edges), 2, (A, B), True, tuple(labels))


def _metric_closure(d: np.ndarray) -> np.ndarray:
    d = d.copy()
    for m in range(len(d)):
        d = np.minimum(d, d[:, m:m + 1] + d[m:m + 1, :])
    return d


def random_metric(n: int, rng: np.random.Generator, kind: str = "euclidean",
                  graph_edges: Sequence[tuple[int, int]] | None = None) -> np.ndarray:
    """Integer metric: rounded Euclidean distances of random points (closed under shortest
    paths, since rounding can break the triangle inequality) or shortest paths of random
    integer weights on ``graph_edges`` (complete graph when omitted)."""
    if kind == "euclidean":
        pts = rng.integers(0, 100, size=(n, 2))
        d = np.round(np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=-1)))
    elif kind == "shortest_path":
        d = np.full((n, n), np.inf)
        np.fill_diagonal(d, 0.0)
        pairs = graph_edges if graph_edges is not None else [(u, v) for u in range(n) for v in range(u + 1, n)]
        for u, v in pairs:
            d[u, v] = d[v, u] = float(rng.integers(1, 20))
        d = _metric_closure(d)
        if not np.all(np.isfinite(d)):
            raise ContractError("shortest-path metric needs a connected graph")
        return d
    else:
        raise ContractError(f"unknown metric kind {kind!r}")
    return _metric_closure(d)


def gen_star(n: int, seed: int, k: int = 2, metric: str = "euclidean") -> Instance:
    """Star graph (hub 0) with a seeded random metric."""
    if n < 2:
        raise ContractError("a star needs at least two nodes")
    rng = np.random.default_rng(seed)
    edges = tuple((0, v) for v in range(1, n))
    return Instance(n, random_metric(n, rng, metric), edges, k, metric=True)


def _grid_edges(n: int) -> list[tuple[int, int]]:
    cols = max(1, int(np.floor(np.sqrt(n))))
    edges = []
    for v in range(n):
        r, c = divmod(v, cols)
        if c + 1 < cols and v + 1 < n:
            edges.append((v, v + 1))
        if v + cols < n:
            edges.append((v, v + cols))
    return edges


def gen_random(n: int, k: int, seed: int, model: str = "gnp", p: float = 0.4,
               metric: str = "euclidean") -> Instance:
    """Connected random instance.

    ``model`` is ``gnp`` (resampled until connected), ``tree`` (uniform via a
    random Pruefer sequence) or ``grid`` (row-major grid, roughly square).
    """
    if n < 1:
        raise ContractError("n must be positive")
    rng = np.random.default_rng(seed)
    if model == "gnp":
        for _ in range(MAX_RESAMPLES):
            g = nx.gnp_random_graph(n, p, seed=int(rng.integers(2**31)))
            if nx.is_connected(g):
                edges = list(g.edges())
                break
        else:
            raise SolverError(f"no connected G(n={n}, p={p}) sample in {MAX_RESAMPLES} draws")
    elif model == "tree":
        if n == 1:
            edges = []
        elif n == 2:
            edges = [(0, 1)]
        else:
            edges = list(nx.from_prufer_sequence(rng.integers(0, n, n - 2).tolist()).edges())
    elif model == "grid":
        edges = _grid_edges(n)
    else:
        raise ContractError(f"unknown graph model {model!r}")
    graph_edges = edges if metric == "shortest_path" else None
    dist = random_metric(n, rng, metric, graph_edges)
    return Instance(n, dist, tuple(edges), k, metric=True)


def _tree_code(g: nx.Graph, root: int, parent: int = -1) -> str:
    return "(" + "".join(sorted(_tree_code(g, w, root) for w in g[root] if w != parent)) + ")"


def all_trees(n: int) -> list[list[tuple[int, int]]]:
    """Edge lists of all trees on nodes 0..n-1 up to isomorphism, walking every Pruefer sequence.

    Isomorphic copies are removed with the rooted-at-the-center canonical code.
    """
    if n == 1:
        return [[]]
    if n == 2:
        return [[(0, 1)]]
    found: dict[str, list[tuple[int, int]]] = {}
    for seq in itertools.product(range(n), repeat=n - 2):
        g = nx.from_prufer_sequence(list(seq))
        code = min(_tree_code(g, c) for c in nx.center(g))
        if code not in found:
            found[code] = sorted(g.edges())
    return list(found.values())


def enumerate_formulas(num_vars: int, num_clauses: int, max_width: int = 3) -> list[list[list[int]]]:
    """All CNF formulas with exactly ``num_vars`` variables (each used) and ``num_clauses``
    distinct clauses of 1..max_width literals over distinct variables.

    Formulas that differ only by renaming variables or flipping a variable's
    polarity are listed once; both maps preserve satisfiability and give
    isomorphic reduction instances.
    """
    lits = [l for v in range(1, num_vars + 1) for l in (v, -v)]
    clauses = []
    for w in range(1, max_width + 1):
        for combo in itertools.combinations(lits, w):
            if len({abs(l) for l in combo}) == w:
                clauses.append(tuple(sorted(combo, key=lambda l: (abs(l), l < 0))))
    maps = []
    for perm in itertools.permutations(range(1, num_vars + 1)):
        for signs in itertools.product((1, -1), repeat=num_vars):
            maps.append({v: perm[v - 1] * signs[v - 1] for v in range(1, num_vars + 1)})

    def image(formula, mp):
        out = []
        for clause in formula:
            c = [mp[abs(l)] * (1 if l > 0 else -1) for l in clause]
            out.append(tuple(sorted(c, key=lambda l: (abs(l), l < 0))))
        return tuple(sorted(out))

    seen = set()
    found = []
    for formula in itertools.combinations(clauses, num_clauses):
        if {abs(l) for c in formula for l in c} != set(range(1, num_vars + 1)):
            continue
        key = min(image(formula, mp) for mp in maps)
        if key not in seen:
            seen.add(key)
            found.append([list(c) for c in key])
    return found
