"""Instances, clusterings and the cost/feasibility checks shared by every solver."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

DEFAULT_TOL = 1e-9


class CKMError(Exception):
    """Base class for library errors."""


class StructuralError(CKMError, ValueError):
    """Malformed input: bad indices, wrong shapes, asymmetric distances."""


class ContractError(CKMError, ValueError):
    """A precondition of a routine does not hold."""


class InfeasibleError(CKMError):
    """The instance admits no feasible solution (for example a disconnected graph)."""


class InvariantViolation(CKMError, RuntimeError):
    """An internal invariant of an algorithm failed its audit."""


class SolverError(CKMError, RuntimeError):
    """A numerical routine failed (iteration cap, unexpected status)."""


class SizeGuardError(CKMError, ValueError):
    """An exhaustive routine was called on an instance above its size guard."""


def tolerance() -> float:
    """Numerical tolerance; the ``CKM_TOL`` environment variable overrides the default."""
    raw = os.environ.get("CKM_TOL")
    if raw is None or raw == "":
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError as exc:
        raise ContractError(f"CKM_TOL is not a number: {raw!r}") from exc
    if not tol >= 0:
        raise ContractError("CKM_TOL must be non-negative")
    return tol


def _to_number(value, exact: bool):
    if exact:
        if isinstance(value, str):
            return Fraction(value)
        if isinstance(value, float):
            return Fraction(value).limit_denominator(10**12)
        return Fraction(value)
    return float(value)


@dataclass
class Instance:
    """A connected k-median instance.

    ``dist`` is a symmetric n x n matrix with zero diagonal. Off-diagonal zeros
    are allowed. ``edges`` are undirected and independent of ``dist``.
    When ``dist`` has object dtype the entries are Fractions and the
    instance is in exact mode.
    """

    n: int
    dist: np.ndarray
    edges: tuple[tuple[int, int], ...]
    k: int
    centers: tuple[int, ...] | None = None
    metric: bool = False
    labels: tuple[str, ...] | None = None
    _adj: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.n
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise StructuralError(f"n must be a positive integer, got {n!r}")
        self.n = n = int(n)
        dist = self.dist
        if not isinstance(dist, np.ndarray):
            flat = [v for row in dist for v in row]
            exact = any(isinstance(v, Fraction) for v in flat)
            dist = np.array(dist, dtype=object if exact else float)
        if dist.shape != (n, n):
            raise StructuralError(f"dist must be {n}x{n}, got shape {dist.shape}")
        if dist.dtype != object:
            dist = dist.astype(float)
            if not np.all(np.isfinite(dist)):
                raise StructuralError("distances must be finite")
        self.dist = dist
        for u in range(n):
            if dist[u, u] != 0:
                raise StructuralError(f"d({u},{u}) must be 0")
            for v in range(u + 1, n):
                if dist[u, v] < 0:
                    raise StructuralError(f"negative distance d({u},{v})")
                if dist[u, v] != dist[v, u]:
                    raise StructuralError(f"distance matrix not symmetric at ({u},{v})")

        seen = set()
        for e in self.edges:
            if len(e) != 2:
                raise StructuralError(f"bad edge {e!r}")
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < n and 0 <= v < n):
                raise StructuralError(f"edge ({u},{v}) references a node outside 0..{n - 1}")
            if u == v:
                raise StructuralError(f"self-loop at node {u}")
            seen.add((min(u, v), max(u, v)))
        self.edges = tuple(sorted(seen))

        if int(self.k) < 1:
            raise StructuralError("k must be at least 1")
        self.k = int(self.k)
        if self.centers is not None:
            cs = tuple(int(c) for c in self.centers)
            if len(set(cs)) != len(cs):
                raise StructuralError("fixed centers must be distinct")
            for c in cs:
                if not 0 <= c < n:
                    raise StructuralError(f"center {c} outside 0..{n - 1}")
            self.centers = cs
        if self.labels is not None:
            self.labels = tuple(str(s) for s in self.labels)
            if len(self.labels) != n:
                raise StructuralError("labels must have one entry per node")
        if self.metric and not self.is_metric():
            raise ContractError("instance flagged metric but the triangle inequality fails")

        adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        self._adj = tuple(tuple(sorted(a)) for a in adj)

    @property
    def exact(self) -> bool:
        return self.dist.dtype == object

    @property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        return self._adj

    def neighbor_masks(self) -> list[int]:
        return [sum(1 << w for w in nbrs) for nbrs in self._adj]

    def is_metric(self, tol: float | None = None) -> bool:
        tol = tolerance() if tol is None else tol
        if self.exact:
            d = self.dist
            return all(
                d[u, w] <= d[u, v] + d[v, w]
                for u in range(self.n)
                for v in range(self.n)
                for w in range(self.n)
            )
        d = self.dist
        via = d[:, :, None] + d[None, :, :]
        return bool(np.all(d <= via.min(axis=1) + tol))

    def is_connected(self) -> bool:
        return is_connected_set(self._adj, range(self.n))

    def float_dist(self) -> np.ndarray:
        return np.array(self.dist, dtype=float)

    def with_k(self, k: int) -> "Instance":
        return Instance(self.n, self.dist, self.edges, k, self.centers, self.metric, self.labels)

    def with_centers(self, centers: Sequence[int] | None) -> "Instance":
        cs = None if centers is None else tuple(centers)
        return Instance(self.n, self.dist, self.edges, self.k, cs, self.metric, self.labels)

    def to_json(self) -> dict:
        if self.exact:
            dist = [[str(v) for v in row] for row in self.dist]
        else:
            dist = self.dist.tolist()
        out = {"n": self.n, "k": self.k, "dist": dist, "edges": [list(e) for e in self.edges],
               "metric": self.metric}
        if self.centers is not None:
            out["centers"] = list(self.centers)
        if self.labels is not None:
            out["labels"] = list(self.labels)
        return out

    @classmethod
    def from_json(cls, data: dict, exact: bool = False) -> "Instance":
        for key in ("n", "k", "dist", "edges"):
            if key not in data:
                raise StructuralError(f"instance JSON is missing {key!r}")
        n = int(data["n"])
        rows = data["dist"]
        if exact:
            dist = np.empty((n, n), dtype=object)
            for i, row in enumerate(rows):
                for j, v in enumerate(row):
                    dist[i, j] = _to_number(v, True)
        else:
            dist = np.array([[_to_number(v, False) for v in row] for row in rows], dtype=float)
        return cls(n, dist, tuple(tuple(e) for e in data["edges"]), int(data["k"]),
                   data.get("centers"), bool(data.get("metric", False)), data.get("labels"))


def load_instance(path, exact: bool = False) -> Instance:
    with open(path) as fh:
        return Instance.from_json(json.load(fh), exact=exact)


def save_instance(instance: Instance, path) -> None:
    with open(path, "w") as fh:
        json.dump(instance.to_json(), fh, indent=1)


@dataclass(frozen=True)
class Cluster:
    center: int
    members: frozenset[int]


@dataclass
class Clustering:
    """A list of clusters. Overlap is allowed unless a disjoint check is requested."""

    clusters: list[Cluster]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, Iterable[int]]]) -> "Clustering":
        return cls([Cluster(int(c), frozenset(int(v) for v in m)) for c, m in pairs])

    @classmethod
    def from_assignment(cls, assign: Sequence[int]) -> "Clustering":
        """Build a disjoint clustering from ``assign[v] = center of v``."""
        groups: dict[int, set[int]] = {}
        for v, c in enumerate(assign):
            groups.setdefault(int(c), set()).add(v)
        return cls([Cluster(c, frozenset(m)) for c, m in sorted(groups.items())])

    @property
    def centers(self) -> list[int]:
        return [cl.center for cl in self.clusters]

    def to_json(self) -> dict:
        return {"clusters": [{"center": cl.center, "members": sorted(cl.members)}
                             for cl in self.clusters]}

    @classmethod
    def from_json(cls, data: dict) -> "Clustering":
        if "clusters" not in data:
            raise StructuralError("clustering JSON is missing 'clusters'")
        return cls.from_pairs((c["center"], c["members"]) for c in data["clusters"])


def is_connected_set(adj: Sequence[Sequence[int]], nodes: Iterable[int]) -> bool:
    """True when ``nodes`` induces a connected subgraph. The empty set counts as connected."""
    nodes = set(nodes)
    if not nodes:
        return True
    start = min(nodes)
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w in nodes and w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(nodes)


def components(adj: Sequence[Sequence[int]], nodes: Iterable[int]) -> list[list[int]]:
    """Connected components of the subgraph induced by ``nodes``, each sorted, ordered by minimum."""
    remaining = set(nodes)
    comps = []
    for s in sorted(remaining):
        if s not in remaining:
            continue
        remaining.discard(s)
        comp = [s]
        stack = [s]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w in remaining:
                    remaining.discard(w)
                    comp.append(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def mask_connected(nbr_masks: Sequence[int], mask: int) -> bool:
    """Bitmask version of :func:`is_connected_set`."""
    if mask == 0:
        return True
    seen = mask & -mask
    frontier = seen
    while frontier:
        grow = 0
        m = frontier
        while m:
            low = m & -m
            grow |= nbr_masks[low.bit_length() - 1]
            m ^= low
        frontier = grow & mask & ~seen
        seen |= frontier
    return seen == mask


def evaluate_cost(instance: Instance, clustering: Clustering):
    """Sum of d(center, member) over every membership; overlapping nodes count once per cluster."""
    d = instance.dist
    total = Fraction(0) if instance.exact else 0.0
    for cl in clustering.clusters:
        for v in cl.members:
            total += d[cl.center, v]
    return total


def validate(instance: Instance, clustering: Clustering, disjoint: bool = False,
             fixed_centers: Sequence[int] | None = None) -> list[str]:
    """Return a list of human-readable violations; an empty list means feasible."""
    n = instance.n
    problems = []
    covered: dict[int, int] = {}
    for i, cl in enumerate(clustering.clusters):
        bad = [v for v in cl.members if not 0 <= v < n]
        if bad or not 0 <= cl.center < n:
            problems.append(f"cluster {i} references nodes outside 0..{n - 1}")
            continue
        if cl.center not in cl.members:
            problems.append(f"cluster {i}: center {cl.center} is not a member")
        if not is_connected_set(instance.adjacency, cl.members):
            problems.append(f"cluster {i} (center {cl.center}) does not induce a connected subgraph")
        for v in cl.members:
            covered[v] = covered.get(v, 0) + 1
    missing = [v for v in range(n) if v not in covered]
    if missing:
        problems.append(f"nodes not covered: {missing}")
    if disjoint:
        shared = sorted(v for v, cnt in covered.items() if cnt > 1)
        if shared:
            problems.append(f"nodes in more than one cluster: {shared}")
    centers = clustering.centers
    if len(set(centers)) != len(centers):
        problems.append("a center is used by more than one cluster")
    if len(clustering.clusters) > instance.k:
        problems.append(f"{len(clustering.clusters)} clusters exceed k={instance.k}")
    fixed = fixed_centers if fixed_centers is not None else instance.centers
    if fixed is not None:
        extra = sorted(set(centers) - set(fixed))
        if extra:
            problems.append(f"centers {extra} are not among the fixed centers")
    return problems


def fractional_cost(instance: Instance, x) -> float:
    """Sum over v, c of d(v, c) * x[v][c]."""
    x = np.asarray(x, dtype=float)
    return float(np.sum(instance.float_dist() * x))


def check_fractional(instance: Instance, x, k: int | None = None, tol: float | None = None) -> list[str]:
    """Entry range, coverage and (optionally) the opening budget of a fractional assignment."""
    tol = tolerance() if tol is None else tol
    x = np.asarray(x, dtype=float)
    problems = []
    if x.shape != (instance.n, instance.n):
        return [f"x must be {instance.n}x{instance.n}"]
    if np.any(x < -tol):
        problems.append("negative entries")
    rows = x.sum(axis=1)
    low = [v for v in range(instance.n) if rows[v] < 1 - tol]
    if low:
        problems.append(f"coverage below 1 at nodes {low}")
    if k is not None and float(np.trace(x)) > k + tol:
        problems.append(f"opening sum {float(np.trace(x)):.6g} exceeds k={k}")
    return problems
