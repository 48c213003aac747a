"""Spatial networks: random geometric graphs on the unit square or torus.

Randomness comes from numpy's PCG64 bit generator (``np.random.default_rng``),
so a graph is a pure function of ``(n, rho, boundary, seed)``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree


class BoundaryMode(str, enum.Enum):
    OPEN = "open"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class SpatialGraph:
    """Undirected simple graph whose vertices may carry 2D positions.

    ``edges`` is a sorted tuple of ``(u, v)`` pairs with ``u < v``.
    ``positions`` is an ``(n, 2)`` array or ``None`` for abstract graphs.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    positions: np.ndarray | None = None
    boundary: BoundaryMode = BoundaryMode.OPEN
    radius: float | None = None
    _adjacency: tuple[frozenset[int], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        edges = tuple(sorted((int(u), int(v)) for u, v in self.edges))
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "boundary", BoundaryMode(self.boundary))
        if self.positions is not None:
            pos = np.asarray(self.positions, dtype=float).reshape(-1, 2)
            pos.setflags(write=False)
            object.__setattr__(self, "positions", pos)
        _check_invariants(self)
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in edges:
            adj[u].add(v)
            adj[v].add(u)
        object.__setattr__(self, "_adjacency", tuple(frozenset(a) for a in adj))

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> frozenset[int]:
        return self._adjacency[v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adjacency[u]

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        if self.edges:
            e = np.asarray(self.edges)
            a[e[:, 0], e[:, 1]] = 1.0
            a[e[:, 1], e[:, 0]] = 1.0
        return a

    @classmethod
    def from_edges(cls, n: int, edges) -> "SpatialGraph":
        return cls(n=n, edges=tuple((min(u, v), max(u, v)) for u, v in edges))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "boundary": self.boundary.value,
            "radius": self.radius,
            "positions": None if self.positions is None else self.positions.tolist(),
            "edges": [list(e) for e in self.edges],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SpatialGraph":
        try:
            n = int(data["n"])
            edges = data["edges"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed graph record: {exc}") from exc
        for e in edges:
            if len(e) != 2 or not e[0] < e[1]:
                raise ValueError(f"edge {e} must be a pair [u, v] with u < v")
        if [list(e) for e in edges] != sorted(list(e) for e in edges):
            raise ValueError("edges must be sorted lexicographically")
        return cls(
            n=n,
            edges=tuple(tuple(e) for e in edges),
            positions=data.get("positions"),
            boundary=BoundaryMode(data.get("boundary", "open")),
            radius=data.get("radius"),
        )


def _check_invariants(g: SpatialGraph) -> None:
    if g.n < 0:
        raise ValueError("vertex count must be non-negative")
    seen = set()
    for u, v in g.edges:
        if u == v:
            raise ValueError(f"self-loop at vertex {u}")
        if not (0 <= u < g.n and 0 <= v < g.n):
            raise ValueError(f"edge ({u}, {v}) has an endpoint outside [0, {g.n})")
        if (u, v) in seen:
            raise ValueError(f"duplicate edge ({u}, {v})")
        seen.add((u, v))
    if g.positions is not None:
        if g.positions.shape != (g.n, 2):
            raise ValueError(f"positions must have shape ({g.n}, 2)")
        if np.any(g.positions < 0.0) or np.any(g.positions > 1.0):
            raise ValueError("positions must lie in the unit square")
    if g.radius is not None and g.radius < 0:
        raise ValueError("radius must be non-negative")


def load_graph(path: str | Path) -> SpatialGraph:
    with open(path) as fh:
        return SpatialGraph.from_dict(json.load(fh))


def save_graph(g: SpatialGraph, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(g.to_dict(), fh)


def critical_radius(n: int) -> float:
    """Connectivity threshold ``sqrt(ln n / (pi n))`` of RGG(n, r)."""
    if n < 2:
        raise ValueError(f"critical radius needs n >= 2, got {n}")
    return math.sqrt(math.log(n) / (math.pi * n))


def _pair_distance(dx, dy, boundary: BoundaryMode):
    # shared by the scalar and vectorised paths so both round identically
    dx = abs(dx)
    dy = abs(dy)
    if boundary is BoundaryMode.PERIODIC:
        dx = np.minimum(dx, 1.0 - dx)
        dy = np.minimum(dy, 1.0 - dy)
    return np.sqrt(dx * dx + dy * dy)


def distance(p, q, boundary: BoundaryMode | str = BoundaryMode.OPEN) -> float:
    """Euclidean distance, or minimum-image distance on the unit torus."""
    boundary = BoundaryMode(boundary)
    return float(_pair_distance(float(p[0]) - float(q[0]), float(p[1]) - float(q[1]), boundary))


def geometric_edges(
    positions: np.ndarray, radius: float, boundary: BoundaryMode | str
) -> tuple[tuple[int, int], ...]:
    """All pairs strictly closer than ``radius`` under the boundary metric."""
    boundary = BoundaryMode(boundary)
    positions = np.asarray(positions, dtype=float)
    if len(positions) < 2 or radius <= 0:
        return ()
    if boundary is BoundaryMode.PERIODIC:
        # cKDTree wants data in [0, boxsize)
        tree = cKDTree(np.mod(positions, 1.0), boxsize=1.0)
    else:
        tree = cKDTree(positions)
    cand = tree.query_pairs(min(radius * (1 + 1e-9), 2.0), output_type="ndarray")
    if len(cand) == 0:
        return ()
    d = positions[cand[:, 0]] - positions[cand[:, 1]]
    keep = _pair_distance(d[:, 0], d[:, 1], boundary) < radius
    pairs = np.sort(cand[keep], axis=1)
    return tuple(sorted(map(tuple, pairs.tolist())))


def generate_rgg(
    n: int,
    rho: float,
    boundary: BoundaryMode | str = BoundaryMode.OPEN,
    seed: int = 0,
    radius: float | None = None,
) -> SpatialGraph:
    """Random geometric graph with ``radius = rho * critical_radius(n)``.

    ``radius`` overrides the ``rho`` scaling when given.
    """
    if n < 2:
        raise ValueError(f"RGG needs n >= 2, got {n}")
    if radius is None:
        if rho <= 0:
            raise ValueError(f"rho must be positive, got {rho}")
        radius = rho * critical_radius(n)
    rng = np.random.default_rng(seed)
    positions = rng.random((n, 2))
    boundary = BoundaryMode(boundary)
    return SpatialGraph(
        n=n,
        edges=geometric_edges(positions, radius, boundary),
        positions=positions,
        boundary=boundary,
        radius=float(radius),
    )


def is_connected(g: SpatialGraph) -> bool:
    if g.n <= 1:
        return True
    if not g.edges:
        return False
    e = np.asarray(g.edges)
    mat = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(g.n, g.n))
    ncomp, _ = connected_components(mat, directed=False)
    return ncomp == 1


@dataclass(frozen=True)
class DegreeStats:
    mean_degree: float
    max_degree: int
    edge_count: int


def degree_stats(g: SpatialGraph) -> DegreeStats:
    degrees = [len(g.neighbors(v)) for v in range(g.n)]
    return DegreeStats(
        mean_degree=2 * g.m / g.n if g.n else 0.0,
        max_degree=max(degrees, default=0),
        edge_count=g.m,
    )


def complete_graph(n: int) -> SpatialGraph:
    return SpatialGraph.from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def path_graph(n: int) -> SpatialGraph:
    return SpatialGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> SpatialGraph:
    return SpatialGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])
