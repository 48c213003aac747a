"""Tessellation covers built by incremental edge colouring.

Vertices are inserted one at a time in index order. Each edge from the new
vertex ``u`` to an already inserted neighbour ``v`` is given the first colour
whose cliques at ``u`` and ``v`` can be merged, or a fresh colour otherwise.
A colour ("tessellation") is valid when its coloured edges form a disjoint
union of cliques.

Two colourability rules are available:

``Mode.STRICT``
    Also checks that every vertex of ``u``'s clique is adjacent to every
    vertex of ``v``'s clique, so merges always produce cliques.
``Mode.VERBATIM``
    Only checks adjacency of ``u`` to ``v``'s clique and of ``v`` to ``u``'s
    clique. Merges may then ask for non-edges; those pairs are left
    uncoloured and ``validate_cover`` reports the damage.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import SpatialGraph


class Mode(str, enum.Enum):
    STRICT = "strict"
    VERBATIM = "verbatim"


class CoverInconsistency(RuntimeError):
    """A strict merge required an edge the graph does not have."""


@dataclass
class ColoringState:
    """Working state of the incremental colouring.

    ``cnbr[v][c]`` is the set of neighbours ``x`` of ``v`` with colour ``c`` on
    edge ``(v, x)``; it is kept in sync with ``edge_colors``.
    """

    graph: SpatialGraph
    mode: Mode = Mode.STRICT
    edge_colors: dict[tuple[int, int], set[int]] = field(default_factory=dict)
    cnbr: list[dict[int, set[int]]] = field(default_factory=list)
    used_colors: list[int] = field(default_factory=list)
    colorability_checks: int = 0
    edge_writes: int = 0

    def __post_init__(self):
        self.mode = Mode(self.mode)
        if not self.cnbr:
            self.cnbr = [{} for _ in range(self.graph.n)]

    def colors(self, u: int, v: int) -> set[int]:
        return self.edge_colors.get((u, v) if u < v else (v, u), set())

    def c_neighbors(self, v: int, c: int) -> set[int]:
        return self.cnbr[v].get(c, set())

    def next_color(self) -> int:
        c = len(self.used_colors)
        self.used_colors.append(c)
        return c

    def add_color(self, u: int, v: int, c: int) -> None:
        key = (u, v) if u < v else (v, u)
        self.edge_colors.setdefault(key, set()).add(c)
        self.cnbr[u].setdefault(c, set()).add(v)
        self.cnbr[v].setdefault(c, set()).add(u)
        self.edge_writes += 1


def is_colorable(state: ColoringState, u: int, v: int, c: int, mode: Mode | None = None) -> bool:
    """Whether edge ``(u, v)`` can join colour ``c`` by merging cliques."""
    mode = state.mode if mode is None else Mode(mode)
    g = state.graph
    xs = state.c_neighbors(v, c)
    ys = state.c_neighbors(u, c)
    for x in xs:
        state.colorability_checks += 1
        if x != u and not g.has_edge(u, x):
            return False
    for y in ys:
        state.colorability_checks += 1
        if y != v and not g.has_edge(v, y):
            return False
    if mode is Mode.STRICT:
        for x in xs:
            for y in ys:
                state.colorability_checks += 1
                if x != y and not g.has_edge(x, y):
                    return False
    return True


def color_edges(state: ColoringState, u: int, v: int, c: int) -> None:
    """Add colour ``c`` to ``(u, v)`` and to every edge joining the two cliques.

    Colours are only ever added. Pairs that are not graph edges raise in
    strict mode and are skipped in verbatim mode.
    """
    g = state.graph
    # snapshot before the writes below grow the neighbourhoods
    xs = sorted(state.c_neighbors(v, c) - {u})
    ys = sorted(state.c_neighbors(u, c) - {v})
    pairs = [(u, v)]
    pairs += [(u, x) for x in xs]
    pairs += [(v, y) for y in ys]
    pairs += [(x, y) for x in xs for y in ys if x != y]
    for a, b in pairs:
        if g.has_edge(a, b):
            state.add_color(a, b, c)
        elif state.mode is Mode.STRICT:
            raise CoverInconsistency(f"merge for colour {c} needs missing edge ({a}, {b})")


def insert_vertex(state: ColoringState, u: int) -> None:
    """Colour all edges from ``u`` to already inserted (lower-index) vertices."""
    for v in sorted(w for w in state.graph.neighbors(u) if w < u):
        if state.colors(u, v):
            continue
        for c in state.used_colors:
            if is_colorable(state, u, v, c):
                color_edges(state, u, v, c)
                break
        else:
            color_edges(state, u, v, state.next_color())


@dataclass(frozen=True)
class TessellationCover:
    """Edge colour sets plus, per colour, the cliques of that tessellation.

    ``cliques[c]`` lists sorted vertex lists ordered by smallest vertex;
    ``lookup[c][v]`` is the index of ``v``'s clique in colour ``c`` or -1.
    """

    n: int
    edge_colors: dict[tuple[int, int], frozenset[int]]
    cliques: tuple[tuple[tuple[int, ...], ...], ...]
    lookup: tuple[np.ndarray, ...]
    checks: int = 0
    writes: int = 0

    @property
    def t_count(self) -> int:
        return len(self.cliques)

    T = t_count

    def is_complete(self) -> bool:
        return all(np.all(lk >= 0) for lk in self.lookup)

    def color_edges(self, c: int) -> list[tuple[int, int]]:
        return sorted(e for e, cs in self.edge_colors.items() if c in cs)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "T": self.t_count,
            "edges": [[u, v, sorted(cs)] for (u, v), cs in sorted(self.edge_colors.items())],
            "cliques": [[list(k) for k in per] for per in self.cliques],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TessellationCover":
        edge_colors = {(int(u), int(v)): frozenset(int(c) for c in cs) for u, v, cs in data["edges"]}
        cliques = [[tuple(int(x) for x in k) for k in per] for per in data["cliques"]]
        if len(cliques) != int(data["T"]):
            raise ValueError("T does not match the number of clique lists")
        n = int(data.get("n", 1 + max((v for k in sum(cliques, []) for v in k), default=-1)))
        return build_cover(n, edge_colors, cliques)


def build_cover(n: int, edge_colors, cliques) -> TessellationCover:
    """Assemble a cover from explicit cliques, filling the vertex lookup."""
    cliques = tuple(tuple(tuple(sorted(k)) for k in sorted(per, key=min)) for per in cliques)
    lookup = []
    for per in cliques:
        lk = np.full(n, -1, dtype=np.int64)
        for i, k in enumerate(per):
            lk[list(k)] = i
        lk.setflags(write=False)
        lookup.append(lk)
    return TessellationCover(
        n=n,
        edge_colors={e: frozenset(cs) for e, cs in edge_colors.items()},
        cliques=cliques,
        lookup=tuple(lookup),
    )


def _color_components(n: int, edges: list[tuple[int, int]]) -> list[tuple[int, ...]]:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    touched = set()
    for u, v in edges:
        touched.update((u, v))
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    groups: dict[int, list[int]] = {}
    for v in sorted(touched):
        groups.setdefault(find(v), []).append(v)
    return [tuple(g) for g in groups.values()]


def cover_from_edge_colors(n: int, edge_colors: dict, t_count: int | None = None) -> TessellationCover:
    """Cliques of each colour are the components of its coloured edges."""
    if t_count is None:
        t_count = 1 + max((c for cs in edge_colors.values() for c in cs), default=-1)
    per_color: list[list[tuple[int, int]]] = [[] for _ in range(t_count)]
    for e, cs in edge_colors.items():
        for c in cs:
            per_color[c].append(e)
    cliques = [_color_components(n, es) for es in per_color]
    return build_cover(n, edge_colors, cliques)


def tessellate(g: SpatialGraph, mode: Mode | str = Mode.STRICT) -> TessellationCover:
    """Tessellation cover of ``g`` by incremental colouring in index order."""
    state = ColoringState(g, Mode(mode))
    for u in range(g.n):
        insert_vertex(state, u)
    cover = cover_from_edge_colors(g.n, state.edge_colors, len(state.used_colors))
    return _with_counters(cover, state.colorability_checks, state.edge_writes)


def _with_counters(cover: TessellationCover, checks: int, writes: int) -> TessellationCover:
    return TessellationCover(
        n=cover.n,
        edge_colors=cover.edge_colors,
        cliques=cover.cliques,
        lookup=cover.lookup,
        checks=checks,
        writes=writes,
    )


def complete_cover(g: SpatialGraph, cover: TessellationCover) -> TessellationCover:
    """Add singleton cliques so each colour partitions every vertex."""
    cliques = []
    for c, per in enumerate(cover.cliques):
        missing = np.flatnonzero(cover.lookup[c] < 0)
        cliques.append(list(per) + [(int(v),) for v in missing])
    out = build_cover(g.n, cover.edge_colors, cliques)
    return _with_counters(out, cover.checks, cover.writes)


def single_clique_cover(n: int) -> TessellationCover:
    """One tessellation holding the whole vertex set (complete graphs)."""
    edges = {(u, v): {0} for u in range(n) for v in range(u + 1, n)}
    return build_cover(n, edges, [[tuple(range(n))]])


@dataclass
class ValidationReport:
    uncovered: list[tuple[int, int]] = field(default_factory=list)
    clique_violations: list[tuple[int, tuple[int, ...]]] = field(default_factory=list)
    lookup_errors: list[tuple[int, int]] = field(default_factory=list)
    extra_edges: list[tuple[int, int]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.uncovered or self.clique_violations or self.lookup_errors or self.extra_edges)

    @property
    def ok(self) -> bool:
        return not self

    def summary(self) -> dict:
        return {
            "uncovered": len(self.uncovered),
            "clique_violations": len(self.clique_violations),
            "lookup_errors": len(self.lookup_errors),
            "extra_edges": len(self.extra_edges),
        }


def validate_cover(g: SpatialGraph, cover: TessellationCover) -> ValidationReport:
    """Report uncovered edges, non-clique colour classes and lookup mismatches.

    An empty (falsy) report means the cover is valid.
    """
    report = ValidationReport()
    for e in g.edges:
        if not cover.edge_colors.get(e):
            report.uncovered.append(e)
    report.extra_edges = sorted(e for e in cover.edge_colors if not g.has_edge(*e))

    for c in range(cover.t_count):
        colored = [e for e in cover.color_edges(c) if g.has_edge(*e)]
        colored_set = set(colored)
        for comp in _color_components(g.n, colored):
            ok = all(
                (a, b) in colored_set for i, a in enumerate(comp) for b in comp[i + 1:]
            )
            if not ok:
                report.clique_violations.append((c, comp))
        # recorded cliques must be disjoint and match the lookup
        lk = cover.lookup[c]
        seen = {}
        for i, k in enumerate(cover.cliques[c]):
            for v in k:
                if v in seen or lk[v] != i:
                    report.lookup_errors.append((c, v))
                seen[v] = i
        for v in np.flatnonzero(lk >= 0):
            if int(v) not in seen:
                report.lookup_errors.append((c, int(v)))
        for u, v in colored:
            if lk[u] < 0 or lk[u] != lk[v]:
                report.lookup_errors.append((c, u))
    return report


@dataclass(frozen=True)
class CoverStats:
    T: float
    max_clique_size: float
    histograms: tuple[dict[int, int], ...] = ()
    T_sem: float = 0.0
    max_clique_size_sem: float = 0.0
    realizations: int = 1


def cover_stats(cover: TessellationCover) -> CoverStats:
    hists = []
    biggest = 0
    for per in cover.cliques:
        h: dict[int, int] = {}
        for k in per:
            h[len(k)] = h.get(len(k), 0) + 1
            biggest = max(biggest, len(k))
        hists.append(dict(sorted(h.items())))
    return CoverStats(T=cover.t_count, max_clique_size=biggest, histograms=tuple(hists))


def _mean_sem(values) -> tuple[float, float]:
    x = np.asarray(values, dtype=float)
    if len(x) < 2:
        return float(x.mean()), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x)))


def aggregate_stats(stats: list[CoverStats]) -> CoverStats:
    """Mean and standard error of the mean over realizations."""
    if not stats:
        raise ValueError("cannot aggregate an empty list of cover stats")
    t_mean, t_sem = _mean_sem([s.T for s in stats])
    k_mean, k_sem = _mean_sem([s.max_clique_size for s in stats])
    return CoverStats(
        T=t_mean,
        max_clique_size=k_mean,
        T_sem=t_sem,
        max_clique_size_sem=k_sem,
        realizations=len(stats),
    )


def save_cover(cover: TessellationCover, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(cover.to_dict(), fh)


def load_cover(path: str | Path) -> TessellationCover:
    with open(path) as fh:
        return TessellationCover.from_dict(json.load(fh))
