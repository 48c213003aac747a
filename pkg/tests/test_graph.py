import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stagwalk.graph import (
    BoundaryMode,
    SpatialGraph,
    complete_graph,
    critical_radius,
    degree_stats,
    distance,
    generate_rgg,
    geometric_edges,
    is_connected,
    load_graph,
    path_graph,
    save_graph,
)

unit = st.floats(0.0, 1.0, allow_nan=False)
points = st.tuples(unit, unit)


def test_critical_radius_values():
    assert critical_radius(100) == pytest.approx(0.121073, abs=1e-6)
    assert critical_radius(3) == pytest.approx(0.341418, abs=1e-6)
    assert critical_radius(10000) < critical_radius(100)


@pytest.mark.parametrize("n", [-1, 0, 1])
def test_critical_radius_rejects_small_n(n):
    with pytest.raises(ValueError):
        critical_radius(n)


def test_distance_examples():
    p, q = (0.05, 0.5), (0.95, 0.5)
    assert distance(p, p, "open") == 0.0
    assert distance(p, q, BoundaryMode.PERIODIC) == pytest.approx(0.1)
    assert distance(p, q, BoundaryMode.OPEN) == pytest.approx(0.9)


@given(points, points, points)
def test_torus_metric(p, q, r):
    d = lambda a, b: distance(a, b, "periodic")
    assert d(p, q) == pytest.approx(d(q, p))
    assert d(p, r) <= d(p, q) + d(q, r) + 1e-12
    assert d(p, q) <= math.sqrt(0.5**2 + 0.5**2) + 1e-12


def test_rgg_two_vertex_extremes():
    g = generate_rgg(2, 1.0, "open", seed=1, radius=math.sqrt(2) + 1e-9)
    assert g.edges == ((0, 1),)
    g = generate_rgg(2, 1.0, "open", seed=1, radius=0.0)
    assert g.edges == ()


def test_rgg_deterministic():
    a = generate_rgg(64, 2.0, "open", seed=7)
    b = generate_rgg(64, 2.0, "open", seed=7)
    assert a.edges == b.edges
    np.testing.assert_array_equal(a.positions, b.positions)
    assert generate_rgg(64, 2.0, "open", seed=8).edges != a.edges


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(2, 120),
    rho=st.floats(0.3, 3.0),
    boundary=st.sampled_from(list(BoundaryMode)),
    seed=st.integers(0, 2**63 - 1),
)
def test_edges_match_brute_force_metric(n, rho, boundary, seed):
    g = generate_rgg(n, rho, boundary, seed)
    brute = {
        (u, v)
        for u, v in itertools.combinations(range(n), 2)
        if distance(g.positions[u], g.positions[v], boundary) < g.radius
    }
    assert set(g.edges) == brute
    assert geometric_edges(g.positions, g.radius, boundary) == g.edges


def test_is_connected_small_cases():
    assert is_connected(path_graph(3))
    assert not is_connected(SpatialGraph.from_edges(2, []))
    assert is_connected(SpatialGraph.from_edges(1, []))
    assert is_connected(SpatialGraph.from_edges(0, []))


def test_supercritical_rgg_mostly_connected():
    connected = sum(is_connected(generate_rgg(256, 2.0, "open", s)) for s in range(100))
    assert connected >= 90


def test_degree_stats_small():
    k3 = degree_stats(complete_graph(3))
    assert (k3.mean_degree, k3.edge_count, k3.max_degree) == (2.0, 3, 2)
    empty = degree_stats(SpatialGraph.from_edges(5, []))
    assert (empty.mean_degree, empty.edge_count) == (0.0, 0)


def test_mean_degree_grows_logarithmically():
    def mean_d(n, seeds):
        return np.mean([degree_stats(generate_rgg(n, 1.0, "open", s)).mean_degree for s in range(seeds)])

    ratio = mean_d(4096, 30) / mean_d(256, 30)
    assert 1.1 < ratio < 2.0


@pytest.mark.parametrize(
    "edges",
    [[(0, 0)], [(0, 1), (0, 1)], [(0, 5)], [(-1, 0)]],
)
def test_invariant_violations_rejected(edges):
    with pytest.raises(ValueError):
        SpatialGraph(n=3, edges=tuple(edges))


def test_json_round_trip(tmp_path):
    g = generate_rgg(50, 2.0, "periodic", seed=3)
    path = tmp_path / "g.json"
    save_graph(g, path)
    h = load_graph(path)
    assert h.edges == g.edges
    assert h.boundary is BoundaryMode.PERIODIC
    np.testing.assert_array_equal(h.positions, g.positions)
    data = json.loads(path.read_text())
    assert data["edges"] == sorted(data["edges"])
    assert all(u < v for u, v in data["edges"])


@pytest.mark.parametrize(
    "patch",
    [
        {"edges": [[1, 0]]},
        {"edges": [[1, 2], [0, 1]]},
        {"positions": [[0.1, 0.1], [2.0, 0.5], [0.3, 0.3]]},
        {"edges": [[0, 3]]},
    ],
)
def test_loader_rejects_bad_records(tmp_path, patch):
    rec = {"n": 3, "boundary": "open", "radius": 0.5,
           "positions": [[0.1, 0.1], [0.2, 0.2], [0.3, 0.3]], "edges": [[0, 1]]}
    rec.update(patch)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(rec))
    with pytest.raises(ValueError):
        load_graph(path)
