import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from stagwalk.graph import SpatialGraph, cycle_graph, generate_rgg, path_graph
from stagwalk.tessellation import build_cover, complete_cover, tessellate
from stagwalk.walk import (
    CtqwParams,
    ResourceLimitError,
    apply_generalized,
    apply_reflection,
    basis_state,
    clique_states,
    ctqw_exact,
    ctqw_trotter,
    trotter_error,
    uniform_state,
    walk_step,
)


def projector_cover(n, cliques_per_color):
    return build_cover(n, {}, cliques_per_color)


def dense_reflection(n, cliques):
    # independent of the kernels: explicit sum of clique-state projectors
    w = np.eye(n, dtype=complex)
    for k in cliques:
        a = np.zeros(n)
        a[list(k)] = 1 / math.sqrt(len(k))
        w -= 2 * np.outer(a, a)
    return w


def random_state(rng, n):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def test_clique_states_amplitudes():
    proj = clique_states(projector_cover(6, [[(0, 1), (2, 3, 4, 5)], [(5,), (0, 1, 2, 3, 4)]]))
    np.testing.assert_allclose(proj[0].clique_state(0)[:2], [1 / math.sqrt(2)] * 2)
    np.testing.assert_allclose(proj[0].clique_state(1)[2:], [0.5] * 4)
    np.testing.assert_allclose(proj[1].clique_state(1), basis_state(6, 5).real)


def test_clique_states_require_complete_cover():
    cover = tessellate(path_graph(3))
    with pytest.raises(ValueError):
        clique_states(cover)


def test_reflection_examples():
    cc = clique_states(projector_cover(2, [[(0, 1)]]))[0]
    np.testing.assert_allclose(apply_reflection(basis_state(2, 0), cc), [0, -1], atol=1e-15)
    alpha = uniform_state(2)
    np.testing.assert_allclose(apply_reflection(alpha, cc), -alpha, atol=1e-15)
    odd = np.array([1, -1]) / math.sqrt(2)
    np.testing.assert_allclose(apply_reflection(odd, cc), odd, atol=1e-15)


def test_singleton_reflection_flips_sign():
    cc = clique_states(projector_cover(3, [[(0,), (1, 2)]]))[0]
    out = apply_reflection(basis_state(3, 0), cc)
    np.testing.assert_allclose(out, -basis_state(3, 0))


def test_generalized_examples():
    cc = clique_states(projector_cover(2, [[(0, 1)]]))[0]
    psi = basis_state(2, 0)
    np.testing.assert_allclose(
        apply_generalized(psi, cc, math.pi / 2), -1j * apply_reflection(psi, cc), atol=1e-15
    )
    np.testing.assert_allclose(apply_generalized(psi, cc, 0.0), psi)
    expected = np.array([1, 1j]) / math.sqrt(2)
    np.testing.assert_allclose(apply_generalized(psi, cc, math.pi / 4), expected, atol=1e-15)


def test_walk_step_single_colour_matches_generalized():
    cover = projector_cover(4, [[(0, 1, 2, 3)]])
    cc = clique_states(cover)[0]
    psi = uniform_state(4) * np.exp(0.3j)
    np.testing.assert_allclose(walk_step(psi, cover, 0.7), apply_generalized(psi, cc, 0.7))


def test_four_cycle_step_against_dense_product():
    g = cycle_graph(4)
    cover = complete_cover(g, tessellate(g))
    theta = math.pi / 2
    mats = [expm(-1j * theta * dense_reflection(4, per)) for per in cover.cliques]
    u = mats[0] @ mats[1]
    np.testing.assert_allclose(walk_step(basis_state(4, 0), cover, theta), u[:, 0], atol=1e-12)


def test_norm_preserved_over_many_steps():
    g = generate_rgg(60, 2.0, "periodic", seed=4)
    cover = complete_cover(g, tessellate(g))
    proj = clique_states(cover)
    psi = random_state(np.random.default_rng(0), g.n)
    for _ in range(1000):
        psi = walk_step(psi, proj, 0.9)
    assert abs(np.linalg.norm(psi) - 1) < 1e-12


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 8), seed=st.integers(0, 2**32), theta=st.floats(0.0, math.pi))
def test_kernels_match_dense_operators(n, seed, theta):
    g = generate_rgg(n, 2.5, "open", seed)
    cover = complete_cover(g, tessellate(g))
    proj = clique_states(cover)
    rng = np.random.default_rng(seed)
    psi = random_state(rng, n)
    total = np.eye(n, dtype=complex)
    for c, per in enumerate(cover.cliques):
        w = dense_reflection(n, per)
        np.testing.assert_allclose(apply_reflection(psi, proj[c]), w @ psi, atol=1e-12)
        np.testing.assert_allclose(apply_reflection(apply_reflection(psi, proj[c]), proj[c]), psi, atol=1e-12)
        gen = math.cos(theta) * np.eye(n) - 1j * math.sin(theta) * w
        np.testing.assert_allclose(apply_generalized(psi, proj[c], theta), gen @ psi, atol=1e-12)
        total = total @ gen
    np.testing.assert_allclose(walk_step(psi, proj, theta), total @ psi, atol=1e-12)


def test_column_batches_match_single_states():
    g = generate_rgg(30, 2.0, "open", seed=9)
    proj = clique_states(complete_cover(g, tessellate(g)))
    rng = np.random.default_rng(1)
    thetas = np.array([0.2, 0.9, 1.5])
    batch = np.stack([random_state(rng, 30) for _ in thetas], axis=1)
    out = walk_step(batch, proj, thetas)
    for j, th in enumerate(thetas):
        np.testing.assert_allclose(out[:, j], walk_step(batch[:, j], proj, th), atol=1e-14)


# --- CTQW -----------------------------------------------------------------------


def test_ctqw_exact_single_edge():
    g = path_graph(2)
    out = ctqw_exact(g, CtqwParams(gamma=1.0, t=math.pi / 2), basis_state(2, 0))
    np.testing.assert_allclose(out, [0, -1j], atol=1e-12)


def test_ctqw_trivial_cases():
    psi = uniform_state(3)
    g = path_graph(3)
    np.testing.assert_allclose(ctqw_exact(g, CtqwParams(t=0.0), psi), psi, atol=1e-14)
    empty = SpatialGraph.from_edges(3, [])
    np.testing.assert_allclose(ctqw_exact(empty, CtqwParams(t=5.0), psi), psi)


def test_ctqw_exact_matches_expm():
    g = generate_rgg(12, 2.0, "open", seed=5)
    p = CtqwParams(gamma=0.7, t=1.3)
    psi = basis_state(12, 3)
    ref = expm(-1j * p.gamma * p.t * g.adjacency_matrix()) @ psi
    np.testing.assert_allclose(ctqw_exact(g, p, psi), ref, atol=1e-12)


def test_ctqw_dimension_limit():
    g = SpatialGraph.from_edges(2049, [])
    with pytest.raises(ResourceLimitError):
        ctqw_exact(g, CtqwParams(), basis_state(2049, 0))


@pytest.mark.parametrize("K", [1, 3, 17])
def test_trotter_exact_when_terms_commute(K):
    matching = SpatialGraph.from_edges(6, [(0, 1), (2, 3), (4, 5)])
    assert trotter_error(matching, CtqwParams(t=1.0, K=K), basis_state(6, 2)) < 1e-12
    edge = path_graph(2)
    assert trotter_error(edge, CtqwParams(t=2.0, K=K), basis_state(2, 0)) < 1e-12


def test_trotter_error_halves():
    g = path_graph(3)
    e64 = trotter_error(g, CtqwParams(t=1.0, K=64), basis_state(3, 0))
    e128 = trotter_error(g, CtqwParams(t=1.0, K=128), basis_state(3, 0))
    assert 0.375 <= e128 / e64 <= 0.625


def test_trotter_error_grows_quadratically_in_short_time():
    g = path_graph(3)
    e1 = trotter_error(g, CtqwParams(t=0.25, K=64), basis_state(3, 0))
    e2 = trotter_error(g, CtqwParams(t=0.5, K=64), basis_state(3, 0))
    assert 3.0 <= e2 / e1 <= 5.0


def test_trotter_and_exact_are_unitary():
    g = generate_rgg(16, 2.0, "open", seed=2)
    psi = basis_state(16, 0)
    for out in (ctqw_trotter(g, CtqwParams(K=10), psi), ctqw_exact(g, CtqwParams(), psi)):
        assert abs(np.linalg.norm(out) - 1) < 1e-12


def test_ctqw_cycle_reflection_symmetry():
    g = cycle_graph(9)
    probs = np.abs(ctqw_exact(g, CtqwParams(t=2.3), basis_state(9, 0))) ** 2
    mirror = probs[(-np.arange(9)) % 9]
    np.testing.assert_allclose(probs, mirror, atol=1e-12)
    assert probs.sum() == pytest.approx(1.0)
