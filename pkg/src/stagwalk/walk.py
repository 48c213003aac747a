"""Walk dynamics in the single-excitation subspace.

A state is a complex vector of length ``n``; entry ``i`` is the amplitude of
the excitation sitting on vertex ``i``. Kernels also accept ``(n, k)`` arrays
and then act on every column, which lets a whole grid of rotation angles be
evolved at once (``theta`` of shape ``(k,)`` broadcasts over columns).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse

from .graph import SpatialGraph
from .tessellation import TessellationCover

MAX_DENSE_N = 2048


class ResourceLimitError(RuntimeError):
    """Problem size exceeds a configured dense-computation limit."""


@dataclass(frozen=True)
class ColorCliques:
    """Partition of all vertices into the cliques of one colour."""

    labels: np.ndarray  # vertex -> clique index
    sizes: np.ndarray  # clique index -> size

    @property
    def n(self) -> int:
        return len(self.labels)

    @cached_property
    def _membership(self) -> tuple[sparse.csr_matrix, sparse.csr_matrix]:
        # (cliques x n) averaging rows and its (n x cliques) broadcast back
        cols = np.arange(self.n)
        avg = sparse.csr_matrix(
            (1.0 / self.sizes[self.labels], (self.labels, cols)), shape=(len(self.sizes), self.n)
        )
        spread = sparse.csr_matrix((np.ones(self.n), (cols, self.labels)), shape=(self.n, len(self.sizes)))
        return avg, spread

    def clique_state(self, k: int) -> np.ndarray:
        """Uniform superposition over clique ``k``."""
        vec = np.zeros(self.n)
        vec[self.labels == k] = 1 / np.sqrt(self.sizes[k])
        return vec

    def reflection_matrix(self) -> np.ndarray:
        """Dense ``1 - 2 sum_k |a_k><a_k|``, for checking the kernels."""
        w = np.eye(self.n)
        for k in range(len(self.sizes)):
            a = self.clique_state(k)
            w -= 2 * np.outer(a, a)
        return w


@dataclass(frozen=True)
class CliqueProjectorSet:
    colors: tuple[ColorCliques, ...]

    @property
    def t_count(self) -> int:
        return len(self.colors)

    def __len__(self):
        return len(self.colors)

    def __getitem__(self, c: int) -> ColorCliques:
        return self.colors[c]


def clique_states(cover: TessellationCover, n: int | None = None) -> CliqueProjectorSet:
    """Per-colour clique labelling of a completed cover."""
    n = cover.n if n is None else n
    if n != cover.n:
        raise ValueError(f"cover is over {cover.n} vertices, not {n}")
    if not cover.is_complete():
        raise ValueError("cover must be completed (run complete_cover) before building clique states")
    colors = []
    for c, per in enumerate(cover.cliques):
        labels = np.asarray(cover.lookup[c], dtype=np.int64)
        sizes = np.array([len(k) for k in per], dtype=np.int64)
        colors.append(ColorCliques(labels=labels, sizes=sizes))
    return CliqueProjectorSet(tuple(colors))


def _as_projectors(cliques) -> CliqueProjectorSet:
    if isinstance(cliques, CliqueProjectorSet):
        return cliques
    return clique_states(cliques)


def _clique_means(state: np.ndarray, cc: ColorCliques) -> np.ndarray:
    avg, spread = cc._membership
    return spread @ (avg @ state)


def apply_reflection(state: np.ndarray, cc: ColorCliques) -> np.ndarray:
    """``W |psi>``: subtract twice the clique mean from every amplitude."""
    state = np.asarray(state, dtype=complex)
    return state - 2 * _clique_means(state, cc)


def apply_generalized(state: np.ndarray, cc: ColorCliques, theta) -> np.ndarray:
    """``exp(-i theta W) |psi> = cos(theta) |psi> - i sin(theta) W |psi>``."""
    state = np.asarray(state, dtype=complex)
    theta = np.asarray(theta, dtype=float)
    return np.cos(theta) * state - 1j * np.sin(theta) * apply_reflection(state, cc)


def walk_step(state: np.ndarray, cover, theta) -> np.ndarray:
    """One generalized step ``exp(-i theta W_0) ... exp(-i theta W_{T-1})``.

    The rightmost factor acts first, so colours run from ``T-1`` down to 0.
    """
    proj = _as_projectors(cover)
    for cc in reversed(proj.colors):
        state = apply_generalized(state, cc, theta)
    return state


def walk_operator(cover, theta: float) -> np.ndarray:
    """Dense matrix of ``walk_step`` built from explicit reflections."""
    proj = _as_projectors(cover)
    n = proj.colors[0].n if proj.colors else 0
    u = np.eye(n, dtype=complex)
    for cc in proj.colors:
        w = cc.reflection_matrix()
        u = u @ (np.cos(theta) * np.eye(n) - 1j * np.sin(theta) * w)
    return u


def basis_state(n: int, k: int) -> np.ndarray:
    psi = np.zeros(n, dtype=complex)
    psi[k] = 1.0
    return psi


def uniform_state(n: int) -> np.ndarray:
    return np.full(n, 1 / np.sqrt(n), dtype=complex)


def parse_start(spec: str, n: int) -> np.ndarray:
    """``"uniform"`` or ``"vertex:<k>"``."""
    if spec == "uniform":
        return uniform_state(n)
    if spec.startswith("vertex:"):
        k = int(spec.split(":", 1)[1])
        if not 0 <= k < n:
            raise ValueError(f"start vertex {k} out of range [0, {n})")
        return basis_state(n, k)
    raise ValueError(f"unknown start state {spec!r}")


# --- continuous-time baseline -------------------------------------------------


@dataclass(frozen=True)
class CtqwParams:
    gamma: float = 1.0
    t: float = 1.0
    K: int = 1

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.t < 0:
            raise ValueError("t must be non-negative")
        if self.K < 1:
            raise ValueError("K must be at least 1")


def ctqw_exact(g: SpatialGraph, params: CtqwParams, start: np.ndarray) -> np.ndarray:
    """``exp(-i gamma A t) |start>`` via eigendecomposition of the adjacency."""
    if g.n > MAX_DENSE_N:
        raise ResourceLimitError(f"dense CTQW limited to n <= {MAX_DENSE_N}, got {g.n}")
    evals, evecs = np.linalg.eigh(params.gamma * g.adjacency_matrix())
    coeffs = evecs.T @ np.asarray(start, dtype=complex)
    return evecs @ (np.exp(-1j * evals * params.t) * coeffs)


def ctqw_trotter(g: SpatialGraph, params: CtqwParams, start: np.ndarray) -> np.ndarray:
    """First-order product formula with ``K`` steps of two-body rotations.

    Each step applies ``exp(-i gamma dt (|i><j| + |j><i|))`` for every edge in
    lexicographic order, the first edge acting first.
    """
    psi = np.array(start, dtype=complex)
    dt = params.t / params.K
    c, s = np.cos(params.gamma * dt), -1j * np.sin(params.gamma * dt)
    edges = sorted(g.edges)
    for _ in range(params.K):
        for i, j in edges:
            a, b = psi[i], psi[j]
            psi[i] = c * a + s * b
            psi[j] = s * a + c * b
    return psi


def trotter_error(g: SpatialGraph, params: CtqwParams, start: np.ndarray) -> float:
    return float(np.linalg.norm(ctqw_trotter(g, params, start) - ctqw_exact(g, params, start)))


def trotter_factor_count(g: SpatialGraph, params: CtqwParams) -> int:
    """Number of two-body factors applied, the analogue of interaction count."""
    return g.m * params.K
