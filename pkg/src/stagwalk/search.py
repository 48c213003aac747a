"""Spatial search: phase oracle on a marked vertex plus generalized walk steps."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .graph import BoundaryMode, SpatialGraph, generate_rgg, is_connected
from .tessellation import complete_cover, tessellate
from .walk import CliqueProjectorSet, basis_state, clique_states, uniform_state, walk_step

log = logging.getLogger(__name__)


def default_theta_grid(points: int = 63) -> np.ndarray:
    """Evenly spaced angles in ``(0, pi/2]``."""
    return np.linspace(0, math.pi / 2, points + 1)[1:]


def default_horizon(n: int) -> int:
    return math.ceil(4 * math.sqrt(n)) + 8


@dataclass
class SearchConfig:
    marked: int
    thetas: np.ndarray = field(default_factory=default_theta_grid)
    horizon: int = 1
    initial: str = "uniform"  # or "vertex:<k>"

    def __post_init__(self):
        self.thetas = np.atleast_1d(np.asarray(self.thetas, dtype=float))
        if self.thetas.size == 0:
            raise ValueError("theta grid is empty")
        if np.any(self.thetas <= 0) or np.any(self.thetas > math.pi / 2 + 1e-12):
            raise ValueError("theta grid values must lie in (0, pi/2]")
        if self.horizon < 0:
            raise ValueError("horizon must be non-negative")

    @classmethod
    def for_graph(cls, n: int, marked: int, **kw) -> "SearchConfig":
        kw.setdefault("horizon", default_horizon(n))
        return cls(marked=marked, **kw)


@dataclass(frozen=True)
class ProbabilityTrace:
    p: np.ndarray
    theta: float

    @property
    def horizon(self) -> int:
        return len(self.p) - 1

    def __len__(self):
        return len(self.p)


@dataclass(frozen=True)
class SearchResult:
    theta_op: float
    search_time: int
    p_max: float
    amplification: float
    saturated: bool = True


def oracle_apply(state: np.ndarray, marked: int) -> np.ndarray:
    """Flip the sign of the marked vertex amplitude."""
    state = np.array(state, dtype=complex)
    if not 0 <= marked < state.shape[0]:
        raise IndexError(f"marked vertex {marked} out of range [0, {state.shape[0]})")
    state[marked] *= -1
    return state


def _initial(n: int, spec: str) -> np.ndarray:
    if spec == "uniform":
        return uniform_state(n)
    if spec.startswith("vertex:"):
        return basis_state(n, int(spec.split(":", 1)[1]))
    raise ValueError(f"unknown initial state {spec!r}")


def _projectors(cover) -> CliqueProjectorSet:
    if isinstance(cover, CliqueProjectorSet):
        return cover
    return clique_states(cover)


def marked_probabilities(
    cover, n: int, marked: int, thetas, horizon: int, initial: str = "uniform"
) -> np.ndarray:
    """Marked-vertex probability, shape ``(horizon + 1, len(thetas))``.

    All angles are evolved together as columns of one state matrix.
    """
    proj = _projectors(cover)
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    state = np.repeat(_initial(n, initial)[:, None], len(thetas), axis=1)
    out = np.empty((horizon + 1, len(thetas)))
    out[0] = np.abs(state[marked]) ** 2
    for t in range(1, horizon + 1):
        state[marked] *= -1
        state = walk_step(state, proj, thetas)
        out[t] = np.abs(state[marked]) ** 2
    return out


def search_run(g: SpatialGraph | None, cover, config: SearchConfig, theta: float) -> ProbabilityTrace:
    """Trace of ``p[t]`` under ``horizon`` rounds of oracle then walk step."""
    proj = _projectors(cover)
    n = proj[0].n if g is None else g.n
    p = marked_probabilities(proj, n, config.marked, [theta], config.horizon, config.initial)[:, 0]
    return ProbabilityTrace(p=p, theta=float(theta))


def first_maximum(p) -> tuple[int, bool]:
    """Index of the first local maximum and whether it is interior.

    Returns the global argmax with ``False`` when the trace never turns over
    before its end (the horizon was too short).
    """
    p = np.asarray(p.p if isinstance(p, ProbabilityTrace) else p, dtype=float)
    if len(p) < 2:
        raise ValueError("search time needs a trace of length >= 2")
    for t in range(1, len(p) - 1):
        if p[t] >= p[t - 1] and p[t] >= p[t + 1]:
            return t, True
    return int(np.argmax(p)), False


def search_time(trace) -> int:
    """Oracle calls until the marked probability reaches its first maximum."""
    return first_maximum(trace)[0]


def theta_scan(g: SpatialGraph | None, cover, config: SearchConfig) -> tuple[float, np.ndarray]:
    """Angle maximising ``max_t p[t]`` over the grid (ties go to the smaller angle).

    Returns ``(theta_op, amplification_curve)`` with one entry per grid angle.
    """
    proj = _projectors(cover)
    n = proj[0].n if g is None else g.n
    order = np.argsort(config.thetas, kind="stable")
    thetas = config.thetas[order]
    probs = marked_probabilities(proj, n, config.marked, thetas, config.horizon, config.initial)
    best = probs.max(axis=0)
    curve = np.empty_like(best)
    curve[order] = best
    return float(thetas[int(np.argmax(best))]), curve


def run_search(g: SpatialGraph | None, cover, config: SearchConfig) -> SearchResult:
    """Scan the grid, then measure the search time at the best angle."""
    proj = _projectors(cover)
    n = proj[0].n if g is None else g.n
    theta_op, _ = theta_scan(g, proj, config)
    trace = search_run(g, proj, config, theta_op)
    t, saturated = first_maximum(trace)
    p_max = float(trace.p[t])
    return SearchResult(theta_op, t, p_max, p_max * n, saturated)


# --- scaling -------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares fit of ``log(y) = intercept + exponent * log(N)``."""

    sizes: tuple[int, ...]
    values: tuple[float, ...]
    exponent: float
    intercept: float
    r2: float


def fit_power_law(sizes, values) -> ScalingFit:
    sizes = np.asarray(sizes, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(sizes) < 2 or len(np.unique(sizes)) < 2:
        raise ValueError("a power-law fit needs at least two distinct sizes")
    x, y = np.log(sizes), np.log(values)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (intercept + slope * x)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return ScalingFit(
        tuple(int(s) for s in sizes), tuple(float(v) for v in values), float(slope), float(intercept), r2
    )


@dataclass(frozen=True)
class SearchRow:
    """One realization of the search scaling experiment."""

    N: int
    seed: int
    T: int
    marked: int
    theta_op: float
    search_time: int
    p_max: float
    amplification: float
    saturated: bool
    rejected_seeds: tuple[int, ...] = ()

    @property
    def tessellation_steps(self) -> int:
        return self.T * self.search_time


def realizations_for(n: int, budget: float, cap: int | None = None) -> int:
    """``ceil(budget / n)`` realizations, optionally capped."""
    k = max(1, math.ceil(budget / n))
    return min(k, cap) if cap is not None else k


def marked_vertex(seed: int, n: int) -> int:
    return int(np.random.default_rng([seed, 1]).integers(n))


def connected_rgg(
    n: int, rho: float, boundary: BoundaryMode | str, seed: int
) -> tuple[SpatialGraph, int, list[int]]:
    """First connected RGG at ``seed, seed + 1, ...``; returns the rejected seeds too."""
    rejected = []
    while True:
        g = generate_rgg(n, rho, boundary, seed)
        if is_connected(g):
            return g, seed, rejected
        log.info("RGG(n=%d, seed=%d) disconnected, trying seed %d", n, seed, seed + 1)
        rejected.append(seed)
        seed += 1


def search_realization(
    n: int,
    rho: float,
    seed: int,
    boundary: BoundaryMode | str = BoundaryMode.PERIODIC,
    thetas=None,
    horizon: int | None = None,
) -> SearchRow:
    """Generate, tessellate, scan and search one seeded RGG."""
    g, used_seed, rejected = connected_rgg(n, rho, boundary, seed)
    cover = complete_cover(g, tessellate(g))
    marked = marked_vertex(used_seed, n)
    config = SearchConfig(
        marked=marked,
        thetas=default_theta_grid() if thetas is None else thetas,
        horizon=default_horizon(n) if horizon is None else horizon,
    )
    res = run_search(g, cover, config)
    return SearchRow(
        N=n,
        seed=used_seed,
        T=cover.t_count,
        marked=marked,
        theta_op=res.theta_op,
        search_time=res.search_time,
        p_max=res.p_max,
        amplification=res.amplification,
        saturated=res.saturated,
        rejected_seeds=tuple(rejected),
    )


def assign_seeds(
    sizes, rho: float, budget: float, cap: int | None, seed: int, boundary
) -> list[tuple[int, int, tuple[int, ...]]]:
    """``(N, seed, rejected_seeds)`` per realization, only connected draws kept.

    Realizations of each size walk the seeds ``seed, seed + 1, ...``; a
    disconnected draw is skipped and recorded, so no seed is used twice.
    """
    out = []
    for n in sorted(int(s) for s in sizes):
        next_seed = seed
        for _ in range(realizations_for(n, budget, cap)):
            _, used, rejected = connected_rgg(n, rho, boundary, next_seed)
            out.append((n, used, tuple(rejected)))
            next_seed = used + 1
    return out


def map_jobs(fn, jobs, workers: int = 1) -> list:
    """``[fn(*job) for job in jobs]``, optionally across processes, order kept."""
    if workers <= 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*jobs)))


@dataclass
class SearchScaling:
    rows: list[SearchRow]
    fit: ScalingFit
    mean_search_time: dict[int, float]
    mean_tessellation_steps: dict[int, float]
    mean_amplification: dict[int, float]
    mean_T: dict[int, float]


def summarize_search(rows: list[SearchRow]) -> SearchScaling:
    sizes = sorted({r.N for r in rows})
    mean_t, mean_steps, mean_amp, mean_T = {}, {}, {}, {}
    for n in sizes:
        sel = [r for r in rows if r.N == n]
        mean_t[n] = float(np.mean([r.search_time for r in sel]))
        mean_steps[n] = float(np.mean([r.tessellation_steps for r in sel]))
        mean_amp[n] = float(np.mean([r.amplification for r in sel]))
        mean_T[n] = float(np.mean([r.T for r in sel]))
    fit = fit_power_law(sizes, [mean_t[n] for n in sizes])
    return SearchScaling(rows, fit, mean_t, mean_steps, mean_amp, mean_T)


def scaling_experiment(
    sizes,
    rho: float = 2.0,
    budget: float = 1e4,
    cap: int | None = None,
    seed: int = 0,
    boundary: BoundaryMode | str = BoundaryMode.PERIODIC,
    thetas=None,
    workers: int = 1,
) -> SearchScaling:
    """Mean search time per size over seeded RGG ensembles, fitted on log-log axes.

    Each size gets ``ceil(budget / N)`` realizations (at most ``cap``).
    """
    sizes = sorted(int(s) for s in sizes)
    if len(sizes) < 3:
        raise ValueError("scaling experiment needs at least three sizes")
    plan = assign_seeds(sizes, rho, budget, cap, seed, boundary)
    jobs = [(n, rho, s, boundary, thetas) for n, s, _ in plan]
    rows = map_jobs(search_realization, jobs, workers)
    rows = [
        SearchRow(**{**r.__dict__, "rejected_seeds": rejected})
        for r, (_, _, rejected) in zip(rows, plan)
    ]
    return summarize_search(rows)
