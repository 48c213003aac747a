"""Reproducible experiment drivers.

Every driver returns plain rows plus fits and can write them as CSV next to a
JSON manifest holding the experiment config and every seed used, enough to replay any row.
"""

from __future__ import annotations

import csv
import json
import math
import platform
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .circuit import MAX_DENSE_QUBITS, compile_clique, verify_clique_equivalence
from .graph import BoundaryMode, SpatialGraph, degree_stats, generate_rgg, path_graph
from .search import (
    SearchRow,
    assign_seeds,
    connected_rgg,
    map_jobs,
    realizations_for,
    search_realization,
    summarize_search,
)
from .tessellation import CoverStats, aggregate_stats, cover_stats, tessellate
from .walk import CtqwParams, ResourceLimitError, basis_state, trotter_error

KINDS = ("tessellation", "search", "compile", "trotter")

TESSELLATION_COLUMNS = ["N", "rho", "seed", "T", "max_clique_size", "m", "mean_degree", "checks", "writes"]
TESSELLATION_SUMMARY_COLUMNS = ["N", "rho", "realizations", "mean_T", "sem_T", "mean_checks"]
SEARCH_COLUMNS = [
    "N", "seed", "T", "theta_op", "search_time", "p_max", "amplification",
    "tessellation_steps", "marked", "saturated",
]
COMPILE_COLUMNS = ["s", "theta", "ok", "max_deviation", "gates", "two_qubit_gates"]
TROTTER_COLUMNS = ["graph", "t", "K", "error", "ratio"]


@dataclass
class ExperimentSpec:
    kind: str
    sizes: list[int] = field(default_factory=list)
    rhos: list[float] = field(default_factory=lambda: [1.0])
    boundary: str = "open"
    budget: float = 6000.0  # realizations per size = ceil(budget / N)
    cap: int | None = None
    seed: int = 0
    workers: int = 1
    require_connected: bool = True
    max_s: int = 8
    thetas_per_size: int = 20
    ks: list[int] = field(default_factory=lambda: [8, 16, 32, 64, 128, 256])
    times: list[float] = field(default_factory=lambda: [1.0, 2.0])
    out_dir: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        self.sizes = sorted(int(s) for s in self.sizes)
        BoundaryMode(self.boundary)


@dataclass
class RunManifest:
    version: str
    spec: dict
    seeds: list[dict] = field(default_factory=list)
    timing: dict = field(default_factory=dict)
    counters: dict = field(default_factory=dict)
    platform: str = field(default_factory=platform.platform)

    def write(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2)


def write_csv(path: str | Path, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def _out(spec: ExperimentSpec, name: str) -> Path | None:
    if spec.out_dir is None:
        return None
    d = Path(spec.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d / name


@dataclass(frozen=True)
class LinearFit:
    """``y = intercept + slope * x`` by least squares."""

    slope: float
    intercept: float
    r2: float


def linear_fit(x, y) -> LinearFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    ss_res = float(np.sum((y - intercept - slope * x) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return LinearFit(float(slope), float(intercept), 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0)


# --- tessellation scaling -------------------------------------------------------


def tessellation_realization(n: int, rho: float, seed: int, boundary: str) -> dict:
    g = generate_rgg(n, rho, boundary, seed)
    cover = tessellate(g)
    st = cover_stats(cover)
    ds = degree_stats(g)
    return {
        "N": n, "rho": rho, "seed": seed, "T": cover.t_count,
        "max_clique_size": st.max_clique_size, "m": ds.edge_count,
        "mean_degree": ds.mean_degree, "checks": cover.checks, "writes": cover.writes,
    }


@dataclass
class TessellationScaling:
    rows: list[dict]
    summary: list[dict]
    fits: dict[float, LinearFit]
    manifest: RunManifest

    def mean_T(self, n: int, rho: float) -> float:
        return next(r["mean_T"] for r in self.summary if r["N"] == n and r["rho"] == rho)


def _tessellation_seeds(spec: ExperimentSpec, n: int, rho: float) -> list[tuple[int, tuple[int, ...]]]:
    k = realizations_for(n, spec.budget, spec.cap)
    if not spec.require_connected:
        return [(spec.seed + i, ()) for i in range(k)]
    out, next_seed = [], spec.seed
    for _ in range(k):
        _, used, rejected = connected_rgg(n, rho, spec.boundary, next_seed)
        out.append((used, tuple(rejected)))
        next_seed = used + 1
    return out


def run_tessellation_scaling(spec: ExperimentSpec) -> TessellationScaling:
    """Mean tessellation count per (N, rho) and a fit of mean T against ln N."""
    if spec.kind != "tessellation":
        raise ValueError("spec.kind must be 'tessellation'")
    t0 = time.perf_counter()
    manifest = RunManifest(__version__, asdict(spec))
    jobs = []
    for rho in spec.rhos:
        for n in spec.sizes:
            for s, rejected in _tessellation_seeds(spec, n, rho):
                jobs.append((n, rho, s, spec.boundary))
                manifest.seeds.append({"N": n, "rho": rho, "seed": s, "rejected": list(rejected)})
    rows = map_jobs(tessellation_realization, jobs, spec.workers)

    summary, fits = [], {}
    for rho in spec.rhos:
        means = []
        for n in spec.sizes:
            sel = [r for r in rows if r["N"] == n and r["rho"] == rho]
            agg = aggregate_stats([cover_stats_from_row(r) for r in sel])
            summary.append({
                "N": n, "rho": rho, "realizations": agg.realizations, "mean_T": agg.T,
                "sem_T": agg.T_sem, "mean_checks": float(np.mean([r["checks"] for r in sel])),
            })
            means.append(agg.T)
        if len(spec.sizes) >= 2:
            fits[rho] = linear_fit(np.log(spec.sizes), means)

    manifest.timing["seconds"] = time.perf_counter() - t0
    manifest.counters["realizations"] = len(rows)
    manifest.counters["rejected_seeds"] = sum(len(s["rejected"]) for s in manifest.seeds)
    manifest.counters["fits"] = {str(k): asdict(v) for k, v in fits.items()}
    if (p := _out(spec, "tessellation.csv")) is not None:
        write_csv(p, TESSELLATION_COLUMNS, rows)
        write_csv(_out(spec, "tessellation_summary.csv"), TESSELLATION_SUMMARY_COLUMNS, summary)
        manifest.write(_out(spec, "manifest.json"))
    return TessellationScaling(rows, summary, fits, manifest)


def cover_stats_from_row(row: dict) -> CoverStats:
    return CoverStats(T=row["T"], max_clique_size=row["max_clique_size"])


def checks_exponent(result: TessellationScaling, rho: float) -> float:
    """Log-log slope of mean colourability checks against N."""
    pts = [(r["N"], r["mean_checks"]) for r in result.summary if r["rho"] == rho]
    n, c = zip(*pts)
    return linear_fit(np.log(n), np.log(c)).slope


# --- search scaling -------------------------------------------------------------


def run_search_scaling(spec: ExperimentSpec):
    """Search time against N at one rho; returns ``(SearchScaling, manifest)``."""
    if spec.kind != "search":
        raise ValueError("spec.kind must be 'search'")
    if len(spec.rhos) != 1:
        raise ValueError("search scaling runs at a single rho")
    rho = spec.rhos[0]
    t0 = time.perf_counter()
    manifest = RunManifest(__version__, asdict(spec))
    plan = assign_seeds(spec.sizes, rho, spec.budget, spec.cap, spec.seed, spec.boundary)
    jobs = [(n, rho, s, spec.boundary) for n, s, _ in plan]
    rows = map_jobs(search_realization, jobs, spec.workers)
    rows = [
        SearchRow(**{**r.__dict__, "rejected_seeds": rej}) for r, (_, _, rej) in zip(rows, plan)
    ]
    for n, s, rej in plan:
        manifest.seeds.append({"N": n, "rho": rho, "seed": s, "rejected": list(rej)})
    result = summarize_search(rows)
    manifest.timing["seconds"] = time.perf_counter() - t0
    manifest.counters["realizations"] = len(rows)
    manifest.counters["unsaturated"] = sum(not r.saturated for r in rows)
    manifest.counters["fit"] = asdict(result.fit)
    if (p := _out(spec, "search.csv")) is not None:
        write_csv(p, SEARCH_COLUMNS, [search_row_dict(r) for r in rows])
        manifest.write(_out(spec, "manifest.json"))
    return result, manifest


def search_row_dict(r: SearchRow) -> dict:
    d = {k: getattr(r, k) for k in SEARCH_COLUMNS if k != "tessellation_steps"}
    d["tessellation_steps"] = r.tessellation_steps
    return d


def replay_search_row(manifest: dict, row: dict) -> SearchRow:
    """Recompute one search row from the manifest spec and the row's seed."""
    spec = manifest["spec"]
    return search_realization(int(row["N"]), spec["rhos"][0], int(row["seed"]), spec["boundary"])


# --- compile / verify -------------------------------------------------------------


@dataclass
class CompileReport:
    rows: list[dict]
    max_deviation: float
    failures: list[tuple[int, float]]

    @property
    def ok(self) -> bool:
        return not self.failures


def run_compile_verify(spec: ExperimentSpec, tol: float = 1e-9) -> CompileReport:
    """Dense equivalence sweep over clique sizes ``1..max_s`` and random angles."""
    if spec.kind != "compile":
        raise ValueError("spec.kind must be 'compile'")
    if spec.max_s > MAX_DENSE_QUBITS:
        raise ResourceLimitError(
            f"clique size {MAX_DENSE_QUBITS + 1} exceeds the dense verification limit {MAX_DENSE_QUBITS}"
        )
    rng = np.random.default_rng(spec.seed)
    rows, failures = [], []
    for s in range(1, spec.max_s + 1):
        # theta in (0, pi]
        for theta in math.pi * (1.0 - rng.random(spec.thetas_per_size)):
            sched = compile_clique(range(s), float(theta))
            eq = verify_clique_equivalence(list(range(s)), float(theta), tol, sched)
            rows.append({
                "s": s, "theta": float(theta), "ok": eq.ok, "max_deviation": eq.max_deviation,
                "gates": len(sched), "two_qubit_gates": sched.two_qubit_count(),
            })
            if not eq.ok:
                failures.append((s, float(theta)))
    if (p := _out(spec, "compile.csv")) is not None:
        write_csv(p, COMPILE_COLUMNS, rows)
        RunManifest(__version__, asdict(spec), counters={"failures": failures}).write(_out(spec, "manifest.json"))
    return CompileReport(rows, max(r["max_deviation"] for r in rows), failures)


# --- Trotter baseline -------------------------------------------------------------


def matching_graph(pairs: int) -> SpatialGraph:
    return SpatialGraph.from_edges(2 * pairs, [(2 * i, 2 * i + 1) for i in range(pairs)])


def trotter_graphs(seed: int = 0) -> dict[str, SpatialGraph]:
    rgg, _, _ = connected_rgg(16, 2.0, "open", seed)
    return {"path3": path_graph(3), "rgg16": rgg, "matching6": matching_graph(3)}


def trotter_table(g: SpatialGraph, ks, t: float, gamma: float = 1.0, start: int = 0) -> list[dict]:
    rows, prev = [], None
    psi0 = basis_state(g.n, start)
    for k in ks:
        err = trotter_error(g, CtqwParams(gamma=gamma, t=t, K=int(k)), psi0)
        ratio = err / prev if prev else None
        rows.append({"t": t, "K": int(k), "error": err, "ratio": ratio})
        prev = err
    return rows


def run_trotter_scaling(spec: ExperimentSpec) -> list[dict]:
    """Trotter error tables under K doubling on a fixed set of small graphs."""
    if spec.kind != "trotter":
        raise ValueError("spec.kind must be 'trotter'")
    rows = []
    for name, g in trotter_graphs(spec.seed).items():
        for t in spec.times:
            for r in trotter_table(g, spec.ks, t):
                rows.append({"graph": name, **r})
    if (p := _out(spec, "trotter.csv")) is not None:
        write_csv(p, TROTTER_COLUMNS, rows)
        RunManifest(__version__, asdict(spec)).write(_out(spec, "manifest.json"))
    return rows
