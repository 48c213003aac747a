"""Command line interface: ``stagwalk <subcommand> ...``.

Exit codes: 0 success, 1 validation failure, 2 I/O error, 3 resource limit.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .circuit import MAX_DENSE_QUBITS, compile_walk, save_schedule, verify_clique_equivalence
from .experiments import (
    SEARCH_COLUMNS,
    ExperimentSpec,
    checks_exponent,
    run_compile_verify,
    run_search_scaling,
    run_tessellation_scaling,
    run_trotter_scaling,
    search_row_dict,
    write_csv,
)
from .graph import BoundaryMode, SpatialGraph, generate_rgg, load_graph, save_graph
from .search import (
    SearchConfig,
    default_horizon,
    default_theta_grid,
    first_maximum,
    marked_vertex,
    run_search,
    search_run,
    theta_scan,
)
from .tessellation import (
    Mode,
    complete_cover,
    cover_stats,
    load_cover,
    save_cover,
    tessellate,
    validate_cover,
)
from .walk import CtqwParams, ResourceLimitError, ctqw_exact, ctqw_trotter, parse_start, walk_step

log = logging.getLogger("stagwalk")

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_RESOURCE = 0, 1, 2, 3


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _theta_grid(text: str | None) -> np.ndarray:
    """``"63"`` for that many evenly spaced points, or a comma-separated list."""
    if text is None:
        return default_theta_grid()
    if "," not in text and "." not in text:
        return default_theta_grid(int(text))
    return np.array(_floats(text))


def _emit(args, payload: dict) -> None:
    text = json.dumps(payload, indent=2, default=float)
    if args.out and args.command not in ("rgg", "tessellate", "compile", "experiment"):
        Path(args.out).write_text(text + "\n")
    else:
        print(text)


def write_state_csv(path, states: list[np.ndarray]) -> None:
    """Rows ``step, vertex, re, im, probability`` for each recorded state."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "vertex", "re", "im", "probability"])
        for step, psi in enumerate(states):
            for v, a in enumerate(psi):
                w.writerow([step, v, a.real, a.imag, abs(a) ** 2])


def _graph_and_cover(args):
    g = load_graph(args.graph)
    if getattr(args, "cover", None):
        cover = load_cover(args.cover)
        report = validate_cover(g, cover)
        if report:
            raise ValueError(f"cover does not match graph: {report.summary()}")
    else:
        cover = tessellate(g)
    return g, complete_cover(g, cover)


# --- subcommands -------------------------------------------------------------------


def cmd_rgg(args) -> int:
    g = generate_rgg(args.n, args.rho, args.boundary, args.seed)
    if args.out:
        save_graph(g, args.out)
    else:
        print(json.dumps(g.to_dict()))
    return EXIT_OK


def cmd_tessellate(args) -> int:
    g = load_graph(args.graph)
    cover = tessellate(g, Mode(args.mode))
    report = validate_cover(g, cover)
    if args.out:
        save_cover(cover, args.out)
    if args.stats or not args.out:
        st = cover_stats(cover)
        print(json.dumps({
            "T": st.T, "max_clique_size": st.max_clique_size,
            "checks": cover.checks, "writes": cover.writes,
            "validation": report.summary(),
        }))
    return EXIT_INVALID if report else EXIT_OK


def cmd_walk(args) -> int:
    g, cover = _graph_and_cover(args)
    psi = parse_start(args.start, g.n)
    states = [psi]
    for _ in range(args.steps):
        psi = walk_step(psi, cover, args.theta)
        states.append(psi)
    if args.trace:
        write_state_csv(args.trace, states)
    _emit(args, {
        "n": g.n, "T": cover.t_count, "theta": args.theta, "steps": args.steps,
        "color_order": list(range(cover.t_count - 1, -1, -1)),
        "norm": float(np.linalg.norm(psi)),
        "probabilities": (np.abs(psi) ** 2).tolist(),
    })
    return EXIT_OK


def cmd_compile(args) -> int:
    cover = load_cover(args.cover)
    if not cover.is_complete():
        cover = complete_cover_from_n(cover)
    sched = compile_walk(cover, args.theta)
    if args.out:
        save_schedule(sched, args.out)
    if args.verify_max_s > MAX_DENSE_QUBITS:
        log.error("--verify-max-s %d exceeds dense limit %d", args.verify_max_s, MAX_DENSE_QUBITS)
        return EXIT_RESOURCE
    worst, failed, checked = 0.0, [], 0
    for c, per in enumerate(cover.cliques):
        for clique in per:
            if len(clique) > args.verify_max_s:
                continue
            eq = verify_clique_equivalence(list(clique), args.theta, args.tol)
            checked += 1
            worst = max(worst, eq.max_deviation)
            if not eq.ok:
                failed.append([c, list(clique)])
    print(json.dumps({
        "gates": len(sched), "two_qubit_gates": sched.two_qubit_count(),
        "layers": cover.t_count, "global_phase": sched.global_phase,
        "verified_cliques": checked, "max_deviation": worst, "failed": failed,
    }))
    return EXIT_INVALID if failed else EXIT_OK


def complete_cover_from_n(cover):
    return complete_cover(SpatialGraph.from_edges(cover.n, list(cover.edge_colors)), cover)


def cmd_ctqw(args) -> int:
    g = load_graph(args.graph)
    psi0 = parse_start(args.start, g.n)
    params = CtqwParams(gamma=args.gamma, t=args.t, K=args.K)
    exact = ctqw_exact(g, params, psi0)
    trot = ctqw_trotter(g, params, psi0)
    if args.trace:
        write_state_csv(args.trace, [exact, trot])
    _emit(args, {
        "n": g.n, "gamma": args.gamma, "t": args.t, "K": args.K,
        "two_body_factors": g.m * args.K,
        "trotter_error": float(np.linalg.norm(trot - exact)),
        "probabilities_exact": (np.abs(exact) ** 2).tolist(),
    })
    return EXIT_OK


def cmd_search(args) -> int:
    if args.action == "scale":
        spec = ExperimentSpec(
            kind="search", sizes=_ints(args.sizes), rhos=[args.rho], boundary=args.boundary,
            budget=args.budget, cap=args.realizations_per_size, seed=args.seed, workers=args.threads,
        )
        result, manifest = run_search_scaling(spec)
        rows = [search_row_dict(r) for r in result.rows]
        if args.out:
            write_csv(args.out, SEARCH_COLUMNS, rows)
            manifest.write(Path(args.out).with_suffix(".manifest.json"))
        summary = {"fit": asdict(result.fit), "mean_search_time": result.mean_search_time,
                   "mean_tessellation_steps": result.mean_tessellation_steps}
        if args.format == "json" or args.out:
            print(json.dumps(summary, default=float))
        else:
            w = csv.DictWriter(sys.stdout, fieldnames=SEARCH_COLUMNS)
            w.writeheader()
            w.writerows(rows)
        return EXIT_OK

    g, cover = _graph_and_cover(args)
    marked = args.marked if args.marked is not None else marked_vertex(args.seed, g.n)
    config = SearchConfig(
        marked=marked, thetas=_theta_grid(args.theta_grid),
        horizon=args.horizon or default_horizon(g.n), initial=args.start,
    )
    if args.action == "scan":
        theta_op, curve = theta_scan(g, cover, config)
        rows = [{"theta": float(t), "amplification": float(a) * g.n, "p_max": float(a)}
                for t, a in zip(config.thetas, curve)]
        if args.out:
            write_csv(args.out, ["theta", "p_max", "amplification"], rows)
        print(json.dumps({"theta_op": theta_op, "marked": marked, "T": cover.t_count}))
        return EXIT_OK

    if args.theta is None:
        res = run_search(g, cover, config)
        theta = res.theta_op
    else:
        theta = args.theta
    trace = search_run(g, cover, config, theta)
    t, saturated = first_maximum(trace)
    if args.out:
        write_csv(args.out, ["step", "p"], [{"step": i, "p": float(p)} for i, p in enumerate(trace.p)])
    print(json.dumps({
        "N": g.n, "T": cover.t_count, "marked": marked, "theta": theta, "search_time": t,
        "p_max": float(trace.p[t]), "amplification": float(trace.p[t]) * g.n, "saturated": saturated,
    }))
    return EXIT_OK


def cmd_experiment(args) -> int:
    kind = args.kind
    spec = ExperimentSpec(
        kind=kind,
        sizes=_ints(args.sizes) if args.sizes else [],
        rhos=_floats(args.rho) if args.rho else [1.0 if kind == "tessellation" else 2.0],
        boundary=args.boundary or ("periodic" if kind == "search" else "open"),
        budget=args.budget if args.budget is not None else (1e4 if kind == "search" else 6000.0),
        cap=args.realizations_per_size,
        seed=args.seed,
        workers=args.threads,
        max_s=args.max_s,
        out_dir=args.out,
    )
    if kind == "tessellation":
        if not spec.sizes:
            spec.sizes = [32, 64, 128, 256, 512, 1024, 2048]
        res = run_tessellation_scaling(spec)
        print(json.dumps({
            "fits": {str(k): asdict(v) for k, v in res.fits.items()},
            "summary": res.summary,
            "checks_exponent": {str(r): checks_exponent(res, r) for r in spec.rhos},
        }, default=float))
    elif kind == "search":
        if not spec.sizes:
            spec.sizes = [64, 128, 256, 512]
        res, _ = run_search_scaling(spec)
        print(json.dumps({"fit": asdict(res.fit), "mean_search_time": res.mean_search_time,
                          "mean_tessellation_steps": res.mean_tessellation_steps,
                          "mean_amplification": res.mean_amplification}, default=float))
    elif kind == "compile":
        rep = run_compile_verify(spec)
        print(json.dumps({"ok": rep.ok, "max_deviation": rep.max_deviation, "failures": rep.failures,
                          "gates_per_s": {r["s"]: r["gates"] for r in rep.rows}}))
        return EXIT_OK if rep.ok else EXIT_INVALID
    else:
        rows = run_trotter_scaling(spec)
        print(json.dumps(rows, default=float))
    return EXIT_OK


# --- parser --------------------------------------------------------------------------


def _global_flags(p: argparse.ArgumentParser, defaults: bool) -> None:
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=d(0))
    p.add_argument("--threads", type=int, default=d(1), help="worker processes for ensembles")
    p.add_argument("--out", default=d(None))
    p.add_argument("--format", choices=("csv", "json"), default=d("json"))
    p.add_argument("-v", "--verbose", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted before or after the subcommand; the copy on the
    # subparsers suppresses defaults so it cannot clobber a top-level value
    p = argparse.ArgumentParser(prog="stagwalk", description=__doc__.splitlines()[0])
    _global_flags(p, defaults=True)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, defaults=False)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("rgg", parents=[common], help="generate a random geometric graph")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--rho", type=float, default=2.0, help="radius in units of the critical radius")
    s.add_argument("--boundary", choices=[b.value for b in BoundaryMode], default="open")
    s.set_defaults(func=cmd_rgg)

    s = sub.add_parser("tessellate", parents=[common], help="build a tessellation cover")
    s.add_argument("--graph", required=True)
    s.add_argument("--mode", choices=[m.value for m in Mode], default="strict")
    s.add_argument("--stats", action="store_true")
    s.set_defaults(func=cmd_tessellate)

    s = sub.add_parser("walk", parents=[common], help="evolve a generalized staggered walk")
    s.add_argument("--graph", required=True)
    s.add_argument("--cover")
    s.add_argument("--theta", type=float, default=math.pi / 2)
    s.add_argument("--steps", type=int, default=1)
    s.add_argument("--start", default="uniform", help="uniform | vertex:<k>")
    s.add_argument("--trace", help="CSV of every state (step, vertex, re, im, probability)")
    s.set_defaults(func=cmd_walk)

    s = sub.add_parser("compile", parents=[common], help="compile a cover to a gate schedule")
    s.add_argument("--cover", required=True)
    s.add_argument("--theta", type=float, default=math.pi / 2)
    s.add_argument("--verify-max-s", type=int, default=8)
    s.add_argument("--tol", type=float, default=1e-9)
    s.set_defaults(func=cmd_compile)

    s = sub.add_parser("ctqw", parents=[common], help="continuous-time walk, exact vs Trotter")
    s.add_argument("--graph", required=True)
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--K", type=int, default=64)
    s.add_argument("--start", default="vertex:0")
    s.add_argument("--trace")
    s.set_defaults(func=cmd_ctqw)

    s = sub.add_parser("search", parents=[common], help="spatial search")
    s.add_argument("action", choices=("scan", "run", "scale"))
    s.add_argument("--graph")
    s.add_argument("--cover")
    s.add_argument("--marked", type=int)
    s.add_argument("--theta", type=float)
    s.add_argument("--theta-grid", help="point count or comma-separated angles")
    s.add_argument("--horizon", type=int)
    s.add_argument("--start", default="uniform")
    s.add_argument("--sizes", default="64,128,256,512")
    s.add_argument("--rho", type=float, default=2.0)
    s.add_argument("--boundary", choices=[b.value for b in BoundaryMode], default="periodic")
    s.add_argument("--budget", type=float, default=1e4, help="realizations per size = ceil(budget/N)")
    s.add_argument("--realizations-per-size", type=int, help="cap on realizations per size")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("experiment", parents=[common], help="run a scaling experiment")
    s.add_argument("kind", choices=("tessellation", "search", "compile", "trotter"))
    s.add_argument("--sizes")
    s.add_argument("--rho", help="comma-separated radius factors")
    s.add_argument("--boundary", choices=[b.value for b in BoundaryMode])
    s.add_argument("--budget", type=float)
    s.add_argument("--realizations-per-size", type=int)
    s.add_argument("--max-s", type=int, default=8)
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "search" and args.action != "scale" and not args.graph:
        log.error("search %s needs --graph", args.action)
        return EXIT_INVALID
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        log.error("%s", exc)
        return EXIT_RESOURCE
    except (OSError, json.JSONDecodeError) as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO
    except ValueError as exc:
        log.error("invalid input: %s", exc)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
