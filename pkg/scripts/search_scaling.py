"""Search time against N on periodic random geometric graphs."""

import argparse

from stagwalk.experiments import ExperimentSpec, run_search_scaling


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256, 512])
    p.add_argument("--rho", type=float, default=2.0)
    p.add_argument("--budget", type=float, default=1e4)
    p.add_argument("--cap", type=int, default=50, help="max realizations per size (0 = no cap)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="results/search")
    args = p.parse_args()

    spec = ExperimentSpec(
        "search", sizes=args.sizes, rhos=[args.rho], boundary="periodic", budget=args.budget,
        cap=args.cap or None, seed=args.seed, workers=args.workers, out_dir=args.out,
    )
    res, manifest = run_search_scaling(spec)
    for n in spec.sizes:
        print(f"N={n:5d} search_time={res.mean_search_time[n]:7.2f} T={res.mean_T[n]:6.2f} "
              f"T*t={res.mean_tessellation_steps[n]:8.1f} amplification={res.mean_amplification[n]:7.1f}")
    print(f"exponent={res.fit.exponent:.3f} R2={res.fit.r2:.4f} "
          f"unsaturated={manifest.counters['unsaturated']} ({manifest.timing['seconds']:.0f}s)")


if __name__ == "__main__":
    main()
