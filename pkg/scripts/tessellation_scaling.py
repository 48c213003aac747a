"""Mean tessellation count against ln N for several radius factors."""

import argparse
import json
from dataclasses import asdict

from stagwalk.experiments import ExperimentSpec, checks_exponent, run_tessellation_scaling


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sizes", type=int, nargs="+", default=[32, 64, 128, 256, 512, 1024])
    p.add_argument("--rhos", type=float, nargs="+", default=[1.0, 2.0])
    p.add_argument("--boundary", default="open", choices=("open", "periodic"))
    p.add_argument("--budget", type=float, default=6000, help="realizations per size = ceil(budget/N)")
    p.add_argument("--allow-disconnected", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="results/tessellation")
    args = p.parse_args()

    spec = ExperimentSpec(
        "tessellation", sizes=args.sizes, rhos=args.rhos, boundary=args.boundary, budget=args.budget,
        seed=args.seed, workers=args.workers, require_connected=not args.allow_disconnected, out_dir=args.out,
    )
    res = run_tessellation_scaling(spec)
    for row in res.summary:
        print(f"N={row['N']:5d} rho={row['rho']:.1f} realizations={row['realizations']:4d} "
              f"T={row['mean_T']:.3f} +- {row['sem_T']:.3f}")
    for rho, fit in res.fits.items():
        print(f"rho={rho}: T = {fit.intercept:.3f} + {fit.slope:.3f} ln N  (R2={fit.r2:.4f}), "
              f"checks ~ N^{checks_exponent(res, rho):.3f}")
    print(json.dumps({str(k): asdict(v) for k, v in res.fits.items()}))


if __name__ == "__main__":
    main()
