"""Trotter error of the continuous-time walk under K doubling."""

import argparse

from stagwalk.experiments import ExperimentSpec, run_trotter_scaling


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--ks", type=int, nargs="+", default=[8, 16, 32, 64, 128, 256])
    p.add_argument("--times", type=float, nargs="+", default=[0.25, 0.5, 1.0, 2.0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results/trotter")
    args = p.parse_args()

    rows = run_trotter_scaling(ExperimentSpec("trotter", ks=args.ks, times=args.times, seed=args.seed,
                                              out_dir=args.out))
    for r in rows:
        ratio = "" if r["ratio"] is None else f"{r['ratio']:.4f}"
        print(f"{r['graph']:10s} t={r['t']:<5} K={r['K']:<4d} error={r['error']:.3e} {ratio}")


if __name__ == "__main__":
    main()
