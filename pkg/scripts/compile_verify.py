"""Dense check of compiled clique unitaries over sizes and random angles."""

import argparse
import sys

from stagwalk.experiments import ExperimentSpec, run_compile_verify


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--max-s", type=int, default=8)
    p.add_argument("--thetas", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results/compile")
    args = p.parse_args()

    spec = ExperimentSpec("compile", max_s=args.max_s, thetas_per_size=args.thetas, seed=args.seed,
                          out_dir=args.out)
    rep = run_compile_verify(spec, args.tol)
    for s in range(1, args.max_s + 1):
        sel = [r for r in rep.rows if r["s"] == s]
        worst = max(r["max_deviation"] for r in sel)
        print(f"s={s:2d} gates={sel[0]['gates']:3d} two_qubit={sel[0]['two_qubit_gates']:3d} max_dev={worst:.2e}")
    print("OK" if rep.ok else f"FAILED: {rep.failures}")
    sys.exit(0 if rep.ok else 1)


if __name__ == "__main__":
    main()
