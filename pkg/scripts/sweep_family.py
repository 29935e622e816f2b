"""Sweep the two-parameter family and record the solved moduli and fluxes.

Usage:
    python scripts/sweep_family.py [--t-min 0.005 --t-max 0.04 --n-t 8]
                                   [--X-max 0.02 --n-X 3]
                                   [--output sweep.csv]
"""
import argparse
import sys

import numpy as np

from saddle_forge.periods import sweep_family, write_sweep_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t-min", type=float, default=0.005)
    ap.add_argument("--t-max", type=float, default=0.04)
    ap.add_argument("--n-t", type=int, default=8)
    ap.add_argument("--X-max", type=float, default=0.02)
    ap.add_argument("--n-X", type=int, default=3)
    ap.add_argument("--output", "-o", default="sweep.csv")
    args = ap.parse_args()

    t_grid = np.linspace(args.t_min, args.t_max, args.n_t)
    X_grid = np.linspace(0.0, args.X_max, args.n_X)
    rows = sweep_family(t_grid, X_grid, tol=1e-10)
    write_sweep_csv(rows, args.output)
    n_ok = sum(1 for (_, _, s) in rows if s is not None)
    print(f"{n_ok}/{len(rows)} solves converged -> {args.output}")
    for t, X, sol in rows:
        if sol is None:
            print(f"  t={t:.4f} X_offset={X:.4f}  FAILED")
        else:
            print(f"  t={t:.4f} X_offset={X:.4f}  a={sol.a:.8f} "
                  f"b={sol.b:.8f} y={sol.y:.8f} r={sol.report.r:.6f}")
    return 0 if n_ok == len(rows) else 2


if __name__ == "__main__":
    sys.exit(main())
