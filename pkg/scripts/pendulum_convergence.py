"""RK4 order check on the circulating pendulum branch.

Halves the step repeatedly and reports the drift of alpha'^2 + k^2 sin^2 alpha
over a fixed range together with successive drift ratios (16 for fourth order).
"""

import argparse
import sys

import numpy as np

from infharm.reductions import cylinder_pendulum


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--C", type=float, default=2.0)
    ap.add_argument("--s-max", type=float, default=10.0)
    ap.add_argument("--steps", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.025, 0.0125])
    args = ap.parse_args()

    prev = None
    print(f"{'step':>8s} {'drift':>12s} {'ratio':>8s}")
    for h in args.steps:
        sol = cylinder_pendulum(args.k, args.C, 0.0, s_max=args.s_max, step=h)
        drift = float(np.max(sol.invariant_residual()))
        ratio = f"{prev / drift:8.1f}" if prev else " " * 8
        print(f"{h:8.4f} {drift:12.3e} {ratio}")
        prev = drift
    fine = cylinder_pendulum(args.k, args.C, step=1e-4)
    print(f"period at step 1e-4: {fine.period:.10f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
