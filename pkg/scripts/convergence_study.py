#!/usr/bin/env python3
"""Self-convergence study: distances at the final time between runs at
consecutive particle counts, printed as a table."""
import argparse

from aggdiff import (constant_datum, gaussian_kernel, make_spec,
                     porous_medium_diffusion, saturating_velocity,
                     self_convergence)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--epsilon", type=float, default=1.0)
    parser.add_argument("--t-final", type=float, default=1.0)
    parser.add_argument("--n", type=int, nargs="+", default=[50, 100, 200, 400])
    args = parser.parse_args()

    datum = constant_datum(0.7, 1.0)
    spec = make_spec(porous_medium_diffusion(args.epsilon),
                     saturating_velocity(1.0), gaussian_kernel(1.0), datum)
    table = self_convergence(spec, datum, args.n, args.t_final,
                             max_step=args.t_final / 100.0)
    print(f"{'N':>6} {'2N':>6} {'L1 distance':>14} {'W1 distance':>14}")
    for coarse, fine, l1, w1 in table.rows():
        print(f"{coarse:>6} {fine:>6} {l1:>14.6e} {w1:>14.6e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
