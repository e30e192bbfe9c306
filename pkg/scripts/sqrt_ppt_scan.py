#!/usr/bin/env python3
"""Scan the square-root question over several shapes and seeds.

For Dykstra-sampled PPT states D this tallies how often D^{1/2} is again
PPT, prints the always-true transpose control, and summarizes how far
(1 (x) U_B) is from acting as a partial transpose at the state level.
Tallies only; no claim is made either way.
"""

import argparse

from modular_ppt.constructions import sqrt_ppt_experiment
from modular_ppt.linalg import BipartiteShape


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=500)
    parser.add_argument("--seeds", type=int, default=3)
    parser.add_argument("--shapes", default="2x2,2x3,3x3")
    args = parser.parse_args()

    for text in args.shapes.split(","):
        a, b = (int(x) for x in text.lower().split("x"))
        shape = BipartiteShape(a, b)
        for seed in range(args.seeds):
            rep = sqrt_ppt_experiment(shape, samples=args.samples, seed=seed)
            frac = rep.counts["ppt_and_sqrt_npt"] / max(1, rep.samples)
            probe = rep.partial_transpose_probe
            print(f"{a}x{b} seed {seed}: {rep.counts}  "
                  f"sqrt-NPT fraction {frac:.3f}  control failures {rep.control_failures}  "
                  f"pt-probe residual [{probe['min_residual']:.2e}, {probe['max_residual']:.2e}]")


if __name__ == "__main__":
    main()
