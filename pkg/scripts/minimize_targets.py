#!/usr/bin/env python3
"""Reproduce the three reference targets of the PPT linear minimizer.

Expected: identity -> 1, the swap operator -> 0, minus the maximally
entangled projector -> -1/2 (the PPT fidelity bound on two qubits).
"""

import argparse

import numpy as np

from modular_ppt.linalg import BipartiteShape
from modular_ppt.optim import PptSetSpec, min_trace_over_ppt


def swap_matrix() -> np.ndarray:
    m = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            m[i * 2 + j, j * 2 + i] = 1.0
    return m


def phi_plus_projector() -> np.ndarray:
    psi = np.zeros(4, dtype=complex)
    psi[0], psi[3] = 1 / np.sqrt(2), 1 / np.sqrt(2)
    return np.outer(psi, psi.conj())


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--iters", type=int, default=1500)
    parser.add_argument("--restarts", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    spec = PptSetSpec(BipartiteShape(2, 2))
    targets = [("identity", np.eye(4), 1.0),
               ("swap", swap_matrix(), 0.0),
               ("-phi_plus", -phi_plus_projector(), -0.5)]
    for name, h, expected in targets:
        value, _, trace = min_trace_over_ppt(h, spec, iters=args.iters,
                                             restarts=args.restarts, seed=args.seed)
        print(f"{name:10s} value {value: .8f}  expected {expected: .1f}  "
              f"error {abs(value - expected):.2e}  restart spread {trace.restart_spread:.2e}")


if __name__ == "__main__":
    main()
