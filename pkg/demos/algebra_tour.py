"""Tour of the bundled Lie algebra catalog.

For each algebra: check the bracket axioms numerically, print the Killing
form signature and classification, and (for the semisimple ones) verify
that the canonical dual basis diagonalizes the pairing to machine
precision.
"""

import numpy as np

from liecheck import (
    classify,
    dual_basis,
    jacobi_residual,
    killing_metric,
    load_algebra,
)

NAMES = ["so3", "su2", "sl2r", "heisenberg3", "abelian(4)", "so4"]


def main():
    print(f"{'algebra':<14}{'dim':>4}{'jacobi':>12}{'signature':>12}  class")
    for name in NAMES:
        alg = load_algebra(name)
        metric = killing_metric(alg)
        info = classify(alg)
        sig = f"({metric.signature[0]},{metric.signature[1]})"
        if info.semisimple:
            label = "semisimple" + (" compact" if info.compact_type else "")
        else:
            label = "degenerate killing form"
        print(f"{name:<14}{alg.dim:>4}{jacobi_residual(alg):>12.2e}{sig:>12}  {label}")

    print()
    print("dual basis checks (semisimple algebras)")
    for name in ["so3", "su2", "sl2r", "so4"]:
        alg = load_algebra(name)
        g = killing_metric(alg).gram
        pair = dual_basis(alg)
        pairing = np.max(np.abs(pair.primal.T @ g @ pair.dual - np.eye(alg.dim)))
        complete = np.max(np.abs(pair.primal @ pair.dual.T - np.linalg.inv(g)))
        print(f"  {name:<12} pairing {pairing:.2e}   completeness {complete:.2e}")

    print()
    print("so3 structure constants (output slot first):")
    print(load_algebra("so3").constants)


if __name__ == "__main__":
    main()
