"""Observed convergence orders under mesh refinement.

Runs the so3 report at h = 0.04, 0.02, 0.01 over a fixed point set and
prints each norm with its observed order log2(v(h) / v(h/2)).

Two behaviors are worth calling out.  On the exponential-chart frame all
defect norms decay at order 2 while the Riemann norm converges at order 2
toward the bi-invariant constant-curvature value.  The gauged-derivative
residual, however, does not decay at order 2 here: in three dimensions
every pushed bracket tensor is a metric-weighted cross product, so the
finite difference of the tensor field lies exactly in the range of the
algebraic coboundary, the homotopy inverts it exactly, and the residual
is pure rounding noise (it grows like 1/h instead of shrinking).  The
same study on so4 (run with --algebra so4) shows the residual decaying
at order 2, because in six dimensions the bracket tensor has components
the metric does not determine.
"""

import argparse
import math

import numpy as np

from liecheck import (
    Chart,
    bracket_field_from_frame,
    frame_field,
    load_algebra,
    residual_report,
    sample_chart,
)

LEVELS = [0.04, 0.02, 0.01]
COLUMNS = [
    ("tau", "norm_tau"),
    ("A", "norm_A"),
    ("DT", "norm_DT"),
    ("dDT", "norm_dDT"),
    ("nablaT", "norm_nablaT_residual"),
    ("skew", "norm_metric_skew"),
    ("riemann", "norm_riemann"),
]


def observed_order(a, b):
    if a <= 0.0 or b <= 0.0:
        return float("nan")
    return math.log2(a / b)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--algebra", default="so3")
    parser.add_argument("--frame", default="exp_chart")
    parser.add_argument("--samples", type=int, default=120)
    args = parser.parse_args()

    alg = load_algebra(args.algebra)
    rng = np.random.default_rng([7, 1])
    base = sample_chart(alg.dim, LEVELS[0], 0.4, args.samples, rng)
    frame = frame_field(alg, args.frame, seed=7)

    series = {key: [] for _, key in COLUMNS}
    for h in LEVELS:
        chart = Chart(points=base.points, h=h, radius=0.4)
        field = bracket_field_from_frame(alg, frame, chart)
        report = residual_report(field, workers=2)
        for _, key in COLUMNS:
            series[key].append(report.global_max[key])

    print(f"{args.algebra}, frame = {args.frame}, {args.samples} points")
    print(f"{'norm':<10}" + "".join(f"{f'h={h}':>13}" for h in LEVELS) + f"{'orders':>16}")
    for label, key in COLUMNS:
        vals = series[key]
        orders = [observed_order(a, b) for a, b in zip(vals, vals[1:])]
        row = "".join(f"{v:>13.3e}" for v in vals)
        otxt = ", ".join(f"{o:+.2f}" for o in orders)
        print(f"{label:<10}{row}  {otxt:>14}")

    r = series["norm_riemann"]
    diffs = [abs(a - b) for a, b in zip(r, r[1:])]
    if all(d > 0 for d in diffs):
        print(
            f"riemann order toward its limit: {observed_order(diffs[0], diffs[1]):+.2f}"
        )


if __name__ == "__main__":
    main()
