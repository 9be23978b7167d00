"""Command line front end: verify, cohomology, field, converge.

Exit codes: 0 success, 2 usage or spec parse failure, 3 algebraic
precondition failure (degenerate Killing metric), 4 numerical conditioning
failure (singular frame, near-singular metric, series radius exceeded).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import cohomology as coh
from .algebra import classify, dual_basis, jacobi_residual, killing_metric, load_algebra
from .errors import AlgebraSpecError, ConditioningError, DegenerateKillingError
from .fields import (
    Chart,
    bracket_field_from_frame,
    frame_field,
    residual_report,
    sample_chart,
    FRAME_KINDS,
)

COCYCLE_BATCH = 100


@dataclass
class RunConfig:
    command: str
    algebra: str | None = None
    spec_path: str | None = None
    frame: str = "exp_chart"
    h: float = 0.02
    radius: float = 0.4
    samples: int = 200
    seed: int = 0
    levels: int = 3
    out: str | None = None
    workers: int = 1

    def validate(self):
        if (self.algebra is None) == (self.spec_path is None):
            raise AlgebraSpecError("give exactly one of --algebra or --spec")
        if self.command in ("field", "converge"):
            if not self.h > 0:
                raise AlgebraSpecError("--h must be positive")
            if not self.radius > self.h:
                raise AlgebraSpecError("--radius must exceed --h")
            if self.samples < 1:
                raise AlgebraSpecError("--samples must be >= 1")
            if self.workers < 1:
                raise AlgebraSpecError("--workers must be >= 1")
        if self.command == "converge" and not 2 <= self.levels <= 4:
            raise AlgebraSpecError("--levels must be between 2 and 4")

    def load(self):
        if self.spec_path is not None:
            try:
                with open(self.spec_path) as fh:
                    doc = json.load(fh)
            except OSError as exc:
                raise AlgebraSpecError(f"cannot read spec file: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise AlgebraSpecError(f"spec file is not valid JSON: {exc}") from exc
            return load_algebra(doc)
        return load_algebra(self.algebra)


def run_algebra_verify(config: RunConfig) -> dict:
    alg = config.load()
    cls = classify(alg)
    doc = {
        "algebra": alg.name or "custom",
        "dim": alg.dim,
        "jacobi_residual": jacobi_residual(alg),
        "killing_signature": list(cls.signature),
        "semisimple": cls.semisimple,
        "compact_type": cls.compact_type,
        "dual_basis_pairing_error": None,
    }
    if cls.semisimple:
        pair = dual_basis(alg)
        g = killing_metric(alg).gram
        err = np.max(np.abs(pair.primal.T @ g @ pair.dual - np.eye(alg.dim)))
        doc["dual_basis_pairing_error"] = float(err)
    return doc


def run_cohomology(config: RunConfig) -> dict:
    alg = config.load()
    h0, h1, h2 = coh.cohomology_dims(alg)
    cls = classify(alg)
    doc = {
        "algebra": alg.name or "custom",
        "dim": alg.dim,
        "h0": h0,
        "h1": h1,
        "h2": h2,
        "semisimple": cls.semisimple,
    }
    if cls.semisimple:
        rng = np.random.default_rng(config.seed)
        worst_round, worst_coclosed = 0.0, 0.0
        for _ in range(COCYCLE_BATCH):
            omega = coh.coboundary(alg, coh.random_cochain(alg, 1, rng))
            scale = float(np.max(np.abs(omega.data)))
            prim = coh.homotopy(alg, omega)
            back = coh.coboundary(alg, prim)
            worst_round = max(
                worst_round, float(np.max(np.abs(back.data - omega.data))) / scale
            )
            down = coh.codifferential(alg, prim)
            worst_coclosed = max(
                worst_coclosed, float(np.max(np.abs(down.data))) / scale
            )
        doc["cocycles"] = COCYCLE_BATCH
        doc["homotopy_max_relative_error"] = worst_round
        doc["coclosedness_max_error"] = worst_coclosed
    return doc


def _build_report(config: RunConfig, h: float, points=None):
    alg = config.load()
    if not classify(alg).semisimple:
        raise DegenerateKillingError(
            "field diagnostics need a semisimple algebra (nondegenerate metric)"
        )
    frame = frame_field(alg, config.frame, seed=config.seed)
    if points is None:
        rng = np.random.default_rng([config.seed, 1])
        chart = sample_chart(alg.dim, h, config.radius, config.samples, rng)
    else:
        chart = Chart(points=points, h=h, radius=config.radius)
    fld = bracket_field_from_frame(alg, frame, chart)
    return residual_report(fld, chart, workers=config.workers), chart


def run_field_check(config: RunConfig) -> dict:
    report, _ = _build_report(config, config.h)
    out = config.out or "diagnostics.csv"
    report.to_csv(out)
    return {
        "algebra": config.algebra or config.spec_path,
        "frame": config.frame,
        "h": config.h,
        "radius": config.radius,
        "samples": config.samples,
        "reported_points": int(report.point_ids.shape[0]),
        "seed": config.seed,
        "csv": out,
        "global_max": report.global_max,
    }


def run_convergence(config: RunConfig) -> dict:
    steps = [config.h / 2**level for level in range(config.levels)]
    # One fixed point set for all levels, drawn inside radius - 2 * base h.
    rng = np.random.default_rng([config.seed, 1])
    base = sample_chart(
        config.load().dim, config.h, config.radius, config.samples, rng
    )
    norms = None
    for h in steps:
        report, _ = _build_report(config, h, points=base.points)
        if norms is None:
            norms = {k: [] for k in report.global_max}
        for k, v in report.global_max.items():
            norms[k].append(v)
    orders = {k: _observed_orders(v) for k, v in norms.items()}
    return {
        "algebra": config.algebra or config.spec_path,
        "frame": config.frame,
        "radius": config.radius,
        "samples": config.samples,
        "seed": config.seed,
        "h_levels": steps,
        "norms": norms,
        "orders": orders,
    }


def _observed_orders(values):
    """log2(norm(h) / norm(h/2)) per refinement, 'exact' when both vanish."""
    out = []
    for a, b in zip(values, values[1:]):
        if a == 0.0 and b == 0.0:
            out.append("exact")
        elif a == 0.0 or b == 0.0:
            out.append("undefined")
        else:
            out.append(math.log2(a / b))
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liecheck",
        description="Structure-constant checks, cohomology dimensions, and "
        "finite-difference diagnostics of bracket fields.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_source(p):
        p.add_argument("--algebra", help="named algebra (so3, su2, sl2r, ...)")
        p.add_argument("--spec", dest="spec_path", help="path to a JSON constants document")
        p.add_argument("--out", help="write the JSON document (or CSV for field) here")

    p = sub.add_parser("verify", help="algebraic identities and classification")
    add_source(p)

    p = sub.add_parser("cohomology", help="cohomology dimensions and homotopy checks")
    add_source(p)
    p.add_argument("--seed", type=int, default=0)

    for name in ("field", "converge"):
        p = sub.add_parser(
            name,
            help="field diagnostics report" if name == "field" else "refinement study",
        )
        add_source(p)
        p.add_argument("--frame", choices=FRAME_KINDS, default="exp_chart")
        p.add_argument("--h", type=float, default=0.02)
        p.add_argument("--radius", type=float, default=0.4)
        p.add_argument("--samples", type=int, default=200)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)
        if name == "converge":
            p.add_argument("--levels", type=int, default=3)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = RunConfig(**vars(args))
    try:
        config.validate()
        if config.command == "verify":
            doc = run_algebra_verify(config)
        elif config.command == "cohomology":
            doc = run_cohomology(config)
        elif config.command == "field":
            doc = run_field_check(config)
        else:
            doc = run_convergence(config)
    except AlgebraSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DegenerateKillingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConditioningError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    text = json.dumps(doc, indent=2, sort_keys=True)
    print(text)
    if config.out and config.command != "field":
        with open(config.out, "w", newline="") as fh:
            fh.write(text + "\n")
    return 0


def entrypoint():
    sys.exit(main())
