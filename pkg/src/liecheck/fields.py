"""Bracket fields over coordinate charts and their finite-difference diagnostics.

A frame u(x) pushes the reference structure constants to a point-dependent
bracket tensor T[c,a,b](x); the Killing construction applied pointwise gives a
metric, whose Levi-Civita connection D is discretized with second-order
central differences on a per-point stencil.  The diagnostics measure the
covariant derivative of T, its cyclic sum, the induced gauge field and its
torsion and metric skewness, the parallelism defect of the corrected
connection, and the Riemann curvature.

Derivative convention: all difference quotients use the same step h and the
stencil {0, +-h e_i, +-h e_i +- h e_j}, so discrete identities that hold for
any linear difference operator (such as metric compatibility of the discrete
Christoffels) hold here to machine precision.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .algebra import LieAlgebra, classify
from .errors import ConditioningError, DegenerateKillingError

FRAME_KINDS = ("identity", "scaled", "exp_chart", "random_smooth")

FRAME_COND_MAX = 1e6
METRIC_COND_MAX = 1e8
POINTWISE_JACOBI_TOL = 1e-10

# exp_chart series controls.
SERIES_TERM_TOL = 1e-14
SERIES_MAX_TERMS = 30
# Safety bound: sum_i |x_i| * ||ad_i||_2 must stay below this at every
# evaluation point, keeping ad_x well away from the first nonzero root of
# 1 - exp(-z) where the transfer matrix would lose invertibility.
SERIES_SAFE_SPECTRAL = np.pi

_DERIVATION_RTOL = 1e-6
_RESAMPLE_CAP = 50

CSV_NORM_COLUMNS = (
    "norm_tau",
    "norm_A",
    "norm_DT",
    "norm_dDT",
    "norm_nablaT_residual",
    "norm_metric_skew",
    "norm_riemann",
)


def stencil_offsets(n: int) -> np.ndarray:
    """Integer stencil offsets (units of h): {0, +-e_i, +-2e_i, +-e_i +- e_j}."""
    rows = [np.zeros(n, dtype=int)]
    for i in range(n):
        for s in (1, -1):
            e = np.zeros(n, dtype=int)
            e[i] = s
            rows.append(e)
    for i in range(n):
        for s in (2, -2):
            e = np.zeros(n, dtype=int)
            e[i] = s
            rows.append(e)
    for i, j in itertools.combinations(range(n), 2):
        for si in (1, -1):
            for sj in (1, -1):
                e = np.zeros(n, dtype=int)
                e[i], e[j] = si, sj
                rows.append(e)
    return np.array(rows)


@dataclass(frozen=True)
class Chart:
    """Sample points in the ball ||x||_inf <= radius with a difference step h.

    Every sample point carries the full stencil, so all evaluation points stay
    within radius + 2h.  Only points with ||x||_inf <= radius - 2h (stencil
    fully inside the chart) enter diagnostic reports.
    """

    points: np.ndarray
    h: float
    radius: float

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("points must be a nonempty (s, n) array")
        if not (self.h > 0):
            raise ValueError("h must be positive")
        if not (self.radius > 0):
            raise ValueError("radius must be positive")
        n = pts.shape[1]
        if not self.h * n < self.radius:
            raise ValueError("need h * dim < radius for a meaningful stencil")
        if np.max(np.abs(pts)) > self.radius + 1e-12 * max(1.0, self.radius):
            raise ValueError("sample points must lie within the chart radius")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def stencil(self) -> np.ndarray:
        return stencil_offsets(self.dim)

    def reported_mask(self) -> np.ndarray:
        """Points whose full stencil stays inside the radius ball."""
        bound = self.radius - 2.0 * self.h
        slop = 1e-12 * max(1.0, self.radius)
        return np.max(np.abs(self.points), axis=1) <= bound + slop


def sample_chart(
    dim: int, h: float, radius: float, count: int, rng: np.random.Generator
) -> Chart:
    """Uniform sample points in the inf-ball of radius (radius - 2h)."""
    if count < 1:
        raise ValueError("need at least one sample point")
    inner = radius - 2.0 * h
    if inner <= 0:
        raise ValueError("radius must exceed 2h to leave room for the stencil")
    pts = rng.uniform(-inner, inner, size=(count, dim))
    return Chart(points=pts, h=h, radius=radius)


# --- frames -----------------------------------------------------------------


def _phi_matrix(m: np.ndarray) -> np.ndarray:
    """Series for phi(z) = (1 - exp(-z))/z at a matrix argument, batched.

    Sums sum_{k>=0} (-m)^k / (k+1)! until the largest term in the batch drops
    below SERIES_TERM_TOL, capped at SERIES_MAX_TERMS terms.
    """
    single = m.ndim == 2
    if single:
        m = m[None]
    n = m.shape[-1]
    term = np.broadcast_to(np.eye(n), m.shape).copy()
    total = term.copy()
    for k in range(1, SERIES_MAX_TERMS):
        term = -(term @ m) / (k + 1.0)
        total += term
        if np.max(np.abs(term)) < SERIES_TERM_TOL:
            break
    else:
        raise ConditioningError(
            "exp_chart series did not settle within the term cap; reduce the radius"
        )
    return total[0] if single else total


def _derivation_nullspace(alg: LieAlgebra) -> np.ndarray:
    """Orthonormal basis (columns) of the derivation algebra inside gl(n)."""
    n = alg.dim
    c = alg.constants
    eye = np.eye(n)
    # L maps vec(S) to the defect S[c,m]C[m,a,b] - C[c,m,b]S[m,a] - C[c,a,m]S[m,b].
    lmap = (
        np.einsum("cp,qab->cabpq", eye, c)
        - np.einsum("cpb,aq->cabpq", c, eye)
        - np.einsum("cap,bq->cabpq", c, eye)
    ).reshape(n**3, n**2)
    _, s, vt = np.linalg.svd(lmap)
    if s.size == 0 or s[0] == 0.0:
        return vt.T
    return vt[s <= 1e-9 * s[0]].T


class FrameField:
    """Point-dependent invertible matrix u(x) carrying algebra coordinates to
    chart coordinates.  Construct through `frame_field`."""

    def __init__(self, alg: LieAlgebra, kind: str, *, scale=2.0, seed=None):
        if kind not in FRAME_KINDS:
            raise ValueError(f"unknown frame kind {kind!r}; known: {FRAME_KINDS}")
        self.alg = alg
        self.kind = kind
        self.scale = float(scale)
        self.seed = seed
        if kind == "scaled" and self.scale == 0.0:
            raise ValueError("scaled frame needs a nonzero scale")
        if kind == "exp_chart":
            if not classify(alg).semisimple:
                raise DegenerateKillingError(
                    "exp_chart frames are defined for semisimple algebras"
                )
            self._ad_norms = np.linalg.norm(alg.ad, ord=2, axis=(1, 2))
        if kind == "random_smooth":
            self._generators = self._sample_generators()

    def _sample_generators(self) -> np.ndarray:
        n = self.alg.dim
        rng = np.random.default_rng(self.seed)
        null = _derivation_nullspace(self.alg)
        if null.shape[1] == n * n:
            raise ConditioningError(
                "every matrix is a derivation here; random_smooth cannot produce "
                "a nondegenerate generator"
            )
        mats = np.empty((n, n, n))
        for i in range(n):
            for attempt in range(_RESAMPLE_CAP):
                s = rng.standard_normal((n, n))
                v = s.reshape(-1)
                dist = np.linalg.norm(v - null @ (null.T @ v))
                if dist > _DERIVATION_RTOL * np.linalg.norm(v):
                    mats[i] = s
                    break
            else:
                raise ConditioningError(
                    "could not sample a generator away from the derivation algebra"
                )
        return mats

    def exp_chart_safe_radius(self) -> float:
        """Largest ||x||_inf with the spectral safety margin for the series."""
        if self.kind != "exp_chart":
            raise ValueError("only exp_chart frames carry a series radius")
        return SERIES_SAFE_SPECTRAL / float(np.sum(self._ad_norms))

    def __call__(self, x) -> np.ndarray:
        return self.evaluate_many(np.asarray(x, dtype=float)[None])[0]

    def evaluate_many(self, xs) -> np.ndarray:
        """Evaluate u at each row of xs, returning (m, n, n)."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        m, n = xs.shape
        if n != self.alg.dim:
            raise ValueError("points have the wrong dimension for this algebra")
        if self.kind == "identity":
            return np.broadcast_to(np.eye(n), (m, n, n)).copy()
        if self.kind == "scaled":
            return np.broadcast_to(self.scale * np.eye(n), (m, n, n)).copy()
        if self.kind == "exp_chart":
            margin = np.abs(xs) @ self._ad_norms
            if np.max(margin) >= SERIES_SAFE_SPECTRAL:
                raise ConditioningError(
                    "exp_chart radius exceeded: evaluation points leave the "
                    "series safety bound"
                )
            adx = np.einsum("kij,mi->mkj", self.alg.constants, xs)
            return np.linalg.inv(_phi_matrix(adx))
        gen = np.einsum("mi,iab->mab", xs, self._generators)
        return np.stack([scipy.linalg.expm(g) for g in gen])


def frame_field(alg: LieAlgebra, kind: str, *, scale=2.0, seed=None) -> FrameField:
    """Build one of the generator kinds: identity, scaled, exp_chart, random_smooth."""
    return FrameField(alg, kind, scale=scale, seed=seed)


def default_exp_chart_radius(alg: LieAlgebra) -> float:
    """Default chart radius 0.4 / max_i ||ad_i||_2 for exp_chart runs."""
    norms = np.linalg.norm(alg.ad, ord=2, axis=(1, 2))
    top = float(np.max(norms))
    if top == 0.0:
        raise DegenerateKillingError("an abelian algebra has no exp_chart scale")
    return 0.4 / top


# --- bracket fields ----------------------------------------------------------


@dataclass(frozen=True)
class BracketField:
    """Bracket tensor, metric and inverse metric at every stencil point.

    Arrays are indexed [sample, stencil_offset, ...]; `offset_index` maps an
    integer offset tuple to its stencil slot.
    """

    chart: Chart
    offsets: np.ndarray
    offset_index: dict
    bracket_tensor: np.ndarray  # (s, q, n, n, n) T[c,a,b]
    metric: np.ndarray  # (s, q, n, n)
    metric_inv: np.ndarray  # (s, q, n, n)

    def at_offset(self, delta) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        q = self.offset_index[tuple(int(d) for d in delta)]
        return self.bracket_tensor[:, q], self.metric[:, q], self.metric_inv[:, q]


def bracket_field_from_frame(
    alg: LieAlgebra, frame: FrameField, chart: Chart
) -> BracketField:
    """Push the structure constants through the frame at every stencil point.

    T[c,a,b](x) = u[c,m] C[m,i,j] uinv[i,a] uinv[j,b] and the metric is the
    pointwise Killing construction G[a,b] = -T[m,a,n] T[n,b,m].  Enforces the
    frame conditioning bound, a pointwise Jacobi check, and metric
    nondegeneracy at every stencil point.
    """
    if chart.dim != alg.dim:
        raise ValueError("chart dimension does not match the algebra")
    offs = stencil_offsets(alg.dim)
    index = {tuple(int(v) for v in row): qi for qi, row in enumerate(offs)}
    s, q, n = chart.points.shape[0], offs.shape[0], alg.dim
    pts = chart.points[:, None, :] + chart.h * offs[None, :, :]
    u = frame.evaluate_many(pts.reshape(s * q, n))
    cond = np.linalg.cond(u)
    if not np.all(np.isfinite(cond)) or np.max(cond) > FRAME_COND_MAX:
        raise ConditioningError(
            f"singular frame: condition number {np.max(cond):.3e} exceeds {FRAME_COND_MAX:.0e}"
        )
    uinv = np.linalg.inv(u)
    t = np.einsum("pcm,mij,pia,pjb->pcab", u, alg.constants, uinv, uinv)

    jac = np.einsum("pmab,plmc->plabc", t, t)
    jac = jac + np.einsum("plbca->plabc", jac) + np.einsum("plcab->plabc", jac)
    worst = float(np.max(np.abs(jac)))
    if worst > POINTWISE_JACOBI_TOL:
        raise ConditioningError(
            f"pointwise Jacobi residual {worst:.3e} exceeds {POINTWISE_JACOBI_TOL:.0e}; "
            "the frame evaluation is inconsistent"
        )

    g = -np.einsum("pman,pnbm->pab", t, t)
    g = 0.5 * (g + np.swapaxes(g, 1, 2))
    gcond = np.linalg.cond(g)
    if not np.all(np.isfinite(gcond)) or np.max(gcond) > METRIC_COND_MAX:
        raise ConditioningError(
            f"near-singular metric: condition number {np.max(gcond):.3e} "
            f"exceeds {METRIC_COND_MAX:.0e}"
        )
    ginv = np.linalg.inv(g)
    return BracketField(
        chart=chart,
        offsets=offs,
        offset_index=index,
        bracket_tensor=t.reshape(s, q, n, n, n),
        metric=g.reshape(s, q, n, n),
        metric_inv=ginv.reshape(s, q, n, n),
    )


# --- finite-difference geometry ----------------------------------------------


def _unit(n: int, i: int, step: int = 1) -> tuple:
    e = [0] * n
    e[i] = step
    return tuple(e)


def _shift(delta: tuple, n: int, i: int, step: int) -> tuple:
    out = list(delta)
    out[i] += step
    return tuple(out)


def _metric_gradient(field: BracketField, delta: tuple) -> np.ndarray:
    """dG[s,i,a,b] = (G(x + h e_i) - G(x - h e_i)) / (2h) around offset delta."""
    n = field.chart.dim
    h = field.chart.h
    cols = []
    for i in range(n):
        gp = field.metric[:, field.offset_index[_shift(delta, n, i, +1)]]
        gm = field.metric[:, field.offset_index[_shift(delta, n, i, -1)]]
        cols.append((gp - gm) / (2.0 * h))
    return np.stack(cols, axis=1)


def _christoffel_at(field: BracketField, delta: tuple) -> np.ndarray:
    """Gamma[s,k,i,j] = 1/2 Ginv[k,l] (d_i G[j,l] + d_j G[i,l] - d_l G[i,j])."""
    dg = _metric_gradient(field, delta)
    ginv = field.metric_inv[:, field.offset_index[delta]]
    s = np.einsum("sijl->slij", dg) + np.einsum("sjil->slij", dg) - dg
    return 0.5 * np.einsum("skl,slij->skij", ginv, s)


def christoffel_field(field: BracketField, chart: Chart | None = None) -> np.ndarray:
    """Christoffel symbols at the sample points, shape (s, n, n, n) = [k,i,j]."""
    _check_chart(field, chart)
    return _christoffel_at(field, _zero_offset(field))


def _zero_offset(field: BracketField) -> tuple:
    return (0,) * field.chart.dim


def _check_chart(field: BracketField, chart: Chart | None):
    if chart is not None and chart is not field.chart:
        raise ValueError("this bracket field was built over a different chart")


def _covariant_derivative(field: BracketField) -> np.ndarray:
    """(D_i T)[c,a,b] at the sample points, shape (s, n, n, n, n) = [i,c,a,b]."""
    n = field.chart.dim
    h = field.chart.h
    zero = _zero_offset(field)
    t0 = field.bracket_tensor[:, field.offset_index[zero]]
    cols = []
    for i in range(n):
        tp = field.bracket_tensor[:, field.offset_index[_unit(n, i, +1)]]
        tm = field.bracket_tensor[:, field.offset_index[_unit(n, i, -1)]]
        cols.append((tp - tm) / (2.0 * h))
    dt = np.stack(cols, axis=1)
    gamma = _christoffel_at(field, zero)
    return (
        dt
        + np.einsum("scim,smab->sicab", gamma, t0)
        - np.einsum("smia,scmb->sicab", gamma, t0)
        - np.einsum("smib,scam->sicab", gamma, t0)
    )


def covariant_derivative(field: BracketField, chart: Chart | None = None) -> np.ndarray:
    """Levi-Civita covariant derivative of the bracket tensor, (s, n, n, n, n)."""
    _check_chart(field, chart)
    return _covariant_derivative(field)


def cyclic_derivative(field: BracketField, chart: Chart | None = None) -> np.ndarray:
    """Cyclic sum (D_X T)(Y,Z) + (D_Y T)(Z,X) + (D_Z T)(X,Y), fully alternating."""
    _check_chart(field, chart)
    return _cyclic_sum(_covariant_derivative(field))


def _cyclic_sum(dt: np.ndarray) -> np.ndarray:
    return (
        np.einsum("sxcyz->scxyz", dt)
        + np.einsum("syczx->scxyz", dt)
        + np.einsum("szcxy->scxyz", dt)
    )


def gauge_field(field: BracketField, chart: Chart | None = None) -> np.ndarray:
    """Connection correction A[i,c,b] = Ginv[k,l] T[c,k,m] (D_i T)[m,b,l]."""
    _check_chart(field, chart)
    return _gauge(field, _covariant_derivative(field))


def _gauge(field: BracketField, dt: np.ndarray) -> np.ndarray:
    zero = _zero_offset(field)
    t0 = field.bracket_tensor[:, field.offset_index[zero]]
    ginv0 = field.metric_inv[:, field.offset_index[zero]]
    return np.einsum("skl,sckm,simbl->sicb", ginv0, t0, dt)


def torsion_field(field: BracketField, chart: Chart | None = None) -> np.ndarray:
    """Torsion tau[c,i,j] = A[i,c,j] - A[j,c,i] of the corrected connection."""
    _check_chart(field, chart)
    a = _gauge(field, _covariant_derivative(field))
    t = np.einsum("sicj->scij", a)
    return t - np.einsum("scij->scji", t)


def curvature_field(field: BracketField, chart: Chart | None = None) -> np.ndarray:
    """Riemann tensor R[l,k,i,j] of the Levi-Civita connection, (s, n, n, n, n).

    R^l_{kij} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
              + Gamma^l_{im} Gamma^m_{jk} - Gamma^l_{jm} Gamma^m_{ik},
    with d Gamma by central differences of stencil Christoffels.
    """
    _check_chart(field, chart)
    n = field.chart.dim
    h = field.chart.h
    zero = _zero_offset(field)
    cols = []
    for i in range(n):
        gp = _christoffel_at(field, _unit(n, i, +1))
        gm = _christoffel_at(field, _unit(n, i, -1))
        cols.append((gp - gm) / (2.0 * h))
    dgamma = np.stack(cols, axis=1)  # (s, i, l, j, k)
    gamma0 = _christoffel_at(field, zero)
    x = np.einsum("siljk->slkij", dgamma) + np.einsum(
        "slim,smjk->slkij", gamma0, gamma0
    )
    return x - np.einsum("slkij->slkji", x)


# --- diagnostics --------------------------------------------------------------


@dataclass(frozen=True)
class DiagnosticsReport:
    """Per-point and global max-abs norms of the field diagnostics.

    Covers only the sample points whose full stencil lies inside the chart.
    `point_norms` maps each CSV norm column to an array over reported points.
    """

    h: float
    point_ids: np.ndarray
    points: np.ndarray
    point_norms: dict
    global_max: dict = field(default=None)

    def __post_init__(self):
        if self.global_max is None:
            object.__setattr__(
                self,
                "global_max",
                {k: float(np.max(v)) for k, v in self.point_norms.items()},
            )

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv_text())

    def to_csv_text(self) -> str:
        n = self.points.shape[1]
        header = (
            ["point_id"]
            + [f"x_{i + 1}" for i in range(n)]
            + list(CSV_NORM_COLUMNS)
        )
        lines = [",".join(header)]
        for row in range(self.point_ids.shape[0]):
            cells = [str(int(self.point_ids[row]))]
            cells += [_sci(v) for v in self.points[row]]
            cells += [_sci(self.point_norms[k][row]) for k in CSV_NORM_COLUMNS]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def _sci(v: float) -> str:
    # 17 significant digits in scientific notation.
    return f"{float(v):.16e}"


def _maxabs(arr: np.ndarray) -> np.ndarray:
    return np.max(np.abs(arr.reshape(arr.shape[0], -1)), axis=1)


def _norm_block(field: BracketField, rows: np.ndarray) -> dict:
    sub = BracketField(
        chart=field.chart,
        offsets=field.offsets,
        offset_index=field.offset_index,
        bracket_tensor=field.bracket_tensor[rows],
        metric=field.metric[rows],
        metric_inv=field.metric_inv[rows],
    )
    zero = _zero_offset(field)
    t0 = sub.bracket_tensor[:, sub.offset_index[zero]]
    g0 = sub.metric[:, sub.offset_index[zero]]
    dt = _covariant_derivative(sub)
    a = _gauge(sub, dt)
    tau = np.einsum("sicj->scij", a)
    tau = tau - np.einsum("scij->scji", tau)
    nabla = (
        dt
        + np.einsum("sicm,smab->sicab", a, t0)
        - np.einsum("sima,scmb->sicab", a, t0)
        - np.einsum("simb,scam->sicab", a, t0)
    )
    skew = np.einsum("scm,simb->sicb", g0, a) + np.einsum("sbm,simc->sicb", g0, a)
    riemann = curvature_field(sub)
    return {
        "norm_tau": _maxabs(tau),
        "norm_A": _maxabs(a),
        "norm_DT": _maxabs(dt),
        "norm_dDT": _maxabs(_cyclic_sum(dt)),
        "norm_nablaT_residual": _maxabs(nabla),
        "norm_metric_skew": _maxabs(skew),
        "norm_riemann": _maxabs(riemann),
    }


def residual_report(
    field: BracketField, chart: Chart | None = None, workers: int = 1
) -> DiagnosticsReport:
    """Evaluate all diagnostics over the reported points of the chart.

    `workers` > 1 splits the points into contiguous blocks evaluated on a
    thread pool; every block runs the same per-point arithmetic, so reports
    are bit-identical whatever the worker count.
    """
    _check_chart(field, chart)
    ch = field.chart
    mask = ch.reported_mask()
    ids = np.flatnonzero(mask)
    if ids.size == 0:
        raise ValueError("no sample point keeps its full stencil inside the chart")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1 or ids.size == 1:
        norms = _norm_block(field, ids)
    else:
        blocks = np.array_split(ids, min(workers, ids.size))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _norm_block(field, b), blocks))
        norms = {
            k: np.concatenate([p[k] for p in parts]) for k in parts[0]
        }
    return DiagnosticsReport(
        h=ch.h,
        point_ids=ids,
        points=ch.points[ids],
        point_norms=norms,
    )
