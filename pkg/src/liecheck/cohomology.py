"""Cochain complex with adjoint coefficients, degrees 0 through 3.

A degree-k cochain is an alternating k-linear map from the algebra to itself.
Cochains are stored as dense arrays w[c, i_1, ..., i_k] with the value slot
first; alternation over the form slots is validated at construction.  The
canonical coordinate vector used by the matrix-level operations runs over
(value index, sorted index combination), value-major.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .algebra import DualBasisPair, LieAlgebra, classify, dual_basis, killing_metric
from .errors import DegenerateKillingError

MAX_DEGREE = 3

# Global sign of the explicit homotopy.  Calibrated once against so3: for
# omega = coboundary(A) the primitive below must satisfy
# coboundary(homotopy(omega)) = omega; +1 is the sign that works, and the
# test suite asserts it stays correct across algebras.
HOMOTOPY_SIGN = 1.0

# Relative singular-value cutoff for numerical ranks.
RANK_RTOL = 1e-9


@dataclass(frozen=True)
class Cochain:
    """Alternating map g^k -> g held as a dense array, value slot first."""

    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data, dtype=float)
        if d.ndim < 1 or d.ndim > MAX_DEGREE + 1:
            raise ValueError(f"cochain arrays must have 1 to {MAX_DEGREE + 1} axes")
        n = d.shape[0]
        if d.shape != (n,) * d.ndim:
            raise ValueError(f"cochain axes must all have equal length, got {d.shape}")
        scale = max(1.0, float(np.max(np.abs(d))) if d.size else 0.0)
        for a, b in itertools.combinations(range(1, d.ndim), 2):
            if np.max(np.abs(d + np.swapaxes(d, a, b))) > 1e-12 * scale:
                raise ValueError("cochain is not alternating in its form slots")
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "data", d)

    @property
    def degree(self) -> int:
        return self.data.ndim - 1

    @property
    def dim(self) -> int:
        return self.data.shape[0]


def alternating(arr) -> Cochain:
    """Project an array onto its alternating part (over all axes after the first)."""
    d = np.asarray(arr, dtype=float)
    k = d.ndim - 1
    if k <= 1:
        return Cochain(d)
    out = np.zeros_like(d)
    for perm in itertools.permutations(range(k)):
        sign = _perm_sign(perm)
        out += sign * np.transpose(d, (0,) + tuple(p + 1 for p in perm))
    return Cochain(out / math.factorial(k))


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def random_cochain(alg: LieAlgebra, degree: int, rng) -> Cochain:
    """Standard-normal alternating cochain of the given degree."""
    if not 0 <= degree <= MAX_DEGREE:
        raise ValueError(f"degree must be between 0 and {MAX_DEGREE}")
    shape = (alg.dim,) * (degree + 1)
    return alternating(rng.standard_normal(shape))


def zero_cochain(alg: LieAlgebra, degree: int) -> Cochain:
    if not 0 <= degree <= MAX_DEGREE:
        raise ValueError(f"degree must be between 0 and {MAX_DEGREE}")
    return Cochain(np.zeros((alg.dim,) * (degree + 1)))


def coboundary(alg: LieAlgebra, c: Cochain) -> Cochain:
    """Adjoint-coefficient coboundary, raising the degree by one.

    Degree 0:  (dA)(X)     = [X, A]
    Degree 1:  (dA)(X,Y)   = [AX, Y] + [X, AY] - A([X, Y])
    Degree 2:  (dw)(X,Y,Z) = sum_cyc [X, w(Y,Z)] - sum_cyc w([X,Y], Z)
    """
    if c.dim != alg.dim:
        raise ValueError("cochain dimension does not match the algebra")
    k = c.degree
    cc, w = alg.constants, c.data
    if k == 0:
        return Cochain(np.einsum("cxm,m->cx", cc, w))
    if k == 1:
        out = (
            np.einsum("cmy,mx->cxy", cc, w)
            + np.einsum("cxm,my->cxy", cc, w)
            - np.einsum("cm,mxy->cxy", w, cc)
        )
        return Cochain(out)
    if k == 2:
        act = np.einsum("cim,mjk->cijk", cc, w)  # [b_i, w(b_j, b_k)]
        arg = np.einsum("mij,cmk->cijk", cc, w)  # w([b_i, b_j], b_k)
        out = (
            act + np.einsum("cyzx->cxyz", act) + np.einsum("czxy->cxyz", act)
            - arg - np.einsum("cyzx->cxyz", arg) - np.einsum("czxy->cxyz", arg)
        )
        return Cochain(out)
    raise ValueError(f"coboundary is implemented for degrees < {MAX_DEGREE}, got {k}")


def pack_cochain(c: Cochain) -> np.ndarray:
    """Canonical coordinates: value index major, sorted form combinations minor."""
    n, k = c.dim, c.degree
    combos = list(itertools.combinations(range(n), k))
    out = np.empty(n * len(combos))
    for ci, combo in enumerate(combos):
        block = c.data[(slice(None),) + combo] if k else c.data
        out[ci::len(combos)] = block
    return out


def unpack_cochain(dim: int, degree: int, vec) -> Cochain:
    """Inverse of pack_cochain; fills all index orders by sign."""
    vec = np.asarray(vec, dtype=float)
    combos = list(itertools.combinations(range(dim), degree))
    if vec.shape != (dim * len(combos),):
        raise ValueError(f"expected a vector of length {dim * len(combos)}")
    data = np.zeros((dim,) * (degree + 1))
    for ci, combo in enumerate(combos):
        vals = vec[ci::len(combos)]
        if degree == 0:
            data[:] = vals
            continue
        for perm in itertools.permutations(range(degree)):
            idx = tuple(combo[p] for p in perm)
            data[(slice(None),) + idx] = _perm_sign(perm) * vals
    return Cochain(data)


def cochain_space_dim(dim: int, degree: int) -> int:
    return dim * math.comb(dim, degree)


def coboundary_matrix(alg: LieAlgebra, k: int) -> np.ndarray:
    """Matrix of the coboundary from degree k to k+1 in canonical coordinates."""
    if not 0 <= k < MAX_DEGREE:
        raise ValueError(f"coboundary matrices exist for degrees 0..{MAX_DEGREE - 1}")
    n = alg.dim
    cols = cochain_space_dim(n, k)
    rows = cochain_space_dim(n, k + 1)
    mat = np.empty((rows, cols))
    for p in range(cols):
        e = np.zeros(cols)
        e[p] = 1.0
        mat[:, p] = pack_cochain(coboundary(alg, unpack_cochain(n, k, e)))
    return mat


def _rank(mat: np.ndarray) -> int:
    if mat.size == 0:
        return 0
    s = np.linalg.svd(mat, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > RANK_RTOL * s[0]))


def cohomology_dims(alg: LieAlgebra) -> tuple[int, int, int]:
    """(h0, h1, h2) with h_k = dim ker d_k - rank d_{k-1}, ranks by SVD."""
    d0 = coboundary_matrix(alg, 0)
    d1 = coboundary_matrix(alg, 1)
    d2 = coboundary_matrix(alg, 2)
    r0, r1, r2 = _rank(d0), _rank(d1), _rank(d2)
    h0 = cochain_space_dim(alg.dim, 0) - r0
    h1 = cochain_space_dim(alg.dim, 1) - r1 - r0
    h2 = cochain_space_dim(alg.dim, 2) - r2 - r1
    return h0, h1, h2


def homotopy(alg: LieAlgebra, omega: Cochain) -> Cochain:
    """Explicit degree-lowering primitive for 2-cocycles on semisimple algebras.

    A[c, x] = sign * sum_{a,b,m} Ginv[a,b] C[c,a,m] omega[m,x,b], which is the
    dual-basis sum sum_k [e_k, omega(X, e^k)] written through Ginv.  For a
    cocycle omega this satisfies coboundary(A) = omega and codifferential(A) = 0.
    """
    if omega.degree != 2 or omega.dim != alg.dim:
        raise ValueError("homotopy expects a degree-2 cochain over the same algebra")
    if not classify(alg).semisimple:
        raise DegenerateKillingError(
            "the homotopy needs a nondegenerate Killing metric"
        )
    ginv = np.linalg.inv(killing_metric(alg).gram)
    out = HOMOTOPY_SIGN * np.einsum(
        "ab,cam,mxb->cx", ginv, alg.constants, omega.data
    )
    return Cochain(out)


def gram_matrix(alg: LieAlgebra, k: int) -> np.ndarray:
    """Gram matrix of the degree-k pairing in canonical coordinates.

    The pairing puts G on the value slot and G^{-1} on each form slot; on
    canonical coordinates it is kron(G, W) with W[I, J] the minor determinant
    det Ginv[I, J] over sorted index combinations.  Indefinite metrics are
    used as they come, so the pairing need not be positive definite.
    """
    if not 0 <= k <= MAX_DEGREE:
        raise ValueError(f"degree must be between 0 and {MAX_DEGREE}")
    if not classify(alg).semisimple:
        raise DegenerateKillingError("cochain pairings need a nondegenerate metric")
    g = killing_metric(alg).gram
    ginv = np.linalg.inv(g)
    combos = list(itertools.combinations(range(alg.dim), k))
    w = np.empty((len(combos), len(combos)))
    for a, ia in enumerate(combos):
        for b, jb in enumerate(combos):
            w[a, b] = np.linalg.det(ginv[np.ix_(ia, jb)]) if k else 1.0
    return np.kron(g, w)


def cochain_pairing(alg: LieAlgebra, a: Cochain, b: Cochain) -> float:
    """Pairing <a, b> = (1/k!) G_cc' (Ginv)^{xy}... a[c,x..] b[c',y..]."""
    if a.degree != b.degree or a.dim != b.dim or a.dim != alg.dim:
        raise ValueError("pairing needs two cochains of equal degree over the algebra")
    va, vb = pack_cochain(a), pack_cochain(b)
    return float(va @ gram_matrix(alg, a.degree) @ vb)


def codifferential(alg: LieAlgebra, c: Cochain) -> Cochain:
    """Formal adjoint of the coboundary: pair(codiff a, b) = pair(a, coboundary b).

    On canonical coordinates this is M_{k-1}^{-1} D^T M_k with D the coboundary
    matrix into degree k and M the degree Gram matrices.
    """
    k = c.degree
    if k < 1:
        raise ValueError("the codifferential needs degree >= 1")
    if c.dim != alg.dim:
        raise ValueError("cochain dimension does not match the algebra")
    d = coboundary_matrix(alg, k - 1)
    mk = gram_matrix(alg, k)
    mkm1 = gram_matrix(alg, k - 1)
    vec = np.linalg.solve(mkm1, d.T @ (mk @ pack_cochain(c)))
    return unpack_cochain(alg.dim, k - 1, vec)


def homotopy_via_dual_basis(
    alg: LieAlgebra, omega: Cochain, pair: DualBasisPair | None = None
) -> Cochain:
    """Same primitive as `homotopy`, via an explicit dual-basis sum.

    Computes sign * sum_k [e_k, omega(X, e^k)] from a DualBasisPair; used to
    check that the Ginv contraction is dual-basis independent.  Any valid
    pair may be supplied (default: the eigendecomposition one).
    """
    if omega.degree != 2 or omega.dim != alg.dim:
        raise ValueError("expected a degree-2 cochain over the same algebra")
    if pair is None:
        pair = dual_basis(alg)
    out = np.zeros((alg.dim, alg.dim))
    for k in range(alg.dim):
        ek, ekup = pair.primal[:, k], pair.dual[:, k]
        # [e_k, omega(b_x, e^k)]^c summed over k
        out += HOMOTOPY_SIGN * np.einsum(
            "cam,a,mxb,b->cx", alg.constants, ek, omega.data, ekup
        )
    return Cochain(out)
