"""Lie algebras given by structure constants: brackets, Killing metrics, dual bases.

Index convention used throughout: the constants array C has shape (n, n, n)
and is read C[k, i, j], meaning [b_i, b_j] = sum_k C[k, i, j] b_k.  The output
slot comes first so that C[:, i, :] is the matrix of ad(b_i).
"""

from __future__ import annotations

import numbers
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import AlgebraSpecError, DegenerateKillingError

# Relative eigenvalue-ratio threshold of the nondegeneracy (Cartan) test.
SEMISIMPLE_EIG_RATIO = 1e-9

# Jacobi tolerance for algebras accepted by the loader.
JACOBI_TOL = 1e-12


class LieAlgebra:
    """A finite-dimensional real Lie algebra presented by structure constants.

    Instances are immutable: the constants array is frozen at construction and
    antisymmetry C[k, i, j] = -C[k, j, i] is required to hold exactly.  The
    Jacobi identity is *not* enforced here (so that deliberately broken
    tensors can be measured); `load_algebra` rejects non-Jacobi input.
    """

    def __init__(self, dim: int, constants, name: str = ""):
        if not isinstance(dim, numbers.Integral) or dim < 1:
            raise AlgebraSpecError(f"dimension must be a positive integer, got {dim!r}")
        dim = int(dim)
        c = np.array(constants, dtype=float)
        if c.shape != (dim, dim, dim):
            raise AlgebraSpecError(
                f"constants must have shape {(dim, dim, dim)}, got {c.shape}"
            )
        if not np.all(np.isfinite(c)):
            raise AlgebraSpecError("constants must be finite")
        if not np.array_equal(c, -np.swapaxes(c, 1, 2)):
            raise AlgebraSpecError("constants must satisfy C[k,i,j] = -C[k,j,i] exactly")
        c.setflags(write=False)
        self.dim = dim
        self.constants = c
        self.name = str(name)

    @cached_property
    def ad(self) -> np.ndarray:
        """Adjoint matrices, shape (n, n, n): ad[i] is the matrix of ad(b_i)."""
        a = np.ascontiguousarray(self.constants.transpose(1, 0, 2))
        a.setflags(write=False)
        return a

    def __repr__(self):
        label = self.name or "unnamed"
        return f"LieAlgebra({label}, dim={self.dim})"


@dataclass(frozen=True)
class KillingMetric:
    """Gram matrix of <X, Y> = -B(X, Y) with B the Killing form, plus its signature."""

    gram: np.ndarray
    signature: tuple[int, int]


@dataclass(frozen=True)
class Classification:
    semisimple: bool
    compact_type: bool
    signature: tuple[int, int]


@dataclass(frozen=True)
class DualBasisPair:
    """Columns of `primal` and `dual` are bases {e_k}, {e^j} with e_k . G e^j = delta."""

    primal: np.ndarray
    dual: np.ndarray


def bracket(alg: LieAlgebra, x, y) -> np.ndarray:
    """Bracket of coordinate vectors: [x, y]^k = C[k,i,j] x^i y^j."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (alg.dim,) or y.shape != (alg.dim,):
        raise ValueError(f"expected vectors of length {alg.dim}")
    return np.einsum("kij,i,j->k", alg.constants, x, y)


def ad_matrix(alg: LieAlgebra, x) -> np.ndarray:
    """Matrix of ad(x): (ad x)^k_j = sum_i C[k,i,j] x^i."""
    x = np.asarray(x, dtype=float)
    if x.shape != (alg.dim,):
        raise ValueError(f"expected a vector of length {alg.dim}")
    return np.einsum("kij,i->kj", alg.constants, x)


def jacobi_residual(alg: LieAlgebra) -> float:
    """Max over basis triples (i,j,k) and output l of the cyclic Jacobi sum.

    The summand C[m,i,j] C[l,m,k] is [[b_i, b_j], b_k]^l, so the residual is
    the worst component of [[x,y],z] + [[y,z],x] + [[z,x],y] over the basis.
    """
    c = alg.constants
    t = np.einsum("mij,lmk->lijk", c, c)
    total = t + np.einsum("ljki->lijk", t) + np.einsum("lkij->lijk", t)
    return float(np.max(np.abs(total)))


def killing_metric(alg: LieAlgebra) -> KillingMetric:
    """Killing-derived metric G = -B, with B[i,j] = sum_{a,b} C[a,i,b] C[b,j,a]."""
    c = alg.constants
    b = np.einsum("aib,bja->ij", c, c)
    g = -0.5 * (b + b.T)  # symmetrize exactly; b is symmetric up to roundoff
    g.setflags(write=False)
    return KillingMetric(gram=g, signature=_signature(g))


def _signature(g: np.ndarray) -> tuple[int, int]:
    w = np.linalg.eigvalsh(g)
    scale = np.max(np.abs(w)) if w.size else 0.0
    tol = SEMISIMPLE_EIG_RATIO * scale
    return int(np.sum(w > tol)), int(np.sum(w < -tol))


def classify(alg: LieAlgebra) -> Classification:
    """Semisimplicity (nondegenerate G), compact type (G positive definite), signature.

    Nondegeneracy is decided by the eigenvalue ratio min|w| / max|w| > 1e-9.
    """
    g = killing_metric(alg).gram
    w = np.linalg.eigvalsh(g)
    amax = float(np.max(np.abs(w)))
    semisimple = amax > 0.0 and float(np.min(np.abs(w))) / amax > SEMISIMPLE_EIG_RATIO
    p, q = _signature(g)
    compact = semisimple and q == 0 and p == alg.dim
    return Classification(semisimple=semisimple, compact_type=compact, signature=(p, q))


def dual_basis(alg: LieAlgebra) -> DualBasisPair:
    """Dual bases {e_k}, {e^j} of G built from its eigendecomposition.

    With G = Q diag(w) Q^T, take e_k = q_k / sqrt|w_k| and e^k = sign(w_k) e_k.
    Then e_k . G e^j = delta_kj and sum_k e_k (e^k)^T = G^{-1}, independent of
    how eigenvectors are mixed inside eigenspaces.
    """
    cls = classify(alg)
    if not cls.semisimple:
        raise DegenerateKillingError(
            f"dual basis needs a nondegenerate Killing metric; {alg!r} is not semisimple"
        )
    g = killing_metric(alg).gram
    w, q = np.linalg.eigh(g)
    primal = q / np.sqrt(np.abs(w))[None, :]
    dual = primal * np.sign(w)[None, :]
    return DualBasisPair(primal=primal, dual=dual)


# --- loading ----------------------------------------------------------------

_ABELIAN_RE = re.compile(r"^abelian\(?([0-9]+)\)?$")


def _so3() -> LieAlgebra:
    # Epsilon-symbol constants: [b_0,b_1]=b_2, [b_1,b_2]=b_0, [b_2,b_0]=b_1.
    return _from_entries(3, [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (0, 2, 1, -1.0)], "so3")


def _su2() -> LieAlgebra:
    # Same epsilon-symbol basis as so3; the two algebras are isomorphic and
    # this registry deliberately exposes su2 as that identical copy.
    a = _so3()
    return LieAlgebra(3, a.constants, name="su2")


def _sl2r() -> LieAlgebra:
    # Basis (H, E, F): [H,E] = 2E, [H,F] = -2F, [E,F] = H.
    return _from_entries(3, [(0, 1, 1, 2.0), (0, 2, 2, -2.0), (1, 2, 0, 1.0)], "sl2r")


def _heisenberg3() -> LieAlgebra:
    # [X, Y] = Z and nothing else; nilpotent, Killing form identically zero.
    return _from_entries(3, [(0, 1, 2, 1.0)], "heisenberg3")


def _abelian(n: int) -> LieAlgebra:
    return LieAlgebra(n, np.zeros((n, n, n)), name=f"abelian{n}")


def _so4() -> LieAlgebra:
    return direct_sum(_so3(), _so3(), name="so4")


_NAMED = {
    "so3": _so3,
    "su2": _su2,
    "sl2r": _sl2r,
    "heisenberg3": _heisenberg3,
    "so4": _so4,
}


def named_algebras() -> tuple[str, ...]:
    return tuple(_NAMED) + ("abelian<n>",)


def direct_sum(*algs: LieAlgebra, name: str = "") -> LieAlgebra:
    """Block-diagonal direct sum; summands commute with each other."""
    if not algs:
        raise AlgebraSpecError("direct sum needs at least one summand")
    n = sum(a.dim for a in algs)
    c = np.zeros((n, n, n))
    off = 0
    for a in algs:
        d = a.dim
        c[off : off + d, off : off + d, off : off + d] = a.constants
        off += d
    if not name:
        name = "+".join(a.name or "?" for a in algs)
    return LieAlgebra(n, c, name=name)


def _from_entries(dim, entries, name) -> LieAlgebra:
    c = np.zeros((dim, dim, dim))
    seen = {}
    for i, j, k, v in entries:
        for idx, label in ((i, "i"), (j, "j"), (k, "k")):
            if not isinstance(idx, numbers.Integral):
                raise AlgebraSpecError(f"index {label} must be an integer, got {idx!r}")
            if not 0 <= idx < dim:
                raise AlgebraSpecError(
                    f"index {label}={idx} out of range for dimension {dim}"
                )
        if i >= j:
            raise AlgebraSpecError(
                f"constants must be given with i < j only (got i={i}, j={j}); "
                "the loader completes antisymmetry"
            )
        if not isinstance(v, numbers.Real) or not np.isfinite(v):
            raise AlgebraSpecError(f"value for ({i},{j},{k}) must be a finite real, got {v!r}")
        key = (int(i), int(j), int(k))
        if key in seen and seen[key] != float(v):
            raise AlgebraSpecError(
                f"conflicting duplicate entry for (i,j,k)={key}: {seen[key]} vs {v}"
            )
        seen[key] = float(v)
    for (i, j, k), v in seen.items():
        c[k, i, j] = v
        c[k, j, i] = -v
    return LieAlgebra(dim, c, name=name)


def load_algebra(source) -> LieAlgebra:
    """Build an algebra from a registry name or a structure-constant document.

    Names: so3, su2, sl2r, heisenberg3, so4, abelian<n>.  Documents are
    mappings {"name", "dim", "constants": [{"i","j","k","v"}, ...]} listing
    only i < j entries, or {"name", "sum": [names...]} for direct sums.
    Accepted algebras must pass the Jacobi test at 1e-12.
    """
    if isinstance(source, str):
        alg = _load_named(source)
    elif isinstance(source, Mapping):
        alg = _load_document(source)
    else:
        raise AlgebraSpecError(
            f"algebra source must be a name or a mapping, got {type(source).__name__}"
        )
    resid = jacobi_residual(alg)
    if resid > JACOBI_TOL:
        raise AlgebraSpecError(
            f"structure constants fail the Jacobi identity (residual {resid:.3e})"
        )
    return alg


def _load_named(name: str) -> LieAlgebra:
    key = name.strip().lower()
    m = _ABELIAN_RE.match(key)
    if m:
        n = int(m.group(1))
        if n < 1:
            raise AlgebraSpecError("abelian algebra needs dimension >= 1")
        return _abelian(n)
    if key in _NAMED:
        return _NAMED[key]()
    raise AlgebraSpecError(
        f"unknown algebra name {name!r}; known: {', '.join(named_algebras())}"
    )


def _load_document(doc: Mapping) -> LieAlgebra:
    name = doc.get("name", "")
    if "sum" in doc:
        parts = doc["sum"]
        if "dim" in doc or "constants" in doc:
            raise AlgebraSpecError("a sum document must not also carry dim/constants")
        if not isinstance(parts, Sequence) or isinstance(parts, str) or not parts:
            raise AlgebraSpecError("'sum' must be a nonempty list of algebra names")
        return direct_sum(*[load_algebra(p) for p in parts], name=str(name))
    if "dim" not in doc:
        raise AlgebraSpecError("document needs a 'dim' field (or a 'sum' list)")
    dim = doc["dim"]
    if not isinstance(dim, numbers.Integral) or dim < 1:
        raise AlgebraSpecError(f"'dim' must be a positive integer, got {dim!r}")
    raw = doc.get("constants", [])
    if not isinstance(raw, Sequence) or isinstance(raw, str):
        raise AlgebraSpecError("'constants' must be a list of {i,j,k,v} entries")
    entries = []
    for pos, e in enumerate(raw):
        if not isinstance(e, Mapping) or not {"i", "j", "k", "v"} <= set(e):
            raise AlgebraSpecError(
                f"constants[{pos}] must be a mapping with keys i, j, k, v"
            )
        entries.append((e["i"], e["j"], e["k"], e["v"]))
    return _from_entries(int(dim), entries, str(name))
