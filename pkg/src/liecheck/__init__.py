"""Numerical checks for Lie bracket structures.

Three layers: structure-constant algebra (brackets, Killing metrics, dual
bases), the adjoint-coefficient cochain complex with an explicit homotopy for
2-cocycles, and finite-difference diagnostics of bracket fields pushed over a
coordinate chart by a frame (torsion, gauge correction, parallelism defect,
curvature).
"""

from .algebra import (
    Classification,
    DualBasisPair,
    KillingMetric,
    LieAlgebra,
    ad_matrix,
    bracket,
    classify,
    direct_sum,
    dual_basis,
    jacobi_residual,
    killing_metric,
    load_algebra,
    named_algebras,
)
from .cohomology import (
    Cochain,
    alternating,
    coboundary,
    coboundary_matrix,
    cochain_pairing,
    codifferential,
    cohomology_dims,
    gram_matrix,
    homotopy,
    homotopy_via_dual_basis,
    pack_cochain,
    random_cochain,
    unpack_cochain,
    zero_cochain,
)
from .errors import AlgebraSpecError, ConditioningError, DegenerateKillingError
from .fields import (
    BracketField,
    Chart,
    DiagnosticsReport,
    FrameField,
    bracket_field_from_frame,
    christoffel_field,
    covariant_derivative,
    curvature_field,
    cyclic_derivative,
    default_exp_chart_radius,
    frame_field,
    gauge_field,
    residual_report,
    sample_chart,
    stencil_offsets,
    torsion_field,
)

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
