"""finslerlab: a numerical laboratory for Finsler structures.

Computes the full Chern-connection apparatus of a user-specified Finsler norm
on one coordinate chart of the slit tangent bundle — fundamental and Cartan
tensors, nonlinear connection, connection coefficients, hh/hv curvature,
horizontal covariant derivatives — and certifies, at sampled points,
Berwald/Landsberg/locally-Minkowski classification, constant flag curvature,
and parallel-curvature (symmetric-space) conditions, including audits of the
implications tying them together.

The derivative engine is exact truncated-Taylor forward AD with an
independent finite-difference oracle.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegenerateFlagError,
    DomainError,
    FinslerError,
    NumericError,
    OrderError,
    StructureInvalidError,
)
from .jets import (
    BasePoint,
    Jet,
    MultiIndex,
    coefficient,
    fd_partial,
    jet_space,
    taylor_eval,
)
from .metrics import (
    FinslerStructure,
    MetricTensor,
    TensorBlock,
    cartan_tensor,
    custom,
    distinguished_section,
    euclidean,
    evaluate_F,
    fundamental_tensor,
    hyperbolic_chart,
    inverse_metric,
    minkowski_custom,
    perturbed_quartic,
    randers,
    riemannian,
    sphere_chart,
    validate_structure,
)
from .frame import Frame
from .connection import (
    ChernData,
    adot,
    chern_gamma,
    classify,
    delta_x,
    gamma_vertical,
    hcov_cartan,
    nonlinear_connection,
)
from .curvature import (
    CurvatureData,
    constant_flag_fit,
    contract_R,
    curvature_data,
    d_tensor,
    flag_curvature,
    hh_curvature,
    hv_curvature,
    reconstruct_hh,
    traces,
)
from .symmetry import (
    SymmetryReport,
    certify_symmetric,
    check_eq1,
    check_eq2,
    check_eq4,
    commutation_residual,
    hcov,
    theorem_audit,
)
from .report import CheckReport, CheckRow, TheoremRow
from .tolerances import Tolerances
from .config import RunConfig, load_config, parse_config, sample_points
from .cli import run

__all__ = [name for name in dir() if not name.startswith("_")]
