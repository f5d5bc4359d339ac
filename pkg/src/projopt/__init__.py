"""Projection-based constrained optimization: exact Euclidean projections
onto the probability simplex and onto box-plus-affine-equality sets,
projected gradient descent over either set, and an LP solver that reduces
the program to a single projection with a certified objective-gap bound."""

from .box_affine import (
    BoxAffineProjectionResult,
    BoxAffineSet,
    DualAscentConfig,
    PhiResult,
    dual_gradient,
    dual_value,
    kkt_residuals,
    lagrangian_value,
    phi,
    project_box_affine,
)
from .errors import (
    DimensionMismatchError,
    DivergedError,
    InfeasibleSetError,
    InvalidBoxError,
    InvalidInputError,
    SingularSystemError,
    SolverError,
)
from .linalg import (
    as_matrix,
    as_vector,
    clip,
    dot,
    matvec,
    matvec_transpose,
    norm2,
    norm_inf,
    solve_linear_system,
)
from .lp import (
    ActiveConstraint,
    LpProblem,
    LpSolveReport,
    RadiusEstimate,
    choose_t,
    compute_radii,
    identify_active_constraints,
    refine_by_linear_solve,
    solve_lp,
    suboptimality_bound,
)
from .pgd import (
    PgdConfig,
    PgdReport,
    SmoothObjective,
    linear_objective,
    pgd_solve,
    pgd_step,
    quadratic_objective,
)
from .simplex import (
    SimplexProjectionResult,
    project_simplex_bisection,
    project_simplex_sort,
    simplex_dual_value,
    simplex_primal_from_dual,
)

__version__ = "0.1.0"

__all__ = [
    "ActiveConstraint",
    "BoxAffineProjectionResult",
    "BoxAffineSet",
    "DimensionMismatchError",
    "DivergedError",
    "DualAscentConfig",
    "InfeasibleSetError",
    "InvalidBoxError",
    "InvalidInputError",
    "LpProblem",
    "LpSolveReport",
    "PgdConfig",
    "PgdReport",
    "PhiResult",
    "RadiusEstimate",
    "SimplexProjectionResult",
    "SingularSystemError",
    "SmoothObjective",
    "SolverError",
    "as_matrix",
    "as_vector",
    "choose_t",
    "clip",
    "compute_radii",
    "dot",
    "dual_gradient",
    "dual_value",
    "identify_active_constraints",
    "kkt_residuals",
    "lagrangian_value",
    "linear_objective",
    "matvec",
    "matvec_transpose",
    "norm2",
    "norm_inf",
    "pgd_solve",
    "pgd_step",
    "phi",
    "project_box_affine",
    "project_simplex_bisection",
    "project_simplex_sort",
    "quadratic_objective",
    "refine_by_linear_solve",
    "simplex_dual_value",
    "simplex_primal_from_dual",
    "solve_linear_system",
    "solve_lp",
    "suboptimality_bound",
]
