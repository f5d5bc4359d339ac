"""Linear programming over a box with affine equalities via one projection.

Minimizing c @ x over S = {u <= x <= v, A x = b} is approximated by
projecting -t*c onto S: as the penalty scale t grows the projection slides
to the least-cost face, and the objective gap of the projected point is at
most 4*R*r/t for any norm bound R and radius bound r of S.  Choosing
t = 4*R*r/delta therefore certifies a gap of at most delta.  An optional
refinement step identifies the active constraints at the projected point
and re-solves them as a square linear system, recovering the exact vertex
when the optimum is a nondegenerate vertex.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike

from .box_affine import (
    BoxAffineProjectionResult,
    BoxAffineSet,
    DualAscentConfig,
    project_box_affine,
)
from .errors import DimensionMismatchError, InvalidInputError, SolverError
from .linalg import as_vector, norm2, norm_inf, solve_linear_system

# Acceptance thresholds for a refined point: it must be feasible to this
# tolerance and must not worsen the objective by more than the base slack
# plus the projection's own objective uncertainty (the projected point sits
# a residual away from the equality constraints, which shifts its objective
# by up to the residual times the rescaled multiplier).
REFINE_FEASIBILITY_TOL = 1e-8
REFINE_OBJECTIVE_SLACK = 1e-12


def refinement_objective_slack(projection: BoxAffineProjectionResult, t: float) -> float:
    """Allowed objective regression when accepting a refined point."""
    multiplier_scale = float(np.abs(projection.mu).sum()) / t
    return REFINE_OBJECTIVE_SLACK + multiplier_scale * projection.equality_residual


@dataclass(frozen=True)
class LpProblem:
    """Cost vector plus the feasible set."""

    c: np.ndarray
    set: BoxAffineSet

    def __post_init__(self) -> None:
        c = as_vector(self.c, "c")
        if c.size != self.set.dimension:
            raise DimensionMismatchError(
                f"c has length {c.size} but the set has dimension {self.set.dimension}"
            )
        object.__setattr__(self, "c", c)


@dataclass(frozen=True)
class RadiusEstimate:
    """Norm bound R and radius bound r of the feasible set."""

    R: float
    r: float


class ActiveConstraint(NamedTuple):
    """One active constraint: kind is 'equality', 'lower', or 'upper'."""

    kind: str
    index: int


@dataclass(frozen=True)
class LpSolveReport:
    x: np.ndarray
    objective: float
    bound: float
    t_used: float
    refined: bool
    active_set: tuple[ActiveConstraint, ...]
    projection_report: BoxAffineProjectionResult


def compute_radii(set_: BoxAffineSet) -> RadiusEstimate:
    """Bound the set through its box: R from the farthest box corner and r
    as half the box diameter."""
    corner = np.maximum(np.abs(set_.u), np.abs(set_.v))
    return RadiusEstimate(R=norm2(corner), r=0.5 * norm2(set_.v - set_.u))


def choose_t(radii: RadiusEstimate, delta: float) -> float:
    """Penalty scale t = 4*R*r/delta, floored at 1 for degenerate sets."""
    if not delta > 0.0:
        raise InvalidInputError(f"accuracy delta must be positive, got {delta}")
    rr = radii.R * radii.r
    if rr == 0.0:
        return 1.0
    t = 4.0 * rr / delta
    # Guard one ulp so the certified bound never exceeds delta after rounding.
    if 4.0 * rr / t > delta:
        t = np.nextafter(t, np.inf)
    return float(t)


def suboptimality_bound(radii: RadiusEstimate, t: float) -> float:
    """Certified objective gap 4*R*r/t of the scale-t projection."""
    if not t > 0.0:
        raise InvalidInputError(f"penalty scale t must be positive, got {t}")
    return 4.0 * radii.R * radii.r / t


def identify_active_constraints(
    x: ArrayLike, set_: BoxAffineSet
) -> list[ActiveConstraint]:
    """Pick the n constraints closest to equality at x.

    All equality rows are always included; the remaining n - m slots go to
    the box constraints with the smallest slack min(x-u, v-x), lower side
    preferred on a per-coordinate tie, index order on slack ties.
    """
    x = as_vector(x, "x")
    n, m = set_.dimension, set_.num_equalities
    if x.size != n:
        raise DimensionMismatchError(
            f"point has length {x.size} but the set has dimension {n}"
        )
    if n - m < 0:
        raise InvalidInputError(
            f"over-determined: {m} equality rows for {n} variables"
        )
    active = [ActiveConstraint("equality", i) for i in range(m)]
    lower_gap = x - set_.u
    upper_gap = set_.v - x
    slack = np.minimum(lower_gap, upper_gap)
    chosen = sorted(sorted(range(n), key=lambda i: (slack[i], i))[: n - m])
    for i in chosen:
        side = "lower" if lower_gap[i] <= upper_gap[i] else "upper"
        active.append(ActiveConstraint(side, i))
    return active


def refine_by_linear_solve(
    active: Sequence[ActiveConstraint], set_: BoxAffineSet
) -> np.ndarray:
    """Solve the n active constraints as a square linear system.

    Equality entries contribute their row of A, bound entries a unit row
    with the bound value on the right-hand side.  Raises
    ``SingularSystemError`` when the active rows are rank deficient.
    """
    n, m = set_.dimension, set_.num_equalities
    if len(active) != n:
        raise InvalidInputError(
            f"refinement needs exactly {n} active constraints, got {len(active)}"
        )
    M = np.zeros((n, n))
    rhs = np.zeros(n)
    for row, constraint in enumerate(active):
        kind, i = constraint
        if kind == "equality":
            if not 0 <= i < m:
                raise InvalidInputError(f"equality row index {i} out of range (m={m})")
            M[row] = set_.A[i]
            rhs[row] = set_.b[i]
        elif kind in ("lower", "upper"):
            if not 0 <= i < n:
                raise InvalidInputError(f"bound index {i} out of range (n={n})")
            M[row, i] = 1.0
            rhs[row] = set_.u[i] if kind == "lower" else set_.v[i]
        else:
            raise InvalidInputError(f"unknown constraint kind {kind!r}")
    return solve_linear_system(M, rhs)


def _lp_config(
    t: float, c: np.ndarray, base: DualAscentConfig, max_iterations: int
) -> DualAscentConfig:
    # The optimal multipliers scale with t, so unbounded-ray steps must be
    # t-sized and the divergence bound must leave room above them.  A tight
    # feasibility tolerance keeps the projected point accurate enough for
    # active-constraint identification.
    scale = 1.0 + t * norm_inf(c)
    return DualAscentConfig(
        initial_step=scale,
        feasibility_tol=min(base.feasibility_tol, 1e-9),
        max_iterations=max_iterations,
        divergence_bound=max(base.divergence_bound, 1e4 * scale),
        backtracking_factor=base.backtracking_factor,
    )


def _project_penalty_point(
    set_: BoxAffineSet, c: np.ndarray, t: float, base: DualAscentConfig
) -> BoxAffineProjectionResult:
    """Project -t*c onto the set, growing the penalty scale gradually.

    At large t the dual in the equality multipliers is nearly piecewise
    linear and a cold-started ascent zigzags for O(t) iterations, so the
    scale is raised geometrically and each stage warm-starts from the
    previous multiplier, rescaled: the optimal multiplier grows about
    linearly with t for a fixed active face, leaving each stage an O(1)
    correction.
    """
    if set_.num_equalities == 0 or t <= 256.0:
        return project_box_affine(-t * c, set_, _lp_config(t, c, base, base.max_iterations))

    stage_cap = min(base.max_iterations, 5000)
    t_k = 1.0
    result = project_box_affine(-t_k * c, set_, _lp_config(t_k, c, base, stage_cap))
    while t_k < t:
        t_next = min(8.0 * t_k, t)
        cap = base.max_iterations if t_next == t else stage_cap
        result = project_box_affine(
            -t_next * c,
            set_,
            _lp_config(t_next, c, base, cap),
            initial_mu=result.mu * (t_next / t_k),
        )
        t_k = t_next
    return result


def solve_lp(
    problem: LpProblem,
    delta: float,
    config: Optional[DualAscentConfig] = None,
    refine: bool = False,
) -> LpSolveReport:
    """Solve the LP by projecting -t*c onto the feasible set with t = 4Rr/delta.

    With ``refine`` the active constraints at the projected point are
    re-solved as a linear system; the refined point is kept only when it is
    feasible and does not worsen the objective beyond the projection's own
    certified accuracy (see ``refinement_objective_slack``), otherwise the
    projection answer stands (``refined=False``).  When ``config`` is
    omitted the projection runs with penalty-scaled steps and a warm-started
    continuation in the penalty scale; an explicit ``config`` projects at
    the final scale in one shot.
    """
    radii = compute_radii(problem.set)
    t = choose_t(radii, delta)
    if config is not None:
        projection = project_box_affine(-t * problem.c, problem.set, config)
    else:
        projection = _project_penalty_point(
            problem.set, problem.c, t, DualAscentConfig()
        )

    x = projection.x
    refined = False
    active: tuple[ActiveConstraint, ...] = ()
    if refine:
        try:
            active = tuple(identify_active_constraints(x, problem.set))
            candidate = refine_by_linear_solve(active, problem.set)
            feasible = (
                problem.set.box_violation(candidate) <= REFINE_FEASIBILITY_TOL
                and problem.set.equality_violation(candidate) <= REFINE_FEASIBILITY_TOL
            )
            no_regression = float(problem.c @ candidate) <= (
                float(problem.c @ x) + refinement_objective_slack(projection, t)
            )
            if feasible and no_regression:
                x = candidate
                refined = True
        except SolverError:
            pass

    return LpSolveReport(
        x=x,
        objective=float(problem.c @ x),
        bound=suboptimality_bound(radii, t),
        t_used=t,
        refined=refined,
        active_set=active,
        projection_report=projection,
    )
