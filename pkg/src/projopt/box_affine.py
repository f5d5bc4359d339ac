"""Euclidean projection onto {x : u <= x <= v, A x = b} via its concave dual.

Fixing the equality multipliers mu, the inner minimization has a closed
form: shift the point by -A.T @ mu, clamp into the box, and read the bound
multipliers off the clamped amount.  Maximizing the resulting concave dual
over mu with gradient ascent (the ascent direction is the equality residual
A x(mu) - b) recovers the projection together with a full multiplier set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike

from .errors import (
    DimensionMismatchError,
    InfeasibleSetError,
    InvalidBoxError,
    InvalidInputError,
)
from .linalg import as_matrix, as_vector, clip, norm_inf

_EPS = float(np.finfo(float).eps)
_SAFETY_HALVINGS = 60
_SPLIT = 134217729.0  # 2**27 + 1, Dekker splitting constant


def _shifted_point(y: np.ndarray, A: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """y - A.T @ mu with compensated products and sums.

    The multipliers reach magnitudes around the penalty scale while the
    shifted point itself is O(1): a plain evaluation loses the result to
    cancellation (absolute error ~eps times the multiplier scale), which
    caps the attainable equality residual.  Error-free products (Dekker
    splitting) plus Neumaier summation keep the error relative to the small
    result instead.
    """
    total = y.copy()
    compensation = np.zeros_like(y)
    for k in range(mu.shape[0]):
        a = A[k]
        factor = -mu[k]
        product = a * factor
        a_hi = _SPLIT * a - (_SPLIT * a - a)
        a_lo = a - a_hi
        f_hi = _SPLIT * factor - (_SPLIT * factor - factor)
        f_lo = factor - f_hi
        tail = ((a_hi * f_hi - product) + a_hi * f_lo + a_lo * f_hi) + a_lo * f_lo
        summed = total + product
        compensation += np.where(
            np.abs(total) >= np.abs(product),
            (total - summed) + product,
            (product - summed) + total,
        )
        total = summed
        compensation += tail
    return total + compensation


@dataclass(frozen=True)
class BoxAffineSet:
    """Feasible set {x : u <= x <= v, A x = b}; omit A and b for a plain box."""

    u: np.ndarray
    v: np.ndarray
    A: Optional[ArrayLike] = None
    b: Optional[ArrayLike] = None

    def __post_init__(self) -> None:
        u = as_vector(self.u, "u")
        v = as_vector(self.v, "v")
        if u.shape != v.shape:
            raise DimensionMismatchError(
                f"u has length {u.shape[0]} but v has length {v.shape[0]}"
            )
        bad = np.flatnonzero(u > v)
        if bad.size:
            i = int(bad[0])
            raise InvalidBoxError(
                f"lower bound exceeds upper bound at index {i}: {u[i]} > {v[i]}"
            )
        if (self.A is None) != (self.b is None):
            raise DimensionMismatchError("A and b must be provided together")
        if self.A is None:
            A = np.zeros((0, u.size))
            b = np.zeros(0)
        else:
            A = as_matrix(self.A, "A")
            b = as_vector(self.b, "b")
            if A.shape[1] != u.size:
                raise DimensionMismatchError(
                    f"A has {A.shape[1]} columns but the box has {u.size} coordinates"
                )
            if A.shape[0] != b.size:
                raise DimensionMismatchError(
                    f"A has {A.shape[0]} rows but b has length {b.size}"
                )
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def dimension(self) -> int:
        return self.u.size

    @property
    def num_equalities(self) -> int:
        return self.b.size

    def box_violation(self, x: ArrayLike) -> float:
        """Largest violation of the bound constraints at x."""
        x = as_vector(x, "x")
        below = norm_inf(np.maximum(self.u - x, 0.0))
        above = norm_inf(np.maximum(x - self.v, 0.0))
        return max(below, above)

    def equality_violation(self, x: ArrayLike) -> float:
        """Largest violation of the equality constraints at x."""
        x = as_vector(x, "x")
        return norm_inf(self.A @ x - self.b)


@dataclass(frozen=True)
class PhiResult:
    """Primal point and bound multipliers induced by equality multipliers."""

    x: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray


@dataclass(frozen=True)
class DualAscentConfig:
    """Parameters of the dual gradient ascent.

    Each iteration steps to the exact maximizer of the dual along the ascent
    ray (the dual is concave piecewise quadratic along any ray, so the
    maximizer falls out of the clip breakpoints).  ``initial_step`` floors
    the step on rays along which the dual never stops increasing, which only
    happens for empty sets; ``backtracking_factor`` is the halving used by a
    numerical safety check on the computed step.  Convergence is declared
    when the equality residual drops below ``feasibility_tol`` or below the
    rounding floor of the residual evaluation itself, whichever is larger
    (at very large data scales the floor can exceed the tolerance).
    """

    initial_step: float = 1.0
    feasibility_tol: float = 1e-8
    max_iterations: int = 100000
    divergence_bound: float = 1e12
    backtracking_factor: float = 0.5

    def __post_init__(self) -> None:
        if not self.initial_step > 0.0:
            raise InvalidInputError(f"initial_step must be positive, got {self.initial_step}")
        if not self.feasibility_tol > 0.0:
            raise InvalidInputError(
                f"feasibility_tol must be positive, got {self.feasibility_tol}"
            )
        if self.max_iterations < 1:
            raise InvalidInputError(
                f"max_iterations must be at least 1, got {self.max_iterations}"
            )
        if not self.divergence_bound > 0.0:
            raise InvalidInputError(
                f"divergence_bound must be positive, got {self.divergence_bound}"
            )
        if not 0.0 < self.backtracking_factor < 1.0:
            raise InvalidInputError(
                f"backtracking_factor must lie in (0, 1), got {self.backtracking_factor}"
            )


@dataclass(frozen=True)
class BoxAffineProjectionResult:
    x: np.ndarray
    mu: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray
    equality_residual: float
    iterations: int
    converged: bool


def _check_point(y: ArrayLike, set_: BoxAffineSet) -> np.ndarray:
    y = as_vector(y, "y")
    if y.size != set_.dimension:
        raise DimensionMismatchError(
            f"point has length {y.size} but the set has dimension {set_.dimension}"
        )
    return y


def _check_multiplier(mu: ArrayLike, set_: BoxAffineSet) -> np.ndarray:
    mu = as_vector(mu, "mu")
    if mu.size != set_.num_equalities:
        raise DimensionMismatchError(
            f"mu has length {mu.size} but the set has {set_.num_equalities} equality rows"
        )
    return mu


def phi(mu: ArrayLike, y: ArrayLike, set_: BoxAffineSet) -> PhiResult:
    """Map equality multipliers to the inner-minimizing (x, lambda1, lambda2).

    With z = y - A.T @ mu: interior coordinates take x = z with zero bound
    multipliers, coordinates clamped below take x = u with lambda1 = u - z,
    and coordinates clamped above take x = v with lambda2 = z - v.
    """
    mu = _check_multiplier(mu, set_)
    y = _check_point(y, set_)
    z = _shifted_point(y, set_.A, mu)
    x = clip(z, set_.u, set_.v)
    lambda1 = np.maximum(set_.u - z, 0.0)
    lambda2 = np.maximum(z - set_.v, 0.0)
    return PhiResult(x=x, lambda1=lambda1, lambda2=lambda2)


def lagrangian_value(
    p: PhiResult, mu: ArrayLike, y: ArrayLike, set_: BoxAffineSet
) -> float:
    """0.5*||x-y||^2 + lambda1@(u-x) + lambda2@(x-v) + mu@(A x - b)."""
    mu = _check_multiplier(mu, set_)
    y = _check_point(y, set_)
    diff = p.x - y
    return (
        0.5 * float(np.dot(diff, diff))
        + float(np.dot(p.lambda1, set_.u - p.x))
        + float(np.dot(p.lambda2, p.x - set_.v))
        + float(np.dot(mu, set_.A @ p.x - set_.b))
    )


def dual_value(mu: ArrayLike, y: ArrayLike, set_: BoxAffineSet) -> float:
    """Concave dual objective: the Lagrangian evaluated along phi."""
    return lagrangian_value(phi(mu, y, set_), mu, y, set_)


def dual_gradient(mu: ArrayLike, y: ArrayLike, set_: BoxAffineSet) -> np.ndarray:
    """Ascent direction of the dual: the equality residual A x(mu) - b."""
    return set_.A @ phi(mu, y, set_).x - set_.b


def _dual_increase(
    set_: BoxAffineSet, z: np.ndarray, p: np.ndarray, d: np.ndarray, alpha: float
) -> float:
    """dual(mu + alpha*p) - dual(mu), evaluated without cancellation.

    The dual derivative along each shifted coordinate is the clamped primal
    value, so the difference is an exact integral of clip over the interval
    the shift sweeps (z is the current shifted point and d = A.T @ p).  The
    direct formula stays accurate when dual values are enormous and their
    float difference would be pure rounding.
    """
    z_new = z - alpha * d
    lo = np.minimum(z, z_new)
    hi = np.maximum(z, z_new)
    below = np.maximum(np.minimum(hi, set_.u) - lo, 0.0)
    above = np.maximum(hi - np.maximum(lo, set_.v), 0.0)
    mid_lo = np.maximum(lo, set_.u)
    mid_hi = np.minimum(hi, set_.v)
    mid = np.maximum(mid_hi - mid_lo, 0.0)
    segment = set_.u * below + set_.v * above + 0.5 * (mid_lo + mid_hi) * mid
    signed = np.where(z >= z_new, segment, -segment)
    return float(signed.sum()) - alpha * float(np.dot(p, set_.b))


def _line_maximizer(
    set_: BoxAffineSet,
    z: np.ndarray,
    p: np.ndarray,
    d: np.ndarray,
    slope_at_zero: float,
) -> Optional[float]:
    """Exact maximizer of alpha -> dual(mu + alpha*p), or None when unbounded.

    The directional derivative is d @ clip(z - alpha*d, u, v) - p @ b with
    d = A.T @ p: a nonincreasing piecewise-linear function of alpha whose
    kinks sit where a coordinate of z - alpha*d crosses its bound.  Its
    first nonpositive point is found by scanning the kinks and interpolating
    on the bracketing segment.
    """
    pb = float(np.dot(p, set_.b))
    moving = d != 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        to_lower = np.where(moving, (z - set_.u) / d, np.nan)
        to_upper = np.where(moving, (z - set_.v) / d, np.nan)
    crossings = np.concatenate([to_lower, to_upper])
    crossings = np.unique(crossings[np.isfinite(crossings) & (crossings > 0.0)])

    if crossings.size == 0:
        return None  # no coordinate ever changes state: derivative is constant

    shifted = z[None, :] - crossings[:, None] * d[None, :]
    derivs = np.clip(shifted, set_.u, set_.v) @ d - pb
    nonpositive = np.flatnonzero(derivs <= 0.0)
    if nonpositive.size == 0:
        # Past the last kink only negligible-direction coordinates stay free.
        last = shifted[-1]
        free = moving & (last > set_.u) & (last < set_.v)
        slope = float(np.dot(d[free], d[free]))
        if slope <= 0.0:
            return None
        alpha = float(crossings[-1] + derivs[-1] / slope)
        return alpha if np.isfinite(alpha) else None

    j = int(nonpositive[0])
    hi_alpha, hi_deriv = float(crossings[j]), float(derivs[j])
    if j == 0:
        lo_alpha, lo_deriv = 0.0, slope_at_zero
    else:
        lo_alpha, lo_deriv = float(crossings[j - 1]), float(derivs[j - 1])
    if lo_deriv <= 0.0:
        return lo_alpha
    span = lo_deriv - hi_deriv
    if span <= 0.0:
        return hi_alpha
    return lo_alpha + lo_deriv * (hi_alpha - lo_alpha) / span


def _residual_floor(set_: BoxAffineSet, mu: np.ndarray, gram_scale: float) -> float:
    # Attainable precision of the equality residual: one ulp of the
    # multiplier already moves A @ x(mu) by about eps * |mu| * |A A^T|, and
    # evaluating the residual at box scale costs a few more ulps.
    m = set_.num_equalities
    if m == 0:
        return 0.0
    box_scale = float(
        (np.abs(set_.A) @ np.maximum(np.abs(set_.u), np.abs(set_.v)) + np.abs(set_.b)).max()
    )
    return _EPS * (gram_scale * norm_inf(mu) + (m + 2) * box_scale)


def project_box_affine(
    y: ArrayLike,
    set_: BoxAffineSet,
    config: Optional[DualAscentConfig] = None,
    initial_mu: Optional[ArrayLike] = None,
) -> BoxAffineProjectionResult:
    """Project y onto the set by maximizing the dual over the equality
    multipliers.

    Starts from mu = 0 (or ``initial_mu`` when a caller has a warm start),
    steps along the equality residual with a halving line search on the dual
    value, and stops once the residual is within tolerance.  When the
    iteration cap is hit the best iterate seen is returned with
    ``converged=False``.  A multiplier that grows past ``divergence_bound``
    while the residual stays large signals an empty or severely
    ill-conditioned set and raises ``InfeasibleSetError``.
    """
    cfg = config if config is not None else DualAscentConfig()
    y = _check_point(y, set_)
    A, b, u, v = set_.A, set_.b, set_.u, set_.v

    zero_rows = np.flatnonzero((np.abs(A).sum(axis=1) == 0.0) & (b != 0.0))
    if zero_rows.size:
        i = int(zero_rows[0])
        raise InfeasibleSetError(
            f"equality row {i} is identically zero with right-hand side {b[i]}"
        )

    m = set_.num_equalities
    abs_A = np.abs(A)
    gram_scale = float((abs_A @ abs_A.T).sum(axis=1).max()) if m else 0.0
    mu = np.zeros(m) if initial_mu is None else _check_multiplier(initial_mu, set_)
    best_mu = mu
    best_res = float("inf")
    steps = 0
    converged = False
    prev_g: Optional[np.ndarray] = None
    p: Optional[np.ndarray] = None
    while True:
        z = _shifted_point(y, A, mu)
        x = np.minimum(np.maximum(z, u), v)
        g = A @ x - b
        res = norm_inf(g)
        if res < best_res:
            best_res, best_mu = res, mu
        if res <= max(cfg.feasibility_tol, _residual_floor(set_, mu, gram_scale)):
            converged = True
            break
        if steps >= cfg.max_iterations:
            break
        if norm_inf(mu) > cfg.divergence_bound:
            raise InfeasibleSetError(
                f"equality multiplier exceeded {cfg.divergence_bound:.3e} while the "
                f"residual is still {res:.3e}; the set is empty or ill-conditioned"
            )
        # Conjugate ascent direction (restarting variant): plain gradient
        # steps zigzag for a long time in narrow curved regions of the dual,
        # while conjugate steps finish each quadratic piece in a few moves.
        if p is None or prev_g is None:
            p = g
        else:
            beta = max(
                0.0, float(np.dot(g, g - prev_g)) / float(np.dot(prev_g, prev_g))
            )
            p = g + beta * p
            if float(np.dot(g, p)) <= 0.0:
                p = g
        slope = float(np.dot(g, p))
        d = A.T @ p
        alpha = _line_maximizer(set_, z, p, d, slope)
        if alpha is None:
            # Dual unbounded along the ray: grow geometrically so an empty
            # set trips the divergence bound quickly.
            alpha = max(cfg.initial_step, 2.0 * norm_inf(mu) / max(norm_inf(p), _EPS))
            mu = mu + alpha * p
            prev_g, p = None, None  # restart conjugacy after a blind jump
        else:
            # Rounding guard: the exact step can only fail to improve the
            # dual through floating-point noise; halve it away if it does.
            for _ in range(_SAFETY_HALVINGS):
                if alpha <= 0.0 or _dual_increase(set_, z, p, d, alpha) >= 0.0:
                    break
                alpha *= cfg.backtracking_factor
            if alpha <= 0.0:
                break  # no improving step at the attainable precision
            mu = mu + alpha * p
            prev_g = g
        steps += 1

    final_mu = mu if converged else best_mu
    p = phi(final_mu, y, set_)
    return BoxAffineProjectionResult(
        x=p.x,
        mu=final_mu,
        lambda1=p.lambda1,
        lambda2=p.lambda2,
        equality_residual=norm_inf(A @ p.x - b),
        iterations=steps,
        converged=converged,
    )


def kkt_residuals(
    result: BoxAffineProjectionResult, y: ArrayLike, set_: BoxAffineSet
) -> dict[str, float]:
    """Max-norm residuals of the first-order optimality system at a result.

    Keys: ``stationarity`` for x - y - lambda1 + lambda2 + A.T @ mu,
    ``box`` for bound violations, ``equality`` for A x - b, ``dual_sign``
    for negative multiplier entries, and ``complementarity`` for the largest
    multiplier-times-slack product.
    """
    y = _check_point(y, set_)
    x, l1, l2, mu = result.x, result.lambda1, result.lambda2, result.mu
    stationarity = norm_inf(x - y - l1 + l2 + set_.A.T @ mu)
    box = set_.box_violation(x)
    equality = set_.equality_violation(x)
    dual_sign = max(
        norm_inf(np.maximum(-l1, 0.0)), norm_inf(np.maximum(-l2, 0.0))
    )
    complementarity = max(
        norm_inf(l1 * (x - set_.u)), norm_inf(l2 * (x - set_.v))
    )
    return {
        "stationarity": stationarity,
        "box": box,
        "equality": equality,
        "dual_sign": dual_sign,
        "complementarity": complementarity,
    }
