"""Euclidean projection onto the probability simplex {x >= 0, sum(x) = 1}.

Two independent routes are provided.  The main one runs a bisection on the
scalar multiplier of the sum constraint: the projected point is
``max(y - mu, 0)`` and the residual ``sum(max(y - mu, 0)) - 1`` is monotone
in ``mu``, so a sign-preserving bracket pins the optimal multiplier.  The
second route sorts the input and thresholds it in closed form; it exists so
the two can be cross-checked against each other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .errors import InvalidInputError
from .linalg import as_vector

BISECTION_ITERATION_CAP = 200


@dataclass(frozen=True)
class SimplexProjectionResult:
    """Projected point, optimal multiplier, dual objective, iteration count."""

    x: np.ndarray
    mu: float
    dual_value: float
    iterations: int


def simplex_primal_from_dual(mu: float, y: ArrayLike) -> np.ndarray:
    """Primal point max(y - mu, 0) induced by a sum-constraint multiplier."""
    y = as_vector(y, "y")
    return np.maximum(y - mu, 0.0)


def simplex_dual_value(mu: float, y: ArrayLike) -> float:
    """Dual objective 0.5*||max(y-mu,0) - y||^2 + mu*(sum(max(y-mu,0)) - 1)."""
    y = as_vector(y, "y")
    x = np.maximum(y - mu, 0.0)
    return 0.5 * float(np.dot(x - y, x - y)) + mu * (float(x.sum()) - 1.0)


def _sum_residual(mu: float, y: np.ndarray) -> float:
    # Nonincreasing in mu; its root is the optimal multiplier.
    return float(np.maximum(y - mu, 0.0).sum()) - 1.0


def _refine_on_support(y: np.ndarray, mu: float) -> tuple[float, np.ndarray]:
    """Recompute mu exactly on the current positive support.

    On the support S the optimal multiplier is (sum(y_S) - 1)/|S|; iterating
    until S stops changing makes the sum constraint hold to machine precision
    instead of bisection accuracy.  Starting from a bracketed mu this settles
    in one or two passes.
    """
    support = y - mu > 0.0
    for _ in range(64):
        mu_new = (float(y[support].sum()) - 1.0) / int(support.sum())
        support_new = y - mu_new > 0.0
        if np.array_equal(support_new, support):
            return mu_new, support_new
        support, mu = support_new, mu_new
    return mu, support


def project_simplex_bisection(y: ArrayLike, tol: float = 1e-10) -> SimplexProjectionResult:
    """Project y onto the probability simplex via multiplier bisection.

    The bracket [max(y) - 1, max(y)] always contains the optimal multiplier:
    at the left end the largest coordinate alone contributes at least one to
    the sum, at the right end the sum is zero.
    """
    y = as_vector(y, "y")
    if y.size == 0:
        raise InvalidInputError("cannot project an empty vector onto the simplex")
    if not tol > 0.0:
        raise InvalidInputError(f"tol must be positive, got {tol}")

    top = float(y.max())
    lo, hi = top - 1.0, top
    iterations = 0
    while hi - lo > tol and iterations < BISECTION_ITERATION_CAP:
        mid = 0.5 * (lo + hi)
        h = _sum_residual(mid, y)
        if h > 0.0:
            lo = mid
        elif h < 0.0:
            hi = mid
        else:
            lo = hi = mid
        iterations += 1

    mu, support = _refine_on_support(y, 0.5 * (lo + hi))
    x = np.where(support, np.maximum(y - mu, 0.0), 0.0)
    return SimplexProjectionResult(
        x=x, mu=float(mu), dual_value=simplex_dual_value(float(mu), y), iterations=iterations
    )


def project_simplex_sort(y: ArrayLike) -> SimplexProjectionResult:
    """Exact simplex projection by sorting and thresholding.

    Sort y descending, find the largest k whose running mean leaves the k-th
    value positive after the shift (sum_{i<=k} y_(i) - 1)/k, and use that
    shift as the multiplier.
    """
    y = as_vector(y, "y")
    if y.size == 0:
        raise InvalidInputError("cannot project an empty vector onto the simplex")

    sorted_desc = np.sort(y)[::-1]
    cumulative = np.cumsum(sorted_desc)
    counts = np.arange(1, y.size + 1)
    positive = sorted_desc - (cumulative - 1.0) / counts > 0.0
    k = int(np.nonzero(positive)[0][-1]) + 1
    mu = (float(cumulative[k - 1]) - 1.0) / k
    x = np.maximum(y - mu, 0.0)
    return SimplexProjectionResult(
        x=x, mu=float(mu), dual_value=simplex_dual_value(float(mu), y), iterations=0
    )
