"""Projected gradient descent with a pluggable projection operator.

The driver is set-agnostic: each step moves against the gradient and hands
the result to a projector callable, so the same loop serves the simplex and
the box-plus-equalities set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike

from .errors import DivergedError, InvalidInputError
from .linalg import as_vector

Projector = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SmoothObjective:
    """Smooth objective given by value and gradient callables of dimension n."""

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    dimension: int


def quadratic_objective(target: ArrayLike) -> SmoothObjective:
    """Objective 0.5*||x - target||^2."""
    p = as_vector(target, "target")
    return SmoothObjective(
        value=lambda x: 0.5 * float(np.dot(x - p, x - p)),
        gradient=lambda x: x - p,
        dimension=p.size,
    )


def linear_objective(cost: ArrayLike) -> SmoothObjective:
    """Objective cost @ x."""
    c = as_vector(cost, "cost")
    return SmoothObjective(
        value=lambda x: float(np.dot(c, x)),
        gradient=lambda x: c.copy(),
        dimension=c.size,
    )


@dataclass(frozen=True)
class PgdConfig:
    """Step size, iteration cap, and the step-norm convergence threshold."""

    step_size: float
    max_iterations: int = 10000
    convergence_tol: float = 1e-10

    def __post_init__(self) -> None:
        if not self.step_size > 0.0:
            raise InvalidInputError(f"step_size must be positive, got {self.step_size}")
        if self.max_iterations < 1:
            raise InvalidInputError(
                f"max_iterations must be at least 1, got {self.max_iterations}"
            )
        if self.convergence_tol < 0.0:
            raise InvalidInputError(
                f"convergence_tol must be nonnegative, got {self.convergence_tol}"
            )


@dataclass(frozen=True)
class PgdReport:
    x: np.ndarray
    iterations: int
    converged: bool
    objective_trace: list[float]
    final_step_norm: float


def pgd_step(
    x_t: np.ndarray, objective: SmoothObjective, eta: float, projector: Projector
) -> np.ndarray:
    """One projected gradient step: projector(x_t - eta * grad f(x_t))."""
    g = np.asarray(objective.gradient(x_t), dtype=float)
    if not np.all(np.isfinite(g)):
        raise DivergedError("gradient has non-finite entries")
    return projector(x_t - eta * g)


def pgd_solve(
    objective: SmoothObjective,
    projector: Projector,
    x0: ArrayLike,
    config: PgdConfig,
) -> PgdReport:
    """Iterate projected gradient steps until the step norm drops below tol.

    The initial point is projected once before the loop, so any x0 of the
    right dimension is accepted.  The objective trace holds one value per
    iterate including the starting point.
    """
    x = projector(as_vector(x0, "x0"))
    trace = [float(objective.value(x))]
    if not np.isfinite(trace[0]):
        raise DivergedError("objective is non-finite at iteration 0")

    converged = False
    step_norm = float("inf")
    iterations = 0
    for t in range(1, config.max_iterations + 1):
        x_next = pgd_step(x, objective, config.step_size, projector)
        value = float(objective.value(x_next))
        trace.append(value)
        if not np.isfinite(value):
            raise DivergedError(f"objective became non-finite at iteration {t}")
        step_norm = float(np.linalg.norm(x_next - x))
        x = x_next
        iterations = t
        if step_norm <= config.convergence_tol:
            converged = True
            break

    return PgdReport(
        x=x,
        iterations=iterations,
        converged=converged,
        objective_trace=trace,
        final_step_norm=step_norm,
    )
