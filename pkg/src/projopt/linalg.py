"""Minimal dense linear algebra shared by the projection and LP solvers.

Vectors and matrices are plain float64 numpy arrays; ``as_vector`` /
``as_matrix`` are the validating constructors (finite entries, right rank).
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike

from .errors import (
    DimensionMismatchError,
    InvalidBoxError,
    InvalidInputError,
    SingularSystemError,
)

# Relative pivot threshold below which elimination reports a singular system.
SINGULARITY_THRESHOLD = 1e-12


def as_vector(values: ArrayLike, name: str = "vector") -> np.ndarray:
    """Return ``values`` as a 1-D float64 array, rejecting non-finite entries."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise InvalidInputError(f"{name} has a non-finite entry at index {bad}")
    return arr


def as_matrix(values: ArrayLike, name: str = "matrix") -> np.ndarray:
    """Return ``values`` as a 2-D float64 array, rejecting non-finite entries."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        rows, cols = np.nonzero(~np.isfinite(arr))
        raise InvalidInputError(
            f"{name} has a non-finite entry at ({int(rows[0])}, {int(cols[0])})"
        )
    return arr


def matvec(A: ArrayLike, x: ArrayLike) -> np.ndarray:
    """Matrix-vector product A @ x."""
    A = as_matrix(A, "A")
    x = as_vector(x, "x")
    if A.shape[1] != x.shape[0]:
        raise DimensionMismatchError(
            f"matrix has {A.shape[1]} columns but vector has length {x.shape[0]}"
        )
    return A @ x


def matvec_transpose(A: ArrayLike, mu: ArrayLike) -> np.ndarray:
    """Transposed product A.T @ mu."""
    A = as_matrix(A, "A")
    mu = as_vector(mu, "mu")
    if A.shape[0] != mu.shape[0]:
        raise DimensionMismatchError(
            f"matrix has {A.shape[0]} rows but vector has length {mu.shape[0]}"
        )
    return A.T @ mu


def clip(x: ArrayLike, u: ArrayLike, v: ArrayLike) -> np.ndarray:
    """Clamp x into the box [u, v] elementwise.

    Equivalent to taking the median of (u_i, x_i, v_i) per coordinate.
    """
    x = as_vector(x, "x")
    u = as_vector(u, "u")
    v = as_vector(v, "v")
    if not (x.shape == u.shape == v.shape):
        raise DimensionMismatchError(
            f"clip operands have lengths {x.shape[0]}, {u.shape[0]}, {v.shape[0]}"
        )
    bad = np.flatnonzero(u > v)
    if bad.size:
        i = int(bad[0])
        raise InvalidBoxError(f"lower bound exceeds upper bound at index {i}: {u[i]} > {v[i]}")
    return np.minimum(np.maximum(x, u), v)


def solve_linear_system(M: ArrayLike, rhs: ArrayLike) -> np.ndarray:
    """Solve M x = rhs by Gaussian elimination with partial (row) pivoting.

    Raises ``SingularSystemError`` when a pivot falls below
    ``SINGULARITY_THRESHOLD`` times the largest entry of the original matrix.
    """
    M = as_matrix(M, "M")
    rhs = as_vector(rhs, "rhs")
    n = M.shape[0]
    if M.shape[1] != n:
        raise DimensionMismatchError(f"matrix is {M.shape[0]}x{M.shape[1]}, not square")
    if rhs.shape[0] != n:
        raise DimensionMismatchError(
            f"matrix is {n}x{n} but right-hand side has length {rhs.shape[0]}"
        )
    if n == 0:
        return np.zeros(0)

    a = M.copy()
    b = rhs.copy()
    threshold = SINGULARITY_THRESHOLD * float(np.abs(a).max())
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) <= threshold:
            raise SingularSystemError(
                f"pivot {a[p, k]:.3e} at elimination step {k} is below threshold {threshold:.3e}"
            )
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
        factors = a[k + 1:, k] / a[k, k]
        a[k + 1:, k:] -= np.outer(factors, a[k, k:])
        b[k + 1:] -= factors * b[k]

    x = np.zeros(n)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1:] @ x[k + 1:]) / a[k, k]
    return x


def dot(x: ArrayLike, y: ArrayLike) -> float:
    """Inner product of two equal-length vectors."""
    x = as_vector(x, "x")
    y = as_vector(y, "y")
    if x.shape != y.shape:
        raise DimensionMismatchError(
            f"dot operands have lengths {x.shape[0]} and {y.shape[0]}"
        )
    return float(np.dot(x, y))


def norm2(x: ArrayLike) -> float:
    """Euclidean norm; zero for the empty vector."""
    return float(np.linalg.norm(as_vector(x, "x")))


def norm_inf(x: ArrayLike) -> float:
    """Max-absolute-entry norm; zero for the empty vector."""
    x = as_vector(x, "x")
    return float(np.abs(x).max()) if x.size else 0.0
