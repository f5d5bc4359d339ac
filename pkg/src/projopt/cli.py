"""Command-line front end: JSON problem files in, JSON reports out.

Exit codes: 0 on success, 1 when a solver fails (infeasible, diverged,
singular), 2 on usage errors (bad flags, missing or malformed input).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .box_affine import (
    BoxAffineSet,
    DualAscentConfig,
    kkt_residuals,
    project_box_affine,
)
from .errors import InvalidInputError, SolverError
from .linalg import as_matrix, as_vector
from .lp import LpProblem, solve_lp
from .pgd import PgdConfig, linear_objective, pgd_solve, quadratic_objective
from .simplex import project_simplex_bisection

_VECTOR_FIELDS = ("y", "u", "v", "b", "c", "p", "x0")
_KNOWN_FIELDS = _VECTOR_FIELDS + ("A",)


@dataclass
class ProblemFile:
    """Validated contents of a problem file; absent fields are None."""

    y: Optional[np.ndarray] = None
    u: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None
    A: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None
    c: Optional[np.ndarray] = None
    p: Optional[np.ndarray] = None
    x0: Optional[np.ndarray] = None


def parse_problem_file(path: str) -> ProblemFile:
    """Load and validate a JSON problem file.

    Every present field must be a finite numeric list (A a list of rows) and
    the fields must be mutually dimension-consistent.
    """
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InvalidInputError(f"cannot read problem file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"problem file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise InvalidInputError("problem file must contain a JSON object")
    unknown = sorted(set(raw) - set(_KNOWN_FIELDS))
    if unknown:
        raise InvalidInputError(f"unknown field {unknown[0]!r} in problem file")

    problem = ProblemFile()
    for name in _VECTOR_FIELDS:
        if name in raw:
            setattr(problem, name, as_vector(raw[name], name))
    if "A" in raw:
        problem.A = as_matrix(raw["A"], "A")

    _check_consistency(problem)
    return problem


def _check_consistency(problem: ProblemFile) -> None:
    if (problem.u is None) != (problem.v is None):
        raise InvalidInputError("fields u and v must be provided together")
    if problem.u is not None and problem.u.shape != problem.v.shape:
        raise InvalidInputError(
            f"u has length {problem.u.size} but v has length {problem.v.size}"
        )
    if problem.u is not None:
        bad = np.flatnonzero(problem.u > problem.v)
        if bad.size:
            i = int(bad[0])
            raise InvalidInputError(
                f"u exceeds v at index {i}: {problem.u[i]} > {problem.v[i]}"
            )
    if (problem.A is None) != (problem.b is None):
        raise InvalidInputError("fields A and b must be provided together")
    if problem.A is not None and problem.A.shape[0] != problem.b.size:
        raise InvalidInputError(
            f"A has {problem.A.shape[0]} rows but b has length {problem.b.size}"
        )
    dimension = None
    for name in ("y", "u", "c", "p", "x0"):
        value = getattr(problem, name)
        if value is None:
            continue
        if dimension is None:
            dimension = (name, value.size)
        elif value.size != dimension[1]:
            raise InvalidInputError(
                f"{name} has length {value.size} but {dimension[0]} has length {dimension[1]}"
            )
    if problem.A is not None and dimension is not None and problem.A.shape[1] != dimension[1]:
        raise InvalidInputError(
            f"A has {problem.A.shape[1]} columns but {dimension[0]} has length {dimension[1]}"
        )


def _require(problem: ProblemFile, field: str, subcommand: str) -> np.ndarray:
    value = getattr(problem, field)
    if value is None:
        raise InvalidInputError(f"field {field!r} is required for {subcommand}")
    return value


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value) + 0.0, ".17g")  # +0.0 folds -0.0 into 0.0
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_format(item) for item in value) + "]"
    if isinstance(value, dict):
        parts = (f"{json.dumps(key)}: {_format(item)}" for key, item in value.items())
        return "{" + ", ".join(parts) + "}"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _emit(report: dict) -> None:
    sys.stdout.write(_format(report) + "\n")


def _simplex_residuals(x: np.ndarray) -> dict:
    return {
        "sum": abs(float(x.sum()) - 1.0),
        "nonnegativity": max(0.0, -float(x.min())),
    }


def _set_residuals(set_: BoxAffineSet, x: np.ndarray) -> dict:
    return {"equality": set_.equality_violation(x), "box": set_.box_violation(x)}


def _build_set(problem: ProblemFile, subcommand: str) -> BoxAffineSet:
    u = _require(problem, "u", subcommand)
    v = _require(problem, "v", subcommand)
    return BoxAffineSet(u=u, v=v, A=problem.A, b=problem.b)


def _check_project_simplex(problem: ProblemFile, args) -> None:
    _require(problem, "y", "project-simplex")


def _check_project_box_affine(problem: ProblemFile, args) -> None:
    for field in ("y", "u", "v"):
        _require(problem, field, "project-box-affine")


def _check_solve_lp(problem: ProblemFile, args) -> None:
    for field in ("c", "u", "v"):
        _require(problem, field, "solve-lp")


def _check_pgd(problem: ProblemFile, args) -> None:
    if problem.p is not None and problem.c is not None:
        raise InvalidInputError("pgd takes either p (quadratic) or c (linear), not both")
    if problem.p is None and problem.c is None:
        raise InvalidInputError("pgd needs field 'p' (quadratic target) or 'c' (linear cost)")
    if args.set == "box-affine":
        for field in ("u", "v"):
            _require(problem, field, "pgd with --set box-affine")


def _run_project_simplex(problem: ProblemFile, args) -> dict:
    y = _require(problem, "y", "project-simplex")
    result = project_simplex_bisection(y, tol=args.tol)
    return {
        "x": result.x,
        "mu": result.mu,
        "iterations": result.iterations,
        "converged": True,
        "residuals": _simplex_residuals(result.x),
    }


def _run_project_box_affine(problem: ProblemFile, args) -> dict:
    y = _require(problem, "y", "project-box-affine")
    set_ = _build_set(problem, "project-box-affine")
    result = project_box_affine(y, set_)
    return {
        "x": result.x,
        "mu": result.mu,
        "iterations": result.iterations,
        "converged": result.converged,
        "residuals": kkt_residuals(result, y, set_),
    }


def _run_solve_lp(problem: ProblemFile, args) -> dict:
    c = _require(problem, "c", "solve-lp")
    set_ = _build_set(problem, "solve-lp")
    report = solve_lp(LpProblem(c=c, set=set_), delta=args.delta, refine=args.refine)
    document = {
        "x": report.x,
        "objective": report.objective,
        "mu": report.projection_report.mu,
        "iterations": report.projection_report.iterations,
        "converged": report.projection_report.converged,
        "residuals": _set_residuals(set_, report.x),
        "bound": report.bound,
        "refined": report.refined,
    }
    if args.refine:
        document["active_set"] = [
            {"kind": kind, "index": index} for kind, index in report.active_set
        ]
    return document


def _run_pgd(problem: ProblemFile, args) -> dict:
    if problem.p is not None and problem.c is not None:
        raise InvalidInputError("pgd takes either p (quadratic) or c (linear), not both")
    if problem.p is not None:
        objective = quadratic_objective(problem.p)
    elif problem.c is not None:
        objective = linear_objective(problem.c)
    else:
        raise InvalidInputError("pgd needs field 'p' (quadratic target) or 'c' (linear cost)")

    if args.set == "simplex":
        def projector(point):
            return project_simplex_bisection(point, tol=args.tol).x

        x0 = problem.x0 if problem.x0 is not None else np.full(
            objective.dimension, 1.0 / objective.dimension
        )
    else:
        set_ = _build_set(problem, "pgd with --set box-affine")
        ascent = DualAscentConfig()

        def projector(point):
            return project_box_affine(point, set_, ascent).x

        x0 = problem.x0 if problem.x0 is not None else 0.5 * (set_.u + set_.v)

    config = PgdConfig(step_size=args.eta, max_iterations=args.max_iter)
    report = pgd_solve(objective, projector, x0, config)
    if args.set == "simplex":
        residuals = _simplex_residuals(report.x)
    else:
        residuals = _set_residuals(set_, report.x)
    return {
        "x": report.x,
        "objective": report.objective_trace[-1],
        "iterations": report.iterations,
        "converged": report.converged,
        "residuals": residuals,
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="projopt",
        description="Euclidean projections, projected gradient descent, and "
        "projection-based LP solving over box/affine feasible sets.",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    simplex = subparsers.add_parser(
        "project-simplex", help="project y onto the probability simplex"
    )
    simplex.add_argument("--input", required=True, help="JSON problem file with field y")
    simplex.add_argument("--tol", type=float, default=1e-10, help="bisection tolerance")
    simplex.set_defaults(handler=_run_project_simplex, checker=_check_project_simplex)

    box = subparsers.add_parser(
        "project-box-affine", help="project y onto {u <= x <= v, A x = b}"
    )
    box.add_argument("--input", required=True, help="JSON problem file with y, u, v (A, b optional)")
    box.set_defaults(handler=_run_project_box_affine, checker=_check_project_box_affine)

    lp = subparsers.add_parser(
        "solve-lp", help="minimize c @ x over {u <= x <= v, A x = b}"
    )
    lp.add_argument("--input", required=True, help="JSON problem file with c, u, v (A, b optional)")
    lp.add_argument("--delta", type=float, default=1e-6, help="certified objective gap")
    lp.add_argument(
        "--refine", action="store_true", help="re-solve the active constraints exactly"
    )
    lp.set_defaults(handler=_run_solve_lp, checker=_check_solve_lp)

    pgd = subparsers.add_parser(
        "pgd", help="projected gradient descent with a built-in objective"
    )
    pgd.add_argument(
        "--input", required=True, help="JSON problem file with p or c (plus set fields)"
    )
    pgd.add_argument("--eta", type=float, required=True, help="step size")
    pgd.add_argument("--max-iter", type=int, default=10000, help="iteration cap")
    pgd.add_argument(
        "--set",
        choices=("simplex", "box-affine"),
        default="simplex",
        help="feasible set to project onto",
    )
    pgd.add_argument(
        "--tol", type=float, default=1e-10, help="simplex bisection tolerance"
    )
    pgd.set_defaults(handler=_run_pgd, checker=_check_pgd)

    return parser


def run(argv: Optional[list[str]] = None) -> int:
    """Parse argv, dispatch, print the report; returns the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        problem = parse_problem_file(args.input)
        args.checker(problem, args)
    except SolverError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    try:
        report = args.handler(problem, args)
    except SolverError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    _emit(report)
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
