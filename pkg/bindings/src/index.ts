/**
 * Thin bindings to the projopt solver CLI.
 *
 * All numerics stay in the solver: each call writes the problem as a JSON
 * file, invokes the CLI subcommand, and parses the JSON report from stdout.
 * Solver failures surface as {@link SolverCliError} with the CLI's error
 * message preserved.
 *
 * The CLI command is taken from the PROJOPT_CLI environment variable
 * (whitespace-separated, e.g. "python3 -m projopt.cli") and defaults to the
 * installed "projopt" executable.
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

/** Raised when the solver CLI exits nonzero or cannot be launched. */
export class SolverCliError extends Error {
  constructor(
    message: string,
    readonly exitCode: number,
  ) {
    super(message);
    this.name = "SolverCliError";
  }
}

export interface SimplexProjection {
  x: number[];
  mu: number;
}

export interface BoxAffineProblem {
  y: number[];
  u: number[];
  v: number[];
  A?: number[][];
  b?: number[];
}

export interface BoxAffineProjection {
  x: number[];
  mu: number[];
  residuals: Record<string, number>;
}

export interface LpProblem {
  c: number[];
  u: number[];
  v: number[];
  A?: number[][];
  b?: number[];
}

export interface LpOptions {
  delta?: number;
  refine?: boolean;
}

export interface ActiveConstraint {
  kind: "equality" | "lower" | "upper";
  index: number;
}

/** Report of a solve-lp run; field names mirror the CLI output document. */
export interface LpReport {
  x: number[];
  objective: number;
  mu: number[];
  iterations: number;
  converged: boolean;
  residuals: Record<string, number>;
  bound: number;
  refined: boolean;
  active_set?: ActiveConstraint[];
}

function cliCommand(): string[] {
  const raw = process.env.PROJOPT_CLI ?? "projopt";
  const parts = raw.split(/\s+/).filter((part) => part.length > 0);
  if (parts.length === 0) {
    throw new SolverCliError("PROJOPT_CLI is set but empty", -1);
  }
  return parts;
}

function runCli(
  subcommand: string,
  document: Record<string, unknown>,
  flags: string[],
): any {
  const dir = mkdtempSync(join(tmpdir(), "projopt-bindings-"));
  const file = join(dir, "problem.json");
  try {
    writeFileSync(file, JSON.stringify(document));
    const [command, ...prefix] = cliCommand();
    const proc = spawnSync(
      command,
      [...prefix, subcommand, "--input", file, ...flags],
      { encoding: "utf8" },
    );
    if (proc.error) {
      throw new SolverCliError(
        `failed to launch solver CLI: ${proc.error.message}`,
        -1,
      );
    }
    if (proc.status !== 0) {
      const message = (proc.stderr || "solver CLI failed").trim();
      throw new SolverCliError(message, proc.status ?? -1);
    }
    return JSON.parse(proc.stdout);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

/** Project a point onto the probability simplex. */
export function projectSimplex(y: number[], tol?: number): SimplexProjection {
  const flags = tol === undefined ? [] : ["--tol", String(tol)];
  const report = runCli("project-simplex", { y }, flags);
  return { x: report.x, mu: report.mu };
}

/** Project a point onto {u <= x <= v, A x = b}. */
export function projectBoxAffine(
  problem: BoxAffineProblem,
): BoxAffineProjection {
  const document: Record<string, unknown> = {
    y: problem.y,
    u: problem.u,
    v: problem.v,
  };
  if (problem.A !== undefined) document.A = problem.A;
  if (problem.b !== undefined) document.b = problem.b;
  const report = runCli("project-box-affine", document, []);
  return { x: report.x, mu: report.mu, residuals: report.residuals };
}

/** Minimize c @ x over {u <= x <= v, A x = b} with a certified gap bound. */
export function solveLp(problem: LpProblem, options: LpOptions = {}): LpReport {
  const document: Record<string, unknown> = {
    c: problem.c,
    u: problem.u,
    v: problem.v,
  };
  if (problem.A !== undefined) document.A = problem.A;
  if (problem.b !== undefined) document.b = problem.b;
  const flags: string[] = [];
  if (options.delta !== undefined) flags.push("--delta", String(options.delta));
  if (options.refine) flags.push("--refine");
  return runCli("solve-lp", document, flags) as LpReport;
}
