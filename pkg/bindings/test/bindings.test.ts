import { spawnSync } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { beforeAll, describe, expect, it } from "vitest";

import {
  projectBoxAffine,
  projectSimplex,
  solveLp,
  SolverCliError,
} from "../src/index.js";

beforeAll(() => {
  process.env.PROJOPT_CLI = process.env.PROJOPT_CLI ?? "python3 -m projopt.cli";
});

// Deterministic 32-bit PRNG so the fidelity instances are reproducible.
function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function uniform(rand: () => number, lo: number, hi: number): number {
  return lo + (hi - lo) * rand();
}

function vector(rand: () => number, n: number, lo: number, hi: number): number[] {
  return Array.from({ length: n }, () => uniform(rand, lo, hi));
}

interface BoxInstance {
  u: number[];
  v: number[];
  A?: number[][];
  b?: number[];
}

function randomBox(rand: () => number, n: number, m: number): BoxInstance {
  const u: number[] = [];
  const v: number[] = [];
  for (let i = 0; i < n; i += 1) {
    const a = uniform(rand, -2, 2);
    const b = uniform(rand, -2, 2);
    u.push(Math.min(a, b));
    v.push(Math.max(a, b) + 0.01);
  }
  if (m === 0) return { u, v };
  const A = Array.from({ length: m }, () => vector(rand, n, -2, 2));
  const inside = u.map((lo, i) => lo + (v[i] - lo) * uniform(rand, 0.1, 0.9));
  const b = A.map((row) => row.reduce((acc, aij, j) => acc + aij * inside[j], 0));
  return { u, v, A, b };
}

function runCliDirect(subcommand: string, document: object, flags: string[]) {
  const dir = mkdtempSync(join(tmpdir(), "projopt-test-"));
  const file = join(dir, "problem.json");
  try {
    writeFileSync(file, JSON.stringify(document));
    const parts = (process.env.PROJOPT_CLI ?? "projopt").split(/\s+/);
    const proc = spawnSync(
      parts[0],
      [...parts.slice(1), subcommand, "--input", file, ...flags],
      { encoding: "utf8" },
    );
    return proc;
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

describe("binding fidelity against the CLI", () => {
  it("projectSimplex matches the CLI to all serialized digits on 50 instances", () => {
    const rand = mulberry32(11);
    for (let k = 0; k < 50; k += 1) {
      const n = 1 + Math.floor(uniform(rand, 0, 8));
      const y = vector(rand, n, -5, 5);
      const bound = projectSimplex(y, 1e-10);
      const direct = runCliDirect("project-simplex", { y }, ["--tol", "1e-10"]);
      expect(direct.status).toBe(0);
      const report = JSON.parse(direct.stdout);
      expect(bound.x).toEqual(report.x);
      expect(bound.mu).toBe(report.mu);
    }
  });

  it("projectBoxAffine matches the CLI to all serialized digits on 50 instances", () => {
    const rand = mulberry32(22);
    for (let k = 0; k < 50; k += 1) {
      const n = 1 + Math.floor(uniform(rand, 0, 6));
      const m = Math.min(n, Math.floor(uniform(rand, 0, 2.999)));
      const box = randomBox(rand, n, m);
      const y = vector(rand, n, -5, 5);
      const problem = { y, ...box };
      const bound = projectBoxAffine(problem);
      const direct = runCliDirect("project-box-affine", problem, []);
      expect(direct.status).toBe(0);
      const report = JSON.parse(direct.stdout);
      expect(bound.x).toEqual(report.x);
      expect(bound.mu).toEqual(report.mu);
      expect(bound.residuals).toEqual(report.residuals);
    }
  });

  it("solveLp matches the CLI to all serialized digits on 50 instances", () => {
    const rand = mulberry32(33);
    for (let k = 0; k < 50; k += 1) {
      const n = 1 + Math.floor(uniform(rand, 0, 6));
      const m = Math.min(n, Math.floor(uniform(rand, 0, 2.999)));
      const box = randomBox(rand, n, m);
      const c = vector(rand, n, -2, 2);
      const refine = rand() > 0.5;
      const problem = { c, ...box };
      const flags = ["--delta", "1e-6", ...(refine ? ["--refine"] : [])];
      const bound = solveLp(problem, { delta: 1e-6, refine });
      const direct = runCliDirect("solve-lp", problem, flags);
      expect(direct.status).toBe(0);
      const report = JSON.parse(direct.stdout);
      expect(bound.x).toEqual(report.x);
      expect(bound.objective).toBe(report.objective);
      expect(bound.bound).toBe(report.bound);
      expect(bound.refined).toBe(report.refined);
      expect(bound.mu).toEqual(report.mu);
      if (refine) expect(bound.active_set).toEqual(report.active_set);
    }
  });
});

describe("worked examples", () => {
  it("projects (2, 0) onto the simplex", () => {
    const result = projectSimplex([2, 0]);
    expect(result.x).toEqual([1, 0]);
    expect(result.mu).toBe(1);
  });

  it("projects a feasible point onto a pure box by clipping", () => {
    const result = projectBoxAffine({ y: [5, -1], u: [0, 0], v: [1, 1] });
    expect(result.x).toEqual([1, 0]);
    expect(result.mu).toEqual([]);
  });

  it("solves the worked LP to its known vertex", () => {
    const report = solveLp(
      { c: [1, 2], u: [0, 0], v: [1, 1], A: [[1, 1]], b: [1] },
      { delta: 1e-6, refine: true },
    );
    expect(report.objective).toBeCloseTo(1.0, 6);
    expect(report.bound).toBeLessThanOrEqual(1e-6);
    expect(report.refined).toBe(true);
  });
});

describe("error propagation", () => {
  it("surfaces an inverted box with the CLI message preserved", () => {
    expect(() =>
      projectBoxAffine({ y: [0.5], u: [1], v: [0] }),
    ).toThrowError(/index 0/);
    try {
      projectBoxAffine({ y: [0.5], u: [1], v: [0] });
      expect.unreachable();
    } catch (error) {
      expect(error).toBeInstanceOf(SolverCliError);
      expect((error as SolverCliError).exitCode).toBe(2);
      expect((error as SolverCliError).message).toContain("InvalidInputError");
    }
  });

  it("surfaces an empty input as a solver error", () => {
    expect(() => projectSimplex([])).toThrowError(/empty/);
  });

  it("surfaces a bad accuracy target", () => {
    expect(() =>
      solveLp({ c: [1], u: [0], v: [1] }, { delta: -1 }),
    ).toThrowError(/delta/);
  });

  it("surfaces an infeasible equality row", () => {
    expect(() =>
      projectBoxAffine({
        y: [0.5, 0.5],
        u: [0, 0],
        v: [1, 1],
        A: [[0, 0]],
        b: [1],
      }),
    ).toThrowError(/InfeasibleSetError/);
  });
});
