/**
 * In-memory client for the pseudo-label refinement engine.
 *
 * Two calls are exposed: `pseudolabelRefine` (features + per-view class
 * probabilities -> filtered labels and statistics) and `sinkhornSolve`
 * (cost matrix + class prior -> transport plan, assignment labels, and
 * convergence info). Inputs are caller-owned typed arrays; they are
 * validated, serialized into the engine's binary formats, processed by the
 * engine CLI in a scratch directory, and the outputs decoded back. IGNORE
 * is -1 on this side of the boundary.
 */

import {
  ArrayView,
  IGNORE,
  ShapeError,
  checkView,
  decodeLabels,
  decodeMatrix,
  encodeMatrix,
} from "./format.js";
import { runEngine } from "./runner.js";

export { ArrayView, FormatError, ShapeError, IGNORE } from "./format.js";
export { EngineError } from "./runner.js";

export const VERSION = "0.1.0";

export interface SolverOptions {
  lambda?: number;
  tol?: number;
  maxIters?: number;
}

export interface RefineOptions extends SolverOptions {
  rho?: number;
  minAnchors?: number;
  mode?: "full" | "ot" | "greedy";
}

export interface RefineResult {
  /** Final pseudo-label per sample; -1 where the two views disagreed. */
  labels: Int32Array;
  stats: {
    n: number;
    numClasses: number;
    keptCount: number;
    consensusRate: number;
    perClassKept: number[];
    activeClasses: number[];
  };
}

export interface SinkhornResult {
  /** Dense N x K coupling (zero columns for inactive classes). */
  plan: Float64Array;
  rows: number;
  cols: number;
  labels: Int32Array;
  converged: boolean;
  iterations: number;
  marginalError: number;
}

function solverArgs(opts: SolverOptions): string[] {
  const args: string[] = [];
  if (opts.lambda !== undefined) args.push("--lambda", String(opts.lambda));
  if (opts.maxIters !== undefined) args.push("--max-iters", String(opts.maxIters));
  if (opts.tol !== undefined) args.push("--tol", String(opts.tol));
  return args;
}

/**
 * Refine per-view predictions into consensus-filtered pseudo-labels.
 *
 * @param features N x D feature matrix (shared across views)
 * @param views one or more N x K row-stochastic probability matrices
 */
export function pseudolabelRefine(
  features: ArrayView,
  views: ArrayView[],
  opts: RefineOptions = {},
): RefineResult {
  checkView(features, "features");
  if (views.length === 0) throw new ShapeError("need at least one probability view");
  views.forEach((v, i) => {
    checkView(v, `views[${i}]`);
    if (v.rows !== features.rows) {
      throw new ShapeError(`views[${i}] has ${v.rows} rows, features have ${features.rows}`);
    }
    if (v.cols !== views[0].cols) {
      throw new ShapeError(`views[${i}] has ${v.cols} columns, views[0] has ${views[0].cols}`);
    }
  });

  const inputs: Record<string, Uint8Array> = { "features.lgf": encodeMatrix(features) };
  const viewNames = views.map((v, i) => {
    const name = `view_${i}.lgf`;
    inputs[name] = encodeMatrix(v);
    return `@${name}`;
  });
  const args = [
    "pseudolabel",
    "--features", "@features.lgf",
    "--views", ...viewNames,
    "--out-labels", "@labels.lgl",
    ...solverArgs(opts),
  ];
  if (opts.rho !== undefined) args.push("--rho", String(opts.rho));
  if (opts.minAnchors !== undefined) args.push("--min-anchors", String(opts.minAnchors));
  if (opts.mode !== undefined) args.push("--mode", opts.mode);

  const run = runEngine(args, inputs, ["labels.lgl"]);
  const { labels } = decodeLabels(run.files.get("labels.lgl")!);
  const stats = JSON.parse(run.stdout);
  return {
    labels,
    stats: {
      n: stats.n,
      numClasses: stats.num_classes,
      keptCount: stats.kept_count,
      consensusRate: stats.consensus_rate,
      perClassKept: stats.per_class_kept,
      activeClasses: stats.active_classes,
    },
  };
}

/**
 * Solve one entropy-regularized transport problem.
 *
 * @param cost N x K cost matrix (finite in active columns)
 * @param prior K nonnegative class weights; zeros mark inactive classes
 */
export function sinkhornSolve(
  cost: ArrayView,
  prior: Float64Array | Float32Array | number[],
  opts: SolverOptions = {},
): SinkhornResult {
  checkView(cost, "cost");
  const weights = Array.from(prior, Number);
  if (weights.length !== cost.cols) {
    throw new ShapeError(`prior has ${weights.length} entries, cost has ${cost.cols} columns`);
  }
  if (weights.some((w) => !Number.isFinite(w) || w < 0)) {
    throw new ShapeError("prior weights must be finite and nonnegative");
  }
  const priorView: ArrayView = { data: Float64Array.from(weights), rows: 1, cols: weights.length };

  const run = runEngine(
    [
      "sinkhorn",
      "--cost", "@cost.lgf",
      "--prior", "@prior.lgf",
      "--out-plan", "@plan.lgf",
      "--out-labels", "@labels.lgl",
      ...solverArgs(opts),
    ],
    { "cost.lgf": encodeMatrix(cost), "prior.lgf": encodeMatrix(priorView) },
    ["plan.lgf", "labels.lgl"],
  );
  const plan = decodeMatrix(run.files.get("plan.lgf")!);
  const { labels } = decodeLabels(run.files.get("labels.lgl")!);
  const info = JSON.parse(run.stdout);
  return {
    plan: plan.data,
    rows: plan.rows,
    cols: plan.cols,
    labels,
    converged: info.converged,
    iterations: info.iterations,
    marginalError: info.marginal_error,
  };
}
