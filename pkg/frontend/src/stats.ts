/** Pure statistics for the compare view: per-objective mean/min/max over a
 * history entry's designs, with a scores-only fallback when an entry was
 * sampled without evaluation.
 */

import type { HistoryEntry, SampledDesign } from "./types.js";

export interface ObjectiveStats {
  mean: number;
  min: number;
  max: number;
}

export interface CompareColumn {
  label: string;
  u_used: number[];
  n: number;
  /** True when every design in the entry carries a service evaluation. */
  evaluated: boolean;
  /** Per-objective stats over evaluated designs; null when not evaluated. */
  objectives: ObjectiveStats[] | null;
  paretoScore: ObjectiveStats | null;
  alignScore: ObjectiveStats | null;
}

export function summarize(values: number[]): ObjectiveStats {
  if (values.length === 0) {
    throw new Error("cannot summarize an empty value list");
  }
  let lo = values[0];
  let hi = values[0];
  let total = 0;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
    total += v;
  }
  return { mean: total / values.length, min: lo, max: hi };
}

/** Column-wise mean/min/max of a list of equal-length vectors. */
export function perObjectiveStats(ys: number[][]): ObjectiveStats[] {
  if (ys.length === 0) {
    throw new Error("cannot summarize an empty objective list");
  }
  const L = ys[0].length;
  const out: ObjectiveStats[] = [];
  for (let k = 0; k < L; k++) {
    out.push(summarize(ys.map((y) => y[k])));
  }
  return out;
}

function scoreStats(
  designs: SampledDesign[],
  key: "pareto_score" | "align_score",
): ObjectiveStats | null {
  const vals = designs
    .map((d) => d[key])
    .filter((v): v is number => v !== null && v !== undefined);
  return vals.length > 0 ? summarize(vals) : null;
}

/** Build one side of the compare table from a history entry.
 *
 * An entry counts as evaluated only when every design carries a `y`; mixed
 * or score-only entries fall back to classifier-score statistics so the
 * table never mixes evaluated and unevaluated numbers in one column.
 */
export function compareColumn(
  label: string,
  entry: HistoryEntry,
): CompareColumn {
  const ys = entry.designs
    .map((d) => d.y)
    .filter((y): y is number[] => y !== undefined);
  const evaluated =
    entry.designs.length > 0 && ys.length === entry.designs.length;
  return {
    label,
    u_used: entry.u_used,
    n: entry.designs.length,
    evaluated,
    objectives: evaluated ? perObjectiveStats(ys) : null,
    paretoScore: scoreStats(entry.designs, "pareto_score"),
    alignScore: scoreStats(entry.designs, "align_score"),
  };
}

/** Sign of (a - b) on mean objective k: +1, -1, or 0.  Requires both
 * columns evaluated; the caller decides what to render otherwise.
 */
export function meanOrdering(
  a: CompareColumn,
  b: CompareColumn,
  k: number,
): -1 | 0 | 1 {
  if (a.objectives === null || b.objectives === null) {
    throw new Error("meanOrdering needs two evaluated columns");
  }
  const diff = a.objectives[k].mean - b.objectives[k].mean;
  if (diff > 0) return 1;
  if (diff < 0) return -1;
  return 0;
}
