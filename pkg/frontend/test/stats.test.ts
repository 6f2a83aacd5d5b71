import { describe, expect, it } from "vitest";

import {
  compareColumn,
  meanOrdering,
  perObjectiveStats,
  summarize,
} from "../src/stats.js";
import type { HistoryEntry, SampledDesign } from "../src/types.js";

function design(
  y: number[] | undefined,
  pareto: number | null = -0.5,
  align: number | null = -1.0,
): SampledDesign {
  const d: SampledDesign = {
    x: "AAA",
    logq: -2.0,
    pareto_score: pareto,
    align_score: align,
  };
  if (y !== undefined) d.y = y;
  return d;
}

function entry(designs: SampledDesign[], evaluate = true): HistoryEntry {
  return { u_used: [1, 0], n: designs.length, evaluate, designs };
}

describe("summarize", () => {
  it("computes mean, min, max", () => {
    expect(summarize([3, -1, 4, 2])).toEqual({ mean: 2, min: -1, max: 4 });
  });

  it("throws on an empty list", () => {
    expect(() => summarize([])).toThrow(/empty/);
  });
});

describe("perObjectiveStats", () => {
  it("summarizes column-wise", () => {
    const stats = perObjectiveStats([
      [1, 10],
      [3, 20],
    ]);
    expect(stats[0]).toEqual({ mean: 2, min: 1, max: 3 });
    expect(stats[1]).toEqual({ mean: 15, min: 10, max: 20 });
  });
});

describe("compareColumn", () => {
  it("summarizes objectives when every design is evaluated", () => {
    const col = compareColumn(
      "A",
      entry([design([1, 5]), design([3, 7])]),
    );
    expect(col.evaluated).toBe(true);
    expect(col.objectives).not.toBeNull();
    expect(col.objectives![0]).toEqual({ mean: 2, min: 1, max: 3 });
    expect(col.objectives![1]).toEqual({ mean: 6, min: 5, max: 7 });
    expect(col.n).toBe(2);
  });

  it("falls back to classifier scores when any design lacks y", () => {
    const col = compareColumn(
      "B",
      entry([design([1, 5]), design(undefined, -0.2, -0.4)]),
    );
    expect(col.evaluated).toBe(false);
    expect(col.objectives).toBeNull();
    expect(col.paretoScore).not.toBeNull();
    expect(col.alignScore).not.toBeNull();
    expect(col.paretoScore!.min).toBeCloseTo(-0.5, 12);
    expect(col.paretoScore!.max).toBeCloseTo(-0.2, 12);
  });

  it("handles entries whose scores are all null", () => {
    const col = compareColumn("C", entry([design(undefined, null, null)]));
    expect(col.evaluated).toBe(false);
    expect(col.paretoScore).toBeNull();
    expect(col.alignScore).toBeNull();
  });

  it("produces identical columns for identical entries", () => {
    const e = entry([design([2, 2]), design([4, 0])]);
    const a = compareColumn("A", e);
    const b = compareColumn("B", e);
    expect(a.objectives).toEqual(b.objectives);
    expect(a.paretoScore).toEqual(b.paretoScore);
    expect(a.alignScore).toEqual(b.alignScore);
  });
});

describe("meanOrdering", () => {
  it("flips between columns sampled toward opposite objectives", () => {
    // Column A points at objective 1: its designs do better on f1.
    const a = compareColumn(
      "A",
      entry([design([10, 1]), design([8, 0])]),
    );
    const b = compareColumn(
      "B",
      entry([design([2, 6]), design([0, 8])]),
    );
    expect(meanOrdering(a, b, 0)).toBe(1);
    expect(meanOrdering(a, b, 1)).toBe(-1);
    expect(meanOrdering(b, a, 0)).toBe(-1);
  });

  it("returns 0 for equal means", () => {
    const e = entry([design([3, 3])]);
    const a = compareColumn("A", e);
    expect(meanOrdering(a, a, 0)).toBe(0);
  });

  it("requires evaluated columns", () => {
    const a = compareColumn("A", entry([design([1, 1])]));
    const b = compareColumn("B", entry([design(undefined)]));
    expect(() => meanOrdering(a, b, 0)).toThrow(/evaluated/);
  });
});
