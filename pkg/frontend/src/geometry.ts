/** Pure objective-space geometry: axis extents, 2-D projection for the
 * scatter, click inversion back to objective coordinates, and the rendered
 * preference arrow.
 *
 * Projection works in normalized coordinates: each displayed axis is mapped
 * affinely onto [0, 1] using an extent covering the dataset and the
 * reference point.  Axis changes are a client-side re-projection of the same
 * payload; nothing here fetches.
 */

import type { FrontPayload } from "./types.js";

export interface Extent {
  lo: number;
  hi: number;
}

const PAD_FRACTION = 0.05;

/** Per-objective extents over all dataset points plus the reference point,
 * padded so boundary points do not sit on the plot edge.  A degenerate axis
 * (single value) gets a symmetric unit pad so normalization stays finite.
 */
export function axisExtents(front: FrontPayload): Extent[] {
  const L = front.reference_point.length;
  const extents: Extent[] = [];
  for (let k = 0; k < L; k++) {
    let lo = front.reference_point[k];
    let hi = front.reference_point[k];
    for (const p of front.points) {
      if (p.y[k] < lo) lo = p.y[k];
      if (p.y[k] > hi) hi = p.y[k];
    }
    const span = hi - lo;
    const pad = span > 0 ? PAD_FRACTION * span : 0.5;
    extents.push({ lo: lo - pad, hi: hi + pad });
  }
  return extents;
}

export function normalizeValue(v: number, e: Extent): number {
  const span = e.hi - e.lo;
  if (span <= 0) return 0.5;
  return (v - e.lo) / span;
}

export function denormalizeValue(t: number, e: Extent): number {
  return e.lo + t * (e.hi - e.lo);
}

/** Project an L-dim objective vector onto the selected axis pair, in
 * normalized [0, 1] plot coordinates (px along axes[0], py along axes[1]).
 */
export function projectPoint(
  y: number[],
  axes: [number, number],
  extents: Extent[],
): { px: number; py: number } {
  return {
    px: normalizeValue(y[axes[0]], extents[axes[0]]),
    py: normalizeValue(y[axes[1]], extents[axes[1]]),
  };
}

/** Invert a plot click into a full objective-space target.
 *
 * The two displayed coordinates come from the click; hidden axes (L > 2)
 * are filled from `fill`, conventionally the front centroid, so the target
 * stays inside the observed objective region.
 */
export function clickToTarget(
  px: number,
  py: number,
  axes: [number, number],
  extents: Extent[],
  fill: number[],
): number[] {
  const y = fill.slice();
  y[axes[0]] = denormalizeValue(px, extents[axes[0]]);
  y[axes[1]] = denormalizeValue(py, extents[axes[1]]);
  return y;
}

/** Per-objective mean of the dataset, used to fill hidden axes on click. */
export function frontCentroid(front: FrontPayload): number[] {
  const L = front.reference_point.length;
  const mean = new Array<number>(L).fill(0);
  if (front.points.length === 0) {
    return front.reference_point.slice();
  }
  for (const p of front.points) {
    for (let k = 0; k < L; k++) mean[k] += p.y[k];
  }
  return mean.map((v) => v / front.points.length);
}

/** Preference direction implied by a target: (y* - r) / ||y* - r||.
 * Returns null for a degenerate click exactly at the reference point.
 */
export function directionFromTarget(
  yStar: number[],
  r: number[],
): number[] | null {
  const d = yStar.map((v, k) => v - r[k]);
  const norm = Math.hypot(...d);
  if (norm <= 1e-12) return null;
  return d.map((v) => v / norm);
}

export interface Arrow {
  x0: number;
  y0: number;
  dx: number;
  dy: number;
}

/** The rendered preference arrow: anchored at the normalized reference
 * point, pointing along the direction's projection onto the displayed axis
 * pair, rescaled per-axis like the points, and always exactly unit length
 * in normalized plot coordinates.  Returns null when the direction is
 * orthogonal to the displayed pair (nothing meaningful to draw).
 */
export function directionArrow(
  u: number[],
  r: number[],
  axes: [number, number],
  extents: Extent[],
): Arrow | null {
  const anchor = projectPoint(r, axes, extents);
  const spanA = extents[axes[0]].hi - extents[axes[0]].lo;
  const spanB = extents[axes[1]].hi - extents[axes[1]].lo;
  const dx = spanA > 0 ? u[axes[0]] / spanA : 0;
  const dy = spanB > 0 ? u[axes[1]] / spanB : 0;
  const norm = Math.hypot(dx, dy);
  if (norm <= 1e-12) return null;
  return { x0: anchor.px, y0: anchor.py, dx: dx / norm, dy: dy / norm };
}

/** All unordered axis pairs for an L-objective snapshot, lexicographic. */
export function axisPairs(L: number): Array<[number, number]> {
  const pairs: Array<[number, number]> = [];
  for (let a = 0; a < L; a++) {
    for (let b = a + 1; b < L; b++) pairs.push([a, b]);
  }
  return pairs;
}
