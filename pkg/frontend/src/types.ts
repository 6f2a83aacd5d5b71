/** Wire types for the explorer service JSON schema.
 *
 * Every field mirrors a service response key one-to-one; the UI never
 * invents numbers, it only re-arranges what the service sent.
 */

export type DomainDescriptor =
  | { kind: "continuous"; n_dims: number }
  | { kind: "sequence"; seq_len: number; vocab: string };

/** A design is a float vector (continuous domains) or a string (sequences). */
export type Design = number[] | string;

export interface SnapshotInfo {
  id: string;
  benchmark: string | null;
  n_objectives: number;
  domain: DomainDescriptor;
  rounds: number | null;
}

export interface FrontPoint {
  x: Design;
  y: number[];
  rank: number;
}

export interface FrontPayload {
  points: FrontPoint[];
  reference_point: number[];
  preference_dist_summary: Record<string, unknown> | null;
}

export interface SampleRequest {
  u_star?: number[];
  y_star?: number[];
  n: number;
  evaluate: boolean;
}

export interface SampledDesign {
  x: Design;
  logq: number;
  pareto_score: number | null;
  align_score: number | null;
  /** Present only when the service evaluated the design server-side. */
  y?: number[];
}

export interface SampleResponse {
  u_used: number[];
  designs: SampledDesign[];
}

export interface HistoryEntry {
  u_used: number[];
  n: number;
  evaluate: boolean;
  designs: SampledDesign[];
}

export function designLabel(x: Design): string {
  if (typeof x === "string") {
    return x;
  }
  return "[" + x.map((v) => v.toFixed(3)).join(", ") + "]";
}
