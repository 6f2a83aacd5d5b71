/** Application state as a pure reducer.
 *
 * Event handlers in main.ts translate DOM and network events into AppEvent
 * values; every transition lives here so it can be unit-tested without a
 * browser.  The front payload is held as-is — axis changes re-project the
 * same object, they never refetch.
 */

import type {
  FrontPayload,
  HistoryEntry,
  SampleResponse,
  SnapshotInfo,
} from "./types.js";

export interface AppState {
  snapshots: SnapshotInfo[];
  current: SnapshotInfo | null;
  front: FrontPayload | null;
  axes: [number, number];
  /** Most recent sample response, overlaid on the scatter. */
  lastSample: SampleResponse | null;
  history: HistoryEntry[];
  /** Indices into history selected for the compare view, oldest first. */
  compare: number[];
  /** Sample requests accepted but not yet answered (in flight + queued). */
  pending: number;
  error: string | null;
}

export const initialState: AppState = {
  snapshots: [],
  current: null,
  front: null,
  axes: [0, 1],
  lastSample: null,
  history: [],
  compare: [],
  pending: 0,
  error: null,
};

export type AppEvent =
  | { kind: "snapshots"; list: SnapshotInfo[] }
  | { kind: "select-snapshot"; id: string }
  | { kind: "front"; payload: FrontPayload }
  | { kind: "axes"; axes: [number, number] }
  | { kind: "sample-queued" }
  | { kind: "sample-ok"; response: SampleResponse; entry: HistoryEntry }
  | { kind: "sample-error"; message: string }
  | { kind: "history"; entries: HistoryEntry[] }
  | { kind: "toggle-compare"; index: number }
  | { kind: "error"; message: string }
  | { kind: "clear-error" };

export function reduce(state: AppState, event: AppEvent): AppState {
  switch (event.kind) {
    case "snapshots":
      return { ...state, snapshots: event.list };
    case "select-snapshot": {
      const info = state.snapshots.find((s) => s.id === event.id) ?? null;
      return {
        ...initialState,
        snapshots: state.snapshots,
        current: info,
        error: info === null ? `unknown snapshot ${event.id}` : null,
      };
    }
    case "front":
      return { ...state, front: event.payload, error: null };
    case "axes":
      return { ...state, axes: event.axes };
    case "sample-queued":
      return { ...state, pending: state.pending + 1, error: null };
    case "sample-ok":
      return {
        ...state,
        pending: Math.max(0, state.pending - 1),
        lastSample: event.response,
        history: [...state.history, event.entry],
        error: null,
      };
    case "sample-error":
      return {
        ...state,
        pending: Math.max(0, state.pending - 1),
        error: event.message,
      };
    case "history":
      return {
        ...state,
        history: event.entries,
        compare: state.compare.filter((i) => i < event.entries.length),
      };
    case "toggle-compare": {
      if (event.index < 0 || event.index >= state.history.length) {
        return state;
      }
      let compare: number[];
      if (state.compare.includes(event.index)) {
        compare = state.compare.filter((i) => i !== event.index);
      } else {
        compare = [...state.compare, event.index].slice(-2);
      }
      return { ...state, compare };
    }
    case "error":
      return { ...state, error: event.message };
    case "clear-error":
      return { ...state, error: null };
  }
}
