/** Browser entry point: wires DOM events to the reducer and the service
 * client.  All logic lives in the pure modules; this file only translates
 * events and mounts rendered markup.
 */

import { ApiError, ExplorerClient } from "./api.js";
import {
  axisExtents,
  clickToTarget,
  directionArrow,
  directionFromTarget,
  frontCentroid,
} from "./geometry.js";
import {
  renderAxisOptions,
  renderCompare,
  renderHistory,
  renderSampleList,
  renderScatter,
  renderSnapshotOptions,
  renderStatus,
} from "./render.js";
import type { AppEvent, AppState } from "./state.js";
import { initialState, reduce } from "./state.js";
import { compareColumn } from "./stats.js";
import type { SampleResponse } from "./types.js";

const params = new URLSearchParams(window.location.search);
const base =
  params.get("service") ??
  `http://${window.location.hostname || "127.0.0.1"}:8321`;
const client = new ExplorerClient(base);

let state: AppState = initialState;

function must(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (el === null) throw new Error(`missing element #${id}`);
  return el;
}

function dispatch(event: AppEvent): void {
  state = reduce(state, event);
  draw();
}

function draw(): void {
  (must("snapshot-select") as HTMLSelectElement).innerHTML =
    renderSnapshotOptions(state.snapshots, state.current?.id ?? null);
  const L = state.current?.n_objectives ?? 2;
  (must("axis-x") as HTMLSelectElement).innerHTML = renderAxisOptions(
    L,
    state.axes[0],
  );
  (must("axis-y") as HTMLSelectElement).innerHTML = renderAxisOptions(
    L,
    state.axes[1],
  );
  if (state.front !== null) {
    const extents = axisExtents(state.front);
    const arrow =
      state.lastSample === null
        ? null
        : directionArrow(
            state.lastSample.u_used,
            state.front.reference_point,
            state.axes,
            extents,
          );
    must("plot").innerHTML = renderScatter(
      state.front,
      state.axes,
      extents,
      state.lastSample,
      arrow,
    );
  } else {
    must("plot").innerHTML = '<p class="muted">no snapshot loaded</p>';
  }
  must("samples").innerHTML = renderSampleList(state.lastSample);
  const cols = state.compare
    .filter((i) => i < state.history.length)
    .map((i) => compareColumn(`#${i + 1}`, state.history[i]));
  must("compare").innerHTML = renderCompare(
    cols,
    state.current?.n_objectives ?? 0,
  );
  must("history").innerHTML = renderHistory(state.history, state.compare);
  must("status").innerHTML = renderStatus(state.pending, state.error);
}

function errorMessage(err: unknown): string {
  if (err instanceof ApiError) {
    return err.status > 0 ? `service error ${err.status}: ${err.message}`
      : err.message;
  }
  return String(err);
}

async function loadSnapshot(id: string): Promise<void> {
  dispatch({ kind: "select-snapshot", id });
  if (state.current === null) return;
  try {
    const [front, entries] = await Promise.all([
      client.getFront(id),
      client.getHistory(id),
    ]);
    dispatch({ kind: "front", payload: front });
    dispatch({ kind: "history", entries });
  } catch (err) {
    dispatch({ kind: "error", message: errorMessage(err) });
  }
}

function onPlotClick(ev: MouseEvent): void {
  if (state.front === null || state.current === null) return;
  const svg = document.getElementById("plot-svg");
  if (!(svg instanceof SVGSVGElement)) return;
  const rect = svg.getBoundingClientRect();
  if (rect.width <= 0 || rect.height <= 0) return;
  const vb = svg.viewBox.baseVal;
  const px = vb.x + ((ev.clientX - rect.left) / rect.width) * vb.width;
  const py = 1 - (vb.y + ((ev.clientY - rect.top) / rect.height) * vb.height);
  const extents = axisExtents(state.front);
  const yStar = clickToTarget(
    px,
    py,
    state.axes,
    extents,
    frontCentroid(state.front),
  );
  if (directionFromTarget(yStar, state.front.reference_point) === null) {
    dispatch({
      kind: "sample-error",
      message: "target equals the reference point: direction undefined",
    });
    return;
  }
  const n = Number((must("nsamples") as HTMLInputElement).value) || 64;
  const evaluate = (must("evaluate") as HTMLInputElement).checked;
  const id = state.current.id;
  dispatch({ kind: "sample-queued" });
  client
    .sample(id, { y_star: yStar, n, evaluate })
    .then((resp: SampleResponse) => {
      dispatch({
        kind: "sample-ok",
        response: resp,
        entry: { u_used: resp.u_used, n, evaluate, designs: resp.designs },
      });
    })
    .catch((err: unknown) => {
      dispatch({ kind: "sample-error", message: errorMessage(err) });
    });
}

function onAxisChange(): void {
  const ax = Number((must("axis-x") as HTMLSelectElement).value);
  const ay = Number((must("axis-y") as HTMLSelectElement).value);
  if (ax === ay) {
    // Keep the projection 2-D: push the other axis off the collision.
    const L = state.current?.n_objectives ?? 2;
    dispatch({ kind: "axes", axes: [ax, (ay + 1) % L] });
    return;
  }
  dispatch({ kind: "axes", axes: [ax, ay] });
}

function init(): void {
  must("snapshot-select").addEventListener("change", (ev) => {
    void loadSnapshot((ev.target as HTMLSelectElement).value);
  });
  must("axis-x").addEventListener("change", onAxisChange);
  must("axis-y").addEventListener("change", onAxisChange);
  must("plot").addEventListener("click", onPlotClick);
  must("history").addEventListener("click", (ev) => {
    const li = (ev.target as HTMLElement).closest("li[data-idx]");
    if (li instanceof HTMLElement && li.dataset.idx !== undefined) {
      dispatch({ kind: "toggle-compare", index: Number(li.dataset.idx) });
    }
  });
  client
    .listSnapshots()
    .then((list) => {
      dispatch({ kind: "snapshots", list });
      if (list.length > 0) void loadSnapshot(list[0].id);
    })
    .catch((err: unknown) => {
      dispatch({ kind: "error", message: errorMessage(err) });
    });
  draw();
}

init();
