/** Markup builders: every view is a pure function from state slices to an
 * HTML/SVG string, so rendering is testable without a DOM.  main.ts mounts
 * the strings and attaches event listeners.
 *
 * The scatter draws the full dataset with rank-1 points emphasized, the
 * latest evaluated samples colored by alignment-classifier score, the
 * reference point, and the unit-length preference arrow.
 */

import type { Arrow, Extent } from "./geometry.js";
import { projectPoint } from "./geometry.js";
import type { CompareColumn } from "./stats.js";
import type {
  FrontPayload,
  HistoryEntry,
  SampleResponse,
  SnapshotInfo,
} from "./types.js";
import { designLabel } from "./types.js";

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Color for a log alignment score: exp(score) in [0, 1] sweeps a cold
 * blue (unaligned) to warm orange (aligned) hue.  Null scores render gray.
 */
export function alignColor(logScore: number | null): string {
  if (logScore === null) return "hsl(0, 0%, 60%)";
  const p = Math.exp(Math.min(logScore, 0));
  const hue = 215 - 190 * p;
  return `hsl(${hue.toFixed(0)}, 75%, 48%)`;
}

function flip(py: number): number {
  return 1 - py;
}

const VIEWBOX = "-0.25 -0.25 1.5 1.5";

export function renderScatter(
  front: FrontPayload,
  axes: [number, number],
  extents: Extent[],
  overlay: SampleResponse | null,
  arrow: Arrow | null,
): string {
  const parts: string[] = [];
  parts.push(
    `<svg id="plot-svg" viewBox="${VIEWBOX}" ` +
      `xmlns="http://www.w3.org/2000/svg">`,
    `<defs><marker id="arrowhead" markerWidth="8" markerHeight="8" ` +
      `refX="6" refY="3" orient="auto">` +
      `<path d="M0,0 L6,3 L0,6 z" fill="#b3261e"/></marker></defs>`,
    `<rect x="0" y="0" width="1" height="1" class="plot-bg"/>`,
  );
  for (const p of front.points) {
    const { px, py } = projectPoint(p.y, axes, extents);
    const cls = p.rank === 1 ? "pt front" : "pt dominated";
    const r = p.rank === 1 ? 0.016 : 0.009;
    parts.push(
      `<circle class="${cls}" cx="${px.toFixed(4)}" ` +
        `cy="${flip(py).toFixed(4)}" r="${r}">` +
        `<title>${escapeHtml(designLabel(p.x))} rank ${p.rank}\n` +
        `y = [${p.y.map((v) => v.toPrecision(5)).join(", ")}]</title>` +
        `</circle>`,
    );
  }
  if (overlay !== null) {
    for (const d of overlay.designs) {
      if (d.y === undefined) continue;
      const { px, py } = projectPoint(d.y, axes, extents);
      parts.push(
        `<circle class="pt sample" cx="${px.toFixed(4)}" ` +
          `cy="${flip(py).toFixed(4)}" r="0.012" ` +
          `fill="${alignColor(d.align_score)}">` +
          `<title>${escapeHtml(designLabel(d.x))}\n` +
          `y = [${d.y.map((v) => v.toPrecision(5)).join(", ")}]</title>` +
          `</circle>`,
      );
    }
  }
  const ref = projectPoint(front.reference_point, axes, extents);
  parts.push(
    `<path class="refpoint" d="M ${(ref.px - 0.02).toFixed(4)} ` +
      `${flip(ref.py).toFixed(4)} L ${(ref.px + 0.02).toFixed(4)} ` +
      `${flip(ref.py).toFixed(4)} M ${ref.px.toFixed(4)} ` +
      `${(flip(ref.py) - 0.02).toFixed(4)} L ${ref.px.toFixed(4)} ` +
      `${(flip(ref.py) + 0.02).toFixed(4)}"/>`,
  );
  if (arrow !== null) {
    const x2 = arrow.x0 + arrow.dx;
    const y2 = flip(arrow.y0) - arrow.dy;
    parts.push(
      `<line class="pref-arrow" x1="${arrow.x0.toFixed(6)}" ` +
        `y1="${flip(arrow.y0).toFixed(6)}" x2="${x2.toFixed(6)}" ` +
        `y2="${y2.toFixed(6)}" marker-end="url(#arrowhead)"/>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}

export function renderSampleList(overlay: SampleResponse | null): string {
  if (overlay === null) {
    return '<p class="muted">click the plot to sample toward a target</p>';
  }
  const rows = overlay.designs
    .map((d) => {
      const prob = (s: number | null) =>
        s === null ? "—" : Math.exp(Math.min(s, 0)).toFixed(3);
      const y =
        d.y === undefined
          ? "—"
          : d.y.map((v) => v.toPrecision(4)).join(", ");
      return (
        `<tr><td class="design">${escapeHtml(designLabel(d.x))}</td>` +
        `<td>${d.logq.toFixed(2)}</td>` +
        `<td>${prob(d.pareto_score)}</td>` +
        `<td>${prob(d.align_score)}</td>` +
        `<td>${y}</td></tr>`
      );
    })
    .join("");
  const u = overlay.u_used.map((v) => v.toFixed(3)).join(", ");
  return (
    `<p>u&#9733; = [${u}]</p>` +
    `<table><thead><tr><th>design</th><th>log q</th>` +
    `<th>P(front)</th><th>P(align)</th><th>y</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

function statsCell(s: { mean: number; min: number; max: number }): string {
  return (
    `${s.mean.toPrecision(5)}<span class="range"> ` +
    `[${s.min.toPrecision(4)}, ${s.max.toPrecision(4)}]</span>`
  );
}

/** Side-by-side comparison of two history entries.
 *
 * Both evaluated: one row per objective (mean with min/max range, larger
 * mean bolded).  Otherwise: classifier-score rows only.
 */
export function renderCompare(
  cols: CompareColumn[],
  nObjectives: number,
): string {
  if (cols.length < 2) {
    return '<p class="muted">select two history entries to compare</p>';
  }
  const [a, b] = cols;
  const head =
    `<thead><tr><th></th><th>${escapeHtml(a.label)}</th>` +
    `<th>${escapeHtml(b.label)}</th></tr></thead>`;
  const uRow =
    `<tr><td>u&#9733;</td>` +
    `<td>[${a.u_used.map((v) => v.toFixed(3)).join(", ")}]</td>` +
    `<td>[${b.u_used.map((v) => v.toFixed(3)).join(", ")}]</td></tr>`;
  const rows: string[] = [uRow];
  if (a.objectives !== null && b.objectives !== null) {
    for (let k = 0; k < nObjectives; k++) {
      const sa = a.objectives[k];
      const sb = b.objectives[k];
      const wrapA = sa.mean > sb.mean ? "hi" : "lo";
      const wrapB = sb.mean > sa.mean ? "hi" : "lo";
      rows.push(
        `<tr><td>f${k + 1}</td>` +
          `<td class="${wrapA}">${statsCell(sa)}</td>` +
          `<td class="${wrapB}">${statsCell(sb)}</td></tr>`,
      );
    }
  } else {
    rows.push(
      `<tr><td colspan="3" class="muted">unevaluated entry: ` +
        `classifier scores only</td></tr>`,
    );
    const scoreRow = (
      name: string,
      va: CompareColumn["paretoScore"],
      vb: CompareColumn["paretoScore"],
    ) =>
      `<tr><td>${name}</td>` +
      `<td>${va === null ? "—" : statsCell(va)}</td>` +
      `<td>${vb === null ? "—" : statsCell(vb)}</td></tr>`;
    rows.push(scoreRow("log P(front)", a.paretoScore, b.paretoScore));
    rows.push(scoreRow("log P(align)", a.alignScore, b.alignScore));
  }
  return `<table>${head}<tbody>${rows.join("")}</tbody></table>`;
}

export function renderHistory(
  entries: HistoryEntry[],
  selection: number[],
): string {
  if (entries.length === 0) {
    return '<p class="muted">no samples yet</p>';
  }
  const items = entries
    .map((e, i) => {
      const cls = selection.includes(i) ? "hist selected" : "hist";
      const u = e.u_used.map((v) => v.toFixed(3)).join(", ");
      const flag = e.evaluate ? " &#10003;eval" : "";
      return (
        `<li class="${cls}" data-idx="${i}">#${i + 1} ` +
        `u=[${u}] n=${e.n}${flag}</li>`
      );
    })
    .join("");
  return `<ul class="history-list">${items}</ul>`;
}

export function renderSnapshotOptions(
  list: SnapshotInfo[],
  currentId: string | null,
): string {
  return list
    .map((s) => {
      const sel = s.id === currentId ? " selected" : "";
      const label = `${s.id} (${s.benchmark ?? "?"}, L=${s.n_objectives})`;
      return (
        `<option value="${escapeHtml(s.id)}"${sel}>` +
        `${escapeHtml(label)}</option>`
      );
    })
    .join("");
}

export function renderAxisOptions(L: number, selected: number): string {
  const opts: string[] = [];
  for (let k = 0; k < L; k++) {
    const sel = k === selected ? " selected" : "";
    opts.push(`<option value="${k}"${sel}>f${k + 1}</option>`);
  }
  return opts.join("");
}

export function renderStatus(pending: number, error: string | null): string {
  if (error !== null) {
    return `<span class="error">${escapeHtml(error)}</span>`;
  }
  if (pending > 0) {
    const queued = pending > 1 ? ` (+${pending - 1} queued)` : "";
    return `<span class="busy">sampling&#8230;${queued}</span>`;
  }
  return '<span class="idle">ready</span>';
}
