/** Figure assembly: experiment CSVs in, SVG out.
 *
 * No statistics happen here.  Series points, bar heights, and whisker spans
 * are copied from CSV cells, and each mark carries its source value in a
 * data- attribute so a reader (or a test) can trace every plotted number
 * back to the file it came from.
 */

import { basename } from "path";
import { writeFileSync } from "fs";

import { SweepRow, readAggregateCsv, readSweepCsv } from "./csv.js";
import { PALETTE, linearScale, niceTicks, px, svgDocument, tag, text } from "./svg.js";

export type FigureKind = "line-sweep" | "bar-comparison";

export interface FigureSpec {
  kind: FigureKind;
  /** Sweep figures take one CSV per panel; comparisons take exactly one. */
  inputs: string[];
  output: string;
  title?: string;
  xLabel?: string;
  yLabel?: string;
}

const PLOT_W = 250;
const PLOT_H = 170;
const MARGIN = { l: 48, r: 12, t: 30, b: 34 };
const PANEL_W = MARGIN.l + PLOT_W + MARGIN.r;

// ---------------------------------------------------------------------------
// Line-sweep panels.

interface Series {
  key: string;
  color: string;
  points: SweepRow[];
  shaded: boolean;
}

interface Panel {
  title: string;
  xLabel: string;
  xValues: string[];
  series: Series[];
  yMax: number;
}

/** One panel per sweep file; x is whichever column actually varies. */
function buildPanel(path: string): Panel {
  const rows = readSweepCsv(path);
  const betas = [...new Set(rows.map((r) => r.beta.raw))];
  const ns = [...new Set(rows.map((r) => r.nSamples).filter((s) => s !== ""))];
  const useN = betas.length <= 1 && ns.length > 1;
  const xOf = (r: SweepRow) => (useN ? r.nSamples : r.beta.raw);
  const xValues = [...new Set(rows.map(xOf))].sort((a, b) => Number(a) - Number(b));

  const groups = new Map<string, SweepRow[]>();
  for (const r of rows) {
    const key = `${r.strategy} s=${r.demoAngle.raw.slice(0, 5)}`;
    const bucket = groups.get(key) ?? [];
    bucket.push(r);
    groups.set(key, bucket);
  }
  const series = [...groups.entries()].map(([key, points], i) => ({
    key,
    color: PALETTE[i % PALETTE.length],
    points: points.slice().sort((a, b) => Number(xOf(a)) - Number(xOf(b))),
    shaded: points.some((p) => p.stdError.value > 0),
  }));
  const yMax = Math.max(
    ...rows.map((r) => r.meanBeliefError.value + r.stdError.value),
    1e-9,
  );
  return {
    title: basename(path).replace(/\.csv$/, ""),
    xLabel: useN ? "draws per estimate" : "rationality beta",
    xValues,
    series,
    yMax,
  };
}

function renderPanel(panel: Panel, offsetX: number, yLabel: string): string {
  // Sweep grids are short and log-like, so x positions are ordinal slots.
  const slot = new Map(panel.xValues.map((v, i) => [v, i]));
  const xPos = (raw: string) =>
    MARGIN.l +
    ((slot.get(raw)! + 0.5) / panel.xValues.length) * PLOT_W;
  const yTicks = niceTicks(panel.yMax, 4);
  const yTop = yTicks[yTicks.length - 1];
  const y = linearScale([0, yTop], [MARGIN.t + PLOT_H, MARGIN.t]);

  const parts: string[] = [];
  parts.push(text(MARGIN.l, MARGIN.t - 12, panel.title, { "font-weight": "bold" }));
  // Axes.
  parts.push(tag("line", { x1: MARGIN.l, y1: y(0), x2: MARGIN.l + PLOT_W, y2: y(0), stroke: "#333" }));
  parts.push(tag("line", { x1: MARGIN.l, y1: y(0), x2: MARGIN.l, y2: y(yTop), stroke: "#333" }));
  for (const t of yTicks) {
    parts.push(tag("line", { x1: MARGIN.l - 3, y1: y(t), x2: MARGIN.l, y2: y(t), stroke: "#333" }));
    parts.push(text(MARGIN.l - 6, y(t) + 3.5, String(t), { "text-anchor": "end", "font-size": "9" }));
  }
  for (const v of panel.xValues) {
    parts.push(tag("line", { x1: xPos(v), y1: y(0), x2: xPos(v), y2: y(0) + 3, stroke: "#333" }));
    parts.push(text(xPos(v), y(0) + 13, v, { "text-anchor": "middle", "font-size": "9" }));
  }
  parts.push(text(MARGIN.l + PLOT_W / 2, y(0) + 26, panel.xLabel, { "text-anchor": "middle" }));
  parts.push(
    text(12, MARGIN.t + PLOT_H / 2, yLabel, {
      "text-anchor": "middle",
      transform: `rotate(-90 12 ${px(MARGIN.t + PLOT_H / 2)})`,
    }),
  );

  for (const s of panel.series) {
    if (s.shaded) {
      const upper = s.points.map(
        (p) => `${px(xPos(xRaw(panel, p)))},${px(y(p.meanBeliefError.value + p.stdError.value))}`,
      );
      const lower = s.points
        .slice()
        .reverse()
        .map(
          (p) => `${px(xPos(xRaw(panel, p)))},${px(y(p.meanBeliefError.value - p.stdError.value))}`,
        );
      parts.push(
        tag("polygon", {
          class: "band",
          "data-series": s.key,
          points: [...upper, ...lower].join(" "),
          fill: s.color,
          opacity: "0.18",
        }),
      );
    }
    parts.push(
      tag("polyline", {
        class: "series",
        "data-series": s.key,
        points: s.points
          .map((p) => `${px(xPos(xRaw(panel, p)))},${px(y(p.meanBeliefError.value))}`)
          .join(" "),
        fill: "none",
        stroke: s.color,
        "stroke-width": "1.5",
      }),
    );
    for (const p of s.points) {
      parts.push(
        tag("circle", {
          class: "pt",
          cx: xPos(xRaw(panel, p)),
          cy: y(p.meanBeliefError.value),
          r: 2.4,
          fill: s.color,
          "data-series": s.key,
          "data-x": xRaw(panel, p),
          "data-y": p.meanBeliefError.raw,
          "data-stderr": p.stdError.raw,
        }),
      );
    }
  }
  // Legend, two columns under the plot.
  const perCol = Math.ceil(panel.series.length / 2);
  panel.series.forEach((s, i) => {
    const col = Math.floor(i / perCol);
    const row = i % perCol;
    const lx = MARGIN.l + col * (PLOT_W / 2);
    const ly = MARGIN.t + PLOT_H + 44 + row * 12;
    parts.push(tag("line", { x1: lx, y1: ly - 3, x2: lx + 14, y2: ly - 3, stroke: s.color, "stroke-width": "2" }));
    parts.push(text(lx + 18, ly, s.key, { "font-size": "9" }));
  });
  return tag("g", { class: "panel", transform: `translate(${px(offsetX)} 0)`, "data-title": panel.title }, parts.join("\n"));
}

function xRaw(panel: Panel, p: SweepRow): string {
  return panel.xLabel.startsWith("draws") ? p.nSamples : p.beta.raw;
}

function renderLineSweep(spec: FigureSpec): string {
  if (spec.inputs.length < 1) {
    throw new Error("line-sweep figure needs at least one sweep CSV");
  }
  const panels = spec.inputs.map(buildPanel);
  const legendRows = Math.max(...panels.map((p) => Math.ceil(p.series.length / 2)));
  const height = MARGIN.t + PLOT_H + MARGIN.b + 22 + legendRows * 12 + 8;
  const width = PANEL_W * panels.length + 8;
  const body = panels
    .map((p, i) => renderPanel(p, i * PANEL_W + 4, spec.yLabel ?? "|belief error|"))
    .join("\n");
  const title = spec.title
    ? text(width / 2, 14, spec.title, { "text-anchor": "middle", "font-weight": "bold", "font-size": "13" })
    : "";
  return svgDocument(width, height, title + "\n" + body);
}

// ---------------------------------------------------------------------------
// Grouped bar comparison.

function renderBarComparison(spec: FigureSpec): string {
  if (spec.inputs.length !== 1) {
    throw new Error("bar-comparison figure needs exactly one aggregate CSV");
  }
  const rows = readAggregateCsv(spec.inputs[0]);
  if (rows.length === 0) {
    throw new Error(`${spec.inputs[0]}: no data rows`);
  }
  const betas = [...new Set(rows.map((r) => r.beta.raw))].sort(
    (a, b) => Number(a) - Number(b),
  );
  const modes = new Set(rows.map((r) => r.dependence));
  const barKey = (r: { method: string; dependence: string }) =>
    modes.size > 1 ? `${r.method} (${r.dependence})` : r.method;
  const keys = [...new Set(rows.map(barKey))];
  const colors = new Map(keys.map((k, i) => [k, PALETTE[i % PALETTE.length]]));

  const yMax = Math.max(...rows.map((r) => r.meanError.value + r.stderrError.value));
  const yTicks = niceTicks(yMax * 1.05, 5);
  const yTop = yTicks[yTicks.length - 1];

  const groupW = Math.max(keys.length * 26 + 30, 120);
  const plotW = groupW * betas.length;
  const legendW = 150;
  const width = MARGIN.l + plotW + legendW + 16;
  const height = MARGIN.t + PLOT_H + MARGIN.b + 10;
  const y = linearScale([0, yTop], [MARGIN.t + PLOT_H, MARGIN.t]);

  const parts: string[] = [];
  parts.push(tag("line", { x1: MARGIN.l, y1: y(0), x2: MARGIN.l + plotW, y2: y(0), stroke: "#333" }));
  parts.push(tag("line", { x1: MARGIN.l, y1: y(0), x2: MARGIN.l, y2: y(yTop), stroke: "#333" }));
  for (const t of yTicks) {
    parts.push(tag("line", { x1: MARGIN.l - 3, y1: y(t), x2: MARGIN.l, y2: y(t), stroke: "#333" }));
    parts.push(text(MARGIN.l - 6, y(t) + 3.5, String(t), { "text-anchor": "end", "font-size": "9" }));
  }
  parts.push(
    text(12, MARGIN.t + PLOT_H / 2, spec.yLabel ?? "mean error", {
      "text-anchor": "middle",
      transform: `rotate(-90 12 ${px(MARGIN.t + PLOT_H / 2)})`,
    }),
  );

  betas.forEach((beta, g) => {
    const defined = rows.filter((r) => r.beta.raw === beta);
    const x0 = MARGIN.l + g * groupW + 15;
    const barW = (groupW - 30) / keys.length;
    parts.push(
      text(MARGIN.l + g * groupW + groupW / 2, y(0) + 16, `beta = ${beta}`, {
        "text-anchor": "middle",
      }),
    );
    keys.forEach((key, k) => {
      const row = defined.find((r) => barKey(r) === key);
      if (!row) return;
      const bx = x0 + k * barW;
      parts.push(
        tag("rect", {
          class: "bar",
          x: bx + 1,
          y: y(row.meanError.value),
          width: barW - 2,
          height: y(0) - y(row.meanError.value),
          fill: colors.get(key)!,
          "data-method": row.method,
          "data-dependence": row.dependence,
          "data-beta": row.beta.raw,
          "data-mean": row.meanError.raw,
        }),
      );
      if (row.stderrError.value > 0) {
        const cx = bx + barW / 2;
        const hi = y(row.meanError.value + row.stderrError.value);
        const lo = y(row.meanError.value - row.stderrError.value);
        parts.push(
          tag("line", {
            class: "whisker",
            x1: cx,
            y1: hi,
            x2: cx,
            y2: lo,
            stroke: "#222",
            "data-stderr": row.stderrError.raw,
          }),
        );
        parts.push(tag("line", { x1: cx - 3, y1: hi, x2: cx + 3, y2: hi, stroke: "#222" }));
        parts.push(tag("line", { x1: cx - 3, y1: lo, x2: cx + 3, y2: lo, stroke: "#222" }));
      }
    });
  });

  keys.forEach((key, i) => {
    const lx = MARGIN.l + plotW + 14;
    const ly = MARGIN.t + 10 + i * 14;
    parts.push(tag("rect", { x: lx, y: ly - 8, width: 10, height: 10, fill: colors.get(key)! }));
    parts.push(text(lx + 15, ly, key, { "font-size": "10" }));
  });

  const title = spec.title
    ? text((MARGIN.l + plotW) / 2, 14, spec.title, {
        "text-anchor": "middle",
        "font-weight": "bold",
        "font-size": "13",
      })
    : "";
  return svgDocument(width, height, title + "\n" + parts.join("\n"));
}

// ---------------------------------------------------------------------------

export function renderFigure(spec: FigureSpec): string {
  if (spec.kind === "line-sweep") return renderLineSweep(spec);
  if (spec.kind === "bar-comparison") return renderBarComparison(spec);
  throw new Error(`unknown figure kind: ${(spec as FigureSpec).kind}`);
}

export function writeFigure(spec: FigureSpec): string {
  const svg = renderFigure(spec);
  writeFileSync(spec.output, svg);
  return svg;
}
