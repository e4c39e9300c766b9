/**
 * Deterministic multi-panel SVG renderer: one panel per group, mean curves
 * with min/max whiskers, solid strokes for same-dimension pairs and dashed
 * for cross-dimension pairs.  The aggregated table is embedded verbatim in a
 * <metadata> block so the plotted numbers can be read back exactly.
 */

import { Panel, PAIR_STYLES } from "./aggregate.js";

const PANEL_W = 420;
const PANEL_H = 320;
const MARGIN = { top: 48, right: 18, bottom: 46, left: 64 };
const LEGEND_H = 26;

function px(v: number): string {
  return v.toFixed(2);
}

function tickValues(maxVal: number, count = 5): number[] {
  if (maxVal <= 0) return [0];
  const rawStep = maxVal / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const step = [1, 2, 2.5, 5, 10].map((m) => m * mag).find((s) => s >= rawStep) ?? rawStep;
  const ticks: number[] = [];
  for (let v = 0; v <= maxVal + 1e-12; v += step) ticks.push(v);
  return ticks;
}

function fmtTick(v: number): string {
  if (v === 0) return "0";
  if (Math.abs(v) >= 0.01 && Math.abs(v) < 1000) {
    return String(Number(v.toPrecision(4)));
  }
  return v.toExponential(1);
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function renderPanel(panel: Panel, index: number): string {
  const x0 = index * PANEL_W + MARGIN.left;
  const yTop = LEGEND_H + MARGIN.top;
  const plotW = PANEL_W - MARGIN.left - MARGIN.right;
  const plotH = PANEL_H - MARGIN.top - MARGIN.bottom;

  const cs = [...new Set(panel.series.flatMap((s) => s.points.map((p) => p.c)))].sort(
    (a, b) => b - a,
  );
  const yMax = Math.max(...panel.series.flatMap((s) => s.points.map((p) => p.max)), 1e-12);
  const xPos = (c: number) => {
    if (cs.length === 1) return x0 + plotW / 2;
    const i = cs.indexOf(c);
    return x0 + (plotW * i) / (cs.length - 1);
  };
  const yPos = (v: number) => yTop + plotH - (plotH * v) / (yMax * 1.08);

  const parts: string[] = [];
  parts.push(
    `<rect x="${px(x0)}" y="${px(yTop)}" width="${px(plotW)}" height="${px(plotH)}" fill="none" stroke="#444" stroke-width="1"/>`,
  );
  const title =
    panel.groupBy === "rho" ? `rho = ${panel.groupValue}` : `method = ${panel.groupValue}`;
  parts.push(
    `<text x="${px(x0 + plotW / 2)}" y="${px(yTop - 12)}" text-anchor="middle" font-size="14" font-weight="bold">${escapeXml(title)}</text>`,
  );

  for (const c of cs) {
    const x = xPos(c);
    parts.push(
      `<line x1="${px(x)}" y1="${px(yTop + plotH)}" x2="${px(x)}" y2="${px(yTop + plotH + 5)}" stroke="#444"/>`,
      `<text x="${px(x)}" y="${px(yTop + plotH + 20)}" text-anchor="middle" font-size="11">${fmtTick(c)}</text>`,
    );
  }
  parts.push(
    `<text x="${px(x0 + plotW / 2)}" y="${px(yTop + plotH + 38)}" text-anchor="middle" font-size="12">scale c</text>`,
  );
  for (const t of tickValues(yMax * 1.08)) {
    const y = yPos(t);
    parts.push(
      `<line x1="${px(x0 - 5)}" y1="${px(y)}" x2="${px(x0)}" y2="${px(y)}" stroke="#444"/>`,
      `<text x="${px(x0 - 8)}" y="${px(y + 4)}" text-anchor="end" font-size="11">${fmtTick(t)}</text>`,
    );
  }
  parts.push(
    `<text transform="translate(${px(x0 - 48)},${px(yTop + plotH / 2)}) rotate(-90)" text-anchor="middle" font-size="12">mean distance</text>`,
  );

  for (const series of panel.series) {
    const style = PAIR_STYLES[series.pair];
    const dash = style.dash ? ` stroke-dasharray="${style.dash}"` : "";
    for (const p of series.points) {
      const x = xPos(p.c);
      parts.push(
        `<line class="whisker pair-${series.pair}" x1="${px(x)}" y1="${px(yPos(p.min))}" x2="${px(x)}" y2="${px(yPos(p.max))}" stroke="${style.color}" stroke-width="1" opacity="0.55"/>`,
        `<line x1="${px(x - 3)}" y1="${px(yPos(p.min))}" x2="${px(x + 3)}" y2="${px(yPos(p.min))}" stroke="${style.color}" stroke-width="1" opacity="0.55"/>`,
        `<line x1="${px(x - 3)}" y1="${px(yPos(p.max))}" x2="${px(x + 3)}" y2="${px(yPos(p.max))}" stroke="${style.color}" stroke-width="1" opacity="0.55"/>`,
      );
    }
    const pts = series.points.map((p) => `${px(xPos(p.c))},${px(yPos(p.mean))}`).join(" ");
    parts.push(
      `<polyline class="series pair-${series.pair}" points="${pts}" fill="none" stroke="${style.color}" stroke-width="2"${dash}/>`,
    );
    for (const p of series.points) {
      parts.push(
        `<circle cx="${px(xPos(p.c))}" cy="${px(yPos(p.mean))}" r="2.6" fill="${style.color}"/>`,
      );
    }
  }
  return parts.join("\n");
}

function renderLegend(panels: Panel[], width: number): string {
  const pairs = Object.keys(PAIR_STYLES).filter((p) =>
    panels.some((panel) => panel.series.some((s) => s.pair === p)),
  );
  const slot = width / Math.max(pairs.length, 1);
  const parts: string[] = [];
  pairs.forEach((pair, i) => {
    const style = PAIR_STYLES[pair];
    const x = slot * i + slot / 2 - 46;
    const dash = style.dash ? ` stroke-dasharray="${style.dash}"` : "";
    parts.push(
      `<line x1="${px(x)}" y1="14" x2="${px(x + 30)}" y2="14" stroke="${style.color}" stroke-width="2"${dash}/>`,
      `<text x="${px(x + 36)}" y="18" font-size="12">${escapeXml(pair)}</text>`,
    );
  });
  return parts.join("\n");
}

export function renderSvg(panels: Panel[]): string {
  const width = panels.length * PANEL_W;
  const height = LEGEND_H + PANEL_H;
  const body = panels.map((p, i) => renderPanel(p, i)).join("\n");
  const metadata = JSON.stringify({ panels });
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
    `<metadata id="plot-data">${escapeXml(metadata)}</metadata>`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    renderLegend(panels, width),
    body,
    `</svg>`,
    ``,
  ].join("\n");
}

/** Read back the aggregated table embedded in a rendered SVG. */
export function extractPlotData(svg: string): { panels: Panel[] } {
  const match = svg.match(/<metadata id="plot-data">([\s\S]*?)<\/metadata>/);
  if (!match) {
    throw new Error("no plot-data metadata block in SVG");
  }
  const json = match[1].replace(/&lt;/g, "<").replace(/&gt;/g, ">").replace(/&amp;/g, "&");
  return JSON.parse(json);
}
