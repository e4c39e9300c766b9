/**
 * Grouping and per-curve statistics: one panel per group (rho or method),
 * one series per pair tag, x = scale c descending, y = mean distance over
 * trials with min/max whiskers.
 */

import { BenchRow } from "./csv.js";

export type GroupBy = "rho" | "method";

/** Same-dimension pairs draw solid, cross-dimension pairs dashed. */
export const SAME_DIM_PAIRS = ["T2-T2Sc", "T3-T3Sc"] as const;
export const CROSS_DIM_PAIRS = ["T3-T2Sc", "T2-T3Sc"] as const;

export const PAIR_STYLES: Record<string, { color: string; dash: string | null }> = {
  "T2-T2Sc": { color: "#1f77b4", dash: null },
  "T3-T3Sc": { color: "#2ca02c", dash: null },
  "T3-T2Sc": { color: "#d62728", dash: "6,4" },
  "T2-T3Sc": { color: "#9467bd", dash: "6,4" },
};

export interface CurvePoint {
  c: number;
  mean: number;
  min: number;
  max: number;
  trials: number;
}

export interface Series {
  pair: string;
  points: CurvePoint[]; // c descending
}

export interface Panel {
  groupBy: GroupBy;
  groupValue: string;
  series: Series[];
}

function groupKey(row: BenchRow, by: GroupBy): string {
  return by === "rho" ? String(row.rho) : row.method;
}

export function aggregate(rows: BenchRow[], by: GroupBy): Panel[] {
  if (rows.length === 0) {
    throw new Error("no data rows to plot");
  }
  const groups = new Map<string, BenchRow[]>();
  for (const row of rows) {
    const key = groupKey(row, by);
    const bucket = groups.get(key);
    if (bucket) {
      bucket.push(row);
    } else {
      groups.set(key, [row]);
    }
  }
  const panels: Panel[] = [];
  for (const [groupValue, groupRows] of [...groups.entries()].sort(([a], [b]) =>
    a.localeCompare(b, "en", { numeric: true }),
  )) {
    const pairs = [...new Set(groupRows.map((r) => r.pair))];
    const unknown = pairs.filter((p) => !(p in PAIR_STYLES));
    if (unknown.length > 0) {
      throw new Error(`unknown pair tags in CSV: ${unknown.join(", ")}`);
    }
    const order = Object.keys(PAIR_STYLES).filter((p) => pairs.includes(p));
    const series: Series[] = order.map((pair) => {
      const byC = new Map<number, number[]>();
      for (const row of groupRows) {
        if (row.pair !== pair) continue;
        const bucket = byC.get(row.c);
        if (bucket) {
          bucket.push(row.distance);
        } else {
          byC.set(row.c, [row.distance]);
        }
      }
      const points = [...byC.entries()]
        .sort(([a], [b]) => b - a)
        .map(([c, values]) => ({
          c,
          mean: values.reduce((s, v) => s + v, 0) / values.length,
          min: Math.min(...values),
          max: Math.max(...values),
          trials: values.length,
        }));
      return { pair, points };
    });
    panels.push({ groupBy: by, groupValue, series });
  }
  return panels;
}
