#!/usr/bin/env node
/**
 * spddist-plot — render benchmark CSVs as multi-panel SVG figures.
 *
 * Usage:
 *   spddist-plot plot --in results.csv --out fig.svg [--group rho|method]
 *
 * Exit codes: 0 success, 2 bad arguments / schema mismatch / io error.
 */

import { readFileSync, realpathSync, writeFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

import { aggregate, GroupBy } from "./aggregate.js";
import { parseBenchCsv, SchemaMismatch } from "./csv.js";
import { renderSvg } from "./render.js";

interface PlotArgs {
  input: string;
  output: string;
  group: GroupBy;
}

export function parseArgs(argv: string[]): PlotArgs {
  if (argv[0] !== "plot") {
    throw new Error(`unknown command ${JSON.stringify(argv[0])}; expected "plot"`);
  }
  let input: string | undefined;
  let output: string | undefined;
  let group: GroupBy = "rho";
  for (let i = 1; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (value === undefined) {
      throw new Error(`flag ${flag} needs a value`);
    }
    switch (flag) {
      case "--in":
        input = value;
        break;
      case "--out":
        output = value;
        break;
      case "--group":
        if (value !== "rho" && value !== "method") {
          throw new Error(`--group must be rho or method, got ${JSON.stringify(value)}`);
        }
        group = value;
        break;
      default:
        throw new Error(`unknown flag ${JSON.stringify(flag)}`);
    }
  }
  if (!input || !output) {
    throw new Error("both --in and --out are required");
  }
  if (!output.endsWith(".svg")) {
    throw new Error(
      `output must be an .svg path (vector output only, no rasterizer available), got ${JSON.stringify(output)}`,
    );
  }
  return { input, output, group };
}

export function runPlot(args: PlotArgs): void {
  const rows = parseBenchCsv(readFileSync(args.input, "utf-8"));
  const panels = aggregate(rows, args.group);
  writeFileSync(args.output, renderSvg(panels));
  console.log(`wrote ${panels.length} panel(s) to ${args.output}`);
}

export function main(argv: string[]): number {
  try {
    runPlot(parseArgs(argv));
    return 0;
  } catch (err) {
    if (err instanceof SchemaMismatch) {
      console.error(`schema mismatch (column "${err.column}"): ${err.message}`);
    } else {
      console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    }
    return 2;
  }
}

const entry = process.argv[1];
if (entry !== undefined && realpathSync(entry) === fileURLToPath(import.meta.url)) {
  process.exit(main(process.argv.slice(2)));
}
