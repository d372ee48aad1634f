#!/usr/bin/env node
/**
 * Figure renderer for simulator summaries.
 *
 * Usage: slicesim-plots <summary.csv> --kind sweep-lambda|sweep-J|curve --out <file.svg>
 */

import { readFileSync, realpathSync, writeFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

import { curveSeries, Series, sweepSeries } from "./chart.js";
import { parseSummary, SummaryFormatError } from "./summary.js";
import { ChartOptions, renderChart } from "./svg.js";

export const KINDS = ["sweep-lambda", "sweep-J", "curve"] as const;
export type Kind = (typeof KINDS)[number];

export interface CliArgs {
  csvPath: string;
  kind: Kind;
  outPath: string;
}

export class UsageError extends Error {}

export function parseArgs(argv: string[]): CliArgs {
  let csvPath: string | null = null;
  let kind: string | null = null;
  let outPath: string | null = null;
  for (let i = 0; i < argv.length; i += 1) {
    const arg = argv[i]!;
    if (arg === "--kind") {
      kind = argv[++i] ?? null;
    } else if (arg === "--out") {
      outPath = argv[++i] ?? null;
    } else if (arg.startsWith("--")) {
      throw new UsageError(`unknown option ${arg}`);
    } else if (csvPath === null) {
      csvPath = arg;
    } else {
      throw new UsageError(`unexpected argument ${arg}`);
    }
  }
  if (csvPath === null || kind === null || outPath === null) {
    throw new UsageError(
      "usage: slicesim-plots <summary.csv> --kind sweep-lambda|sweep-J|curve --out <file.svg>",
    );
  }
  if (!KINDS.includes(kind as Kind)) {
    throw new UsageError(`--kind must be one of ${KINDS.join("|")}, got ${kind}`);
  }
  return { csvPath, kind: kind as Kind, outPath };
}

export function renderKind(kind: Kind, csvText: string): string {
  const rows = parseSummary(csvText);
  let series: Series[];
  let opts: ChartOptions;
  if (kind === "sweep-lambda") {
    series = sweepSeries(rows, "lambda");
    opts = {
      title: "Final-window utility vs packet arrival rate",
      xLabel: "mean packet arrivals per slot",
      yLabel: "avg utility per user per slot",
    };
  } else if (kind === "sweep-J") {
    series = sweepSeries(rows, "J");
    opts = {
      title: "Final-window utility vs channel count",
      xLabel: "channels",
      yLabel: "avg utility per user per slot",
    };
  } else {
    series = curveSeries(rows);
    opts = {
      title: "Utility across the learning run",
      xLabel: "scheduling slot (window end)",
      yLabel: "avg utility per user per slot",
    };
  }
  return renderChart(series, opts);
}

export function main(argv: string[]): number {
  let args: CliArgs;
  try {
    args = parseArgs(argv);
  } catch (err) {
    if (err instanceof UsageError) {
      process.stderr.write(`${err.message}\n`);
      return 2;
    }
    throw err;
  }
  let text: string;
  try {
    text = readFileSync(args.csvPath, "utf8");
  } catch {
    process.stderr.write(`cannot read ${args.csvPath}\n`);
    return 2;
  }
  let svg: string;
  try {
    svg = renderKind(args.kind, text);
  } catch (err) {
    if (err instanceof SummaryFormatError || err instanceof Error) {
      process.stderr.write(`${args.csvPath}: ${(err as Error).message}\n`);
      return 2;
    }
    throw err;
  }
  writeFileSync(args.outPath, svg);
  return 0;
}

const isDirectRun = (() => {
  if (process.argv[1] === undefined) return false;
  try {
    return realpathSync(process.argv[1]) === fileURLToPath(import.meta.url);
  } catch {
    return false;
  }
})();
if (isDirectRun) {
  process.exit(main(process.argv.slice(2)));
}
