/** Groups summary rows into plottable series. */

import { policiesOf, SummaryFormatError, SummaryRow } from "./summary.js";

export interface Point {
  x: number;
  y: number;
}

export interface Series {
  label: string;
  points: Point[];
}

export type SweepAxis = "lambda" | "J";

function mean(values: number[]): number {
  let total = 0;
  for (const v of values) total += v;
  return total / values.length;
}

/** Rows of the final window of each (point, policy, seed) run. */
function finalWindows(rows: SummaryRow[]): SummaryRow[] {
  const best = new Map<string, SummaryRow>();
  for (const row of rows) {
    const key = [row.policy, row.lambda, row.channels, row.seed].join("|");
    const cur = best.get(key);
    if (cur === undefined || row.slotWindow > cur.slotWindow) {
      best.set(key, row);
    }
  }
  return [...best.values()];
}

function modal(values: number[]): number {
  const counts = new Map<number, number>();
  for (const v of values) counts.set(v, (counts.get(v) ?? 0) + 1);
  let winner = values[0]!;
  let most = -1;
  for (const [v, c] of counts) {
    if (c > most || (c === most && v < winner)) {
      winner = v;
      most = c;
    }
  }
  return winner;
}

/**
 * Final-window utility versus one sweep axis, one series per policy.
 *
 * A merged grid file can hold both sweeps at once; rows are restricted to the
 * modal value of the other axis (the held-fixed one) before grouping, and
 * utilities average across seeds.
 */
export function sweepSeries(rows: SummaryRow[], axis: SweepAxis): Series[] {
  if (rows.length === 0) {
    throw new SummaryFormatError("no rows to plot");
  }
  const finals = finalWindows(rows);
  const other = (r: SummaryRow) => (axis === "lambda" ? r.channels : r.lambda);
  const held = modal(finals.map(other));
  const slice = finals.filter((r) => other(r) === held);
  const series: Series[] = [];
  for (const policy of policiesOf(rows)) {
    const mine = slice.filter((r) => r.policy === policy);
    const xs = [...new Set(mine.map((r) => (axis === "lambda" ? r.lambda : r.channels)))]
      .sort((a, b) => a - b);
    const points = xs.map((x) => ({
      x,
      y: mean(mine
        .filter((r) => (axis === "lambda" ? r.lambda : r.channels) === x)
        .map((r) => r.utility)),
    }));
    series.push({ label: policy, points });
  }
  return series;
}

/** Windowed utility over slots, averaged across seeds and sweep points. */
export function curveSeries(rows: SummaryRow[]): Series[] {
  if (rows.length === 0) {
    throw new SummaryFormatError("no rows to plot");
  }
  const series: Series[] = [];
  for (const policy of policiesOf(rows)) {
    const mine = rows.filter((r) => r.policy === policy);
    const xs = [...new Set(mine.map((r) => r.slotWindow))].sort((a, b) => a - b);
    const points = xs.map((x) => ({
      x,
      y: mean(mine.filter((r) => r.slotWindow === x).map((r) => r.utility)),
    }));
    series.push({ label: policy, points });
  }
  return series;
}
