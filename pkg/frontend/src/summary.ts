/** Typed view of summary.csv: one row per metric window of one run. */

import { CsvFormatError, parseCsv } from "./csv.js";

export const REQUIRED_COLUMNS = [
  "slot_window",
  "policy",
  "lambda",
  "J",
  "avg_utility_per_mu",
  "avg_payment",
  "avg_drops",
  "avg_queue",
] as const;

export interface SummaryRow {
  slotWindow: number;
  policy: string;
  lambda: number;
  channels: number;
  utility: number;
  payment: number;
  drops: number;
  queue: number;
  /** optional column emitted by multi-seed grids */
  seed: number | null;
}

export class SummaryFormatError extends Error {}

function numeric(cell: string, column: string): number {
  const value = Number(cell);
  if (!Number.isFinite(value)) {
    throw new SummaryFormatError(`non-finite value ${cell} in column ${column}`);
  }
  return value;
}

export function parseSummary(text: string): SummaryRow[] {
  let table;
  try {
    table = parseCsv(text);
  } catch (err) {
    if (err instanceof CsvFormatError) {
      throw new SummaryFormatError(err.message);
    }
    throw err;
  }
  const index = new Map(table.header.map((name, i) => [name, i]));
  const missing = REQUIRED_COLUMNS.filter((c) => !index.has(c));
  if (missing.length > 0) {
    throw new SummaryFormatError(`missing required columns: ${missing.join(", ")}`);
  }
  if (table.rows.length === 0) {
    throw new SummaryFormatError("summary has a header but no rows");
  }
  const at = (row: string[], name: string) => row[index.get(name)!]!;
  const seedCol = index.has("seed") ? index.get("seed")! : null;
  return table.rows.map((row) => ({
    slotWindow: numeric(at(row, "slot_window"), "slot_window"),
    policy: at(row, "policy"),
    lambda: numeric(at(row, "lambda"), "lambda"),
    channels: numeric(at(row, "J"), "J"),
    utility: numeric(at(row, "avg_utility_per_mu"), "avg_utility_per_mu"),
    payment: numeric(at(row, "avg_payment"), "avg_payment"),
    drops: numeric(at(row, "avg_drops"), "avg_drops"),
    queue: numeric(at(row, "avg_queue"), "avg_queue"),
    seed: seedCol === null ? null : numeric(row[seedCol]!, "seed"),
  }));
}

/** Policies in first-appearance order, which fixes series order and colors. */
export function policiesOf(rows: SummaryRow[]): string[] {
  const seen: string[] = [];
  for (const row of rows) {
    if (!seen.includes(row.policy)) {
      seen.push(row.policy);
    }
  }
  return seen;
}
