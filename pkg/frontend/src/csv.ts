/** Minimal CSV reader for the simulator's outputs (no quoting, no escapes). */

export interface CsvTable {
  header: string[];
  rows: string[][];
}

export class CsvFormatError extends Error {}

export function parseCsv(text: string): CsvTable {
  const lines = text
    .split(/\r?\n/)
    .map((line) => line.trim())
    .filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new CsvFormatError("empty CSV: no header line");
  }
  const header = lines[0]!.split(",").map((c) => c.trim());
  const rows: string[][] = [];
  for (const line of lines.slice(1)) {
    const cells = line.split(",").map((c) => c.trim());
    if (cells.length !== header.length) {
      throw new CsvFormatError(
        `row has ${cells.length} cells, header has ${header.length}: ${line}`,
      );
    }
    rows.push(cells);
  }
  return { header, rows };
}
