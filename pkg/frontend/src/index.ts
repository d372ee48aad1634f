export { CsvFormatError, parseCsv } from "./csv.js";
export { parseSummary, policiesOf, REQUIRED_COLUMNS, SummaryFormatError } from "./summary.js";
export type { SummaryRow } from "./summary.js";
export { curveSeries, sweepSeries } from "./chart.js";
export type { Point, Series, SweepAxis } from "./chart.js";
export { renderChart } from "./svg.js";
export type { ChartOptions } from "./svg.js";
export { KINDS, main, parseArgs, renderKind, UsageError } from "./cli.js";
