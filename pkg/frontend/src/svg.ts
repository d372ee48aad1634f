/** Static SVG line charts; identical input always renders identical markup. */

import { Series } from "./chart.js";

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  width?: number;
  height?: number;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                 "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"];

const MARGIN = { top: 42, right: 150, bottom: 46, left: 64 };

function fmt(value: number): string {
  if (!Number.isFinite(value)) return "0";
  const rounded = Number(value.toPrecision(6));
  return Object.is(rounded, -0) ? "0" : String(rounded);
}

function niceTicks(lo: number, hi: number, count = 5): number[] {
  if (lo === hi) {
    return [lo];
  }
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = span / count / step;
  const factor = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const nice = factor * step;
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / nice) * nice; t <= hi + nice * 1e-9; t += nice) {
    ticks.push(Number(t.toPrecision(12)));
  }
  return ticks;
}

export function renderChart(series: Series[], opts: ChartOptions): string {
  const width = opts.width ?? 720;
  const height = opts.height ?? 440;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;
  const points = series.flatMap((s) => s.points);
  if (points.length === 0) {
    throw new Error("nothing to draw: every series is empty");
  }
  let xLo = Math.min(...points.map((p) => p.x));
  let xHi = Math.max(...points.map((p) => p.x));
  let yLo = Math.min(...points.map((p) => p.y));
  let yHi = Math.max(...points.map((p) => p.y));
  if (xLo === xHi) {
    xLo -= 1;
    xHi += 1;
  }
  if (yLo === yHi) {
    yLo -= 1;
    yHi += 1;
  }
  const yPad = 0.06 * (yHi - yLo);
  yLo -= yPad;
  yHi += yPad;
  const sx = (x: number) => MARGIN.left + ((x - xLo) / (xHi - xLo)) * plotW;
  const sy = (y: number) => MARGIN.top + plotH - ((y - yLo) / (yHi - yLo)) * plotH;

  const parts: string[] = [];
  parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`);
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(`<text x="${MARGIN.left + plotW / 2}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15" font-weight="bold">${opts.title}</text>`);

  for (const t of niceTicks(xLo, xHi)) {
    const x = sx(t);
    parts.push(`<line x1="${fmt(x)}" y1="${MARGIN.top}" x2="${fmt(x)}" y2="${MARGIN.top + plotH}" stroke="#dddddd" stroke-width="1"/>`);
    parts.push(`<text x="${fmt(x)}" y="${MARGIN.top + plotH + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">${fmt(t)}</text>`);
  }
  for (const t of niceTicks(yLo, yHi)) {
    const y = sy(t);
    parts.push(`<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${MARGIN.left + plotW}" y2="${fmt(y)}" stroke="#dddddd" stroke-width="1"/>`);
    parts.push(`<text x="${MARGIN.left - 6}" y="${fmt(y + 4)}" text-anchor="end" font-family="sans-serif" font-size="11">${fmt(t)}</text>`);
  }
  parts.push(`<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#333333"/>`);
  parts.push(`<text x="${MARGIN.left + plotW / 2}" y="${height - 10}" text-anchor="middle" font-family="sans-serif" font-size="12">${opts.xLabel}</text>`);
  parts.push(`<text x="16" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 ${MARGIN.top + plotH / 2})">${opts.yLabel}</text>`);

  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length]!;
    const coords = s.points.map((p) => `${fmt(sx(p.x))},${fmt(sy(p.y))}`).join(" ");
    parts.push(`<polyline points="${coords}" fill="none" stroke="${color}" stroke-width="2"/>`);
    for (const p of s.points) {
      parts.push(`<circle cx="${fmt(sx(p.x))}" cy="${fmt(sy(p.y))}" r="3" fill="${color}"/>`);
    }
    const ly = MARGIN.top + 14 + i * 18;
    const lx = MARGIN.left + plotW + 12;
    parts.push(`<line x1="${lx}" y1="${ly - 4}" x2="${lx + 22}" y2="${ly - 4}" stroke="${color}" stroke-width="2"/>`);
    parts.push(`<text x="${lx + 28}" y="${ly}" font-family="sans-serif" font-size="12">${s.label}</text>`);
  });
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
