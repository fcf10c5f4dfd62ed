// Minimal hand-rolled SVG line charts: no DOM, no canvas, deterministic
// string output (same series in, same bytes out).

import type { Series } from "./series.js";

const WIDTH = 760;
const HEIGHT = 480;
const MARGIN = { top: 48, right: 180, bottom: 58, left: 72 };

const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
];

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  logLog: boolean;
  annotation?: string;
}

interface Scale {
  (v: number): number;
  ticks: number[];
}

function fmt(v: number): string {
  return Number(v.toFixed(2)).toString();
}

function fmtTick(v: number): string {
  if (v !== 0 && (Math.abs(v) >= 1e4 || Math.abs(v) < 1e-3)) {
    return v.toExponential(0).replace("+", "");
  }
  return Number(v.toPrecision(4)).toString();
}

function niceStep(span: number, target: number): number {
  const raw = span / target;
  const mag = 10 ** Math.floor(Math.log10(raw));
  for (const m of [1, 2, 5, 10]) {
    if (raw <= m * mag) return m * mag;
  }
  return 10 * mag;
}

function linearScale(lo: number, hi: number, out0: number, out1: number): Scale {
  if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  const pad = 0.05 * (hi - lo);
  const a = lo - pad;
  const b = hi + pad;
  const scale = ((v: number) => out0 + ((v - a) / (b - a)) * (out1 - out0)) as Scale;
  const step = niceStep(b - a, 6);
  const ticks: number[] = [];
  for (let t = Math.ceil(a / step) * step; t <= b + 1e-9; t += step) {
    ticks.push(Math.abs(t) < step * 1e-9 ? 0 : t);
  }
  scale.ticks = ticks;
  return scale;
}

function logScale(lo: number, hi: number, out0: number, out1: number): Scale {
  const la = Math.log10(lo) - 0.05;
  const lb = Math.log10(hi) + 0.05;
  const scale = ((v: number) =>
    out0 + ((Math.log10(v) - la) / (lb - la)) * (out1 - out0)) as Scale;
  const ticks: number[] = [];
  for (let e = Math.ceil(la); e <= Math.floor(lb); e++) {
    ticks.push(10 ** e);
  }
  if (ticks.length < 2) {
    // fewer than two decades: fall back to 1-2-5 ticks within the range
    for (let e = Math.floor(la); e <= Math.ceil(lb); e++) {
      for (const m of [1, 2, 5]) {
        const t = m * 10 ** e;
        if (t >= lo && t <= hi && !ticks.includes(t)) ticks.push(t);
      }
    }
    ticks.sort((a, b) => a - b);
  }
  scale.ticks = ticks;
  return scale;
}

function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Render series as a line chart with markers, axes, grid, and a legend. */
export function renderChart(series: Series[], opts: ChartOptions): string {
  const pts = series.flatMap((s) => s.points);
  const xs = pts.map((p) => p.x);
  const ys = pts.map((p) => p.y);
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;

  const sx = opts.logLog
    ? logScale(Math.min(...xs), Math.max(...xs), x0, x1)
    : linearScale(Math.min(...xs), Math.max(...xs), x0, x1);
  const sy = opts.logLog
    ? logScale(Math.min(...ys), Math.max(...ys), y0, y1)
    : linearScale(Math.min(...ys), Math.max(...ys), y0, y1);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
    `<text x="${(x0 + x1) / 2}" y="24" text-anchor="middle" font-size="16">${esc(opts.title)}</text>`,
  );

  // grid + ticks
  for (const t of sx.ticks) {
    const px = fmt(sx(t));
    parts.push(
      `<line x1="${px}" y1="${y0}" x2="${px}" y2="${y1}" stroke="#e0e0e0"/>`,
      `<text x="${px}" y="${y0 + 18}" text-anchor="middle" font-size="11">${fmtTick(t)}</text>`,
    );
  }
  for (const t of sy.ticks) {
    const py = fmt(sy(t));
    parts.push(
      `<line x1="${x0}" y1="${py}" x2="${x1}" y2="${py}" stroke="#e0e0e0"/>`,
      `<text x="${x0 - 6}" y="${py}" text-anchor="end" dominant-baseline="middle" font-size="11">${fmtTick(t)}</text>`,
    );
  }

  // axes
  parts.push(
    `<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="black"/>`,
    `<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="black"/>`,
    `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 14}" text-anchor="middle" font-size="13">${esc(opts.xLabel)}</text>`,
    `<text x="20" y="${(y0 + y1) / 2}" text-anchor="middle" font-size="13" ` +
      `transform="rotate(-90 20 ${(y0 + y1) / 2})">${esc(opts.yLabel)}</text>`,
  );

  // series
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const coords = s.points.map((p) => `${fmt(sx(p.x))},${fmt(sy(p.y))}`);
    parts.push(
      `<polyline points="${coords.join(" ")}" fill="none" stroke="${color}" stroke-width="1.8"/>`,
    );
    for (const p of s.points) {
      parts.push(
        `<circle cx="${fmt(sx(p.x))}" cy="${fmt(sy(p.y))}" r="3" fill="${color}"/>`,
      );
    }
    const ly = MARGIN.top + 16 + 20 * i;
    parts.push(
      `<line x1="${x1 + 12}" y1="${ly}" x2="${x1 + 34}" y2="${ly}" stroke="${color}" stroke-width="1.8"/>`,
      `<text x="${x1 + 40}" y="${ly + 4}" font-size="12">${esc(s.label)}</text>`,
    );
  });

  if (opts.annotation) {
    parts.push(
      `<text x="${x1 - 8}" y="${y1 + 16}" text-anchor="end" font-size="12" fill="#444">${esc(opts.annotation)}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
