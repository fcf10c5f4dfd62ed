// Turning benchmark rows into plottable series.
//
// Every figure kind maps rows to (x, mean y) points grouped by one column
// (normally "algorithm"):
//   RobustnessCurve:  x = snr_db,  y = mean error_db
//   MeasurementSweep: x = D,       y = mean error_db
//   TimingLogLog:     x = d,       y = mean time_ms_total / 1000 (seconds)

import { z } from "zod";
import { CsvError, REQUIRED_COLUMNS, type ResultRow } from "./schema.js";

export const PLOT_KINDS = [
  "RobustnessCurve",
  "MeasurementSweep",
  "TimingLogLog",
] as const;
export type PlotKind = (typeof PLOT_KINDS)[number];

export const plotSpecSchema = z.object({
  input: z.union([z.string().min(1), z.array(z.string().min(1)).min(1)]),
  kind: z.enum(PLOT_KINDS),
  groupBy: z.string().min(1).default("algorithm"),
  output: z.string().min(1),
  title: z.string().optional(),
});

export type PlotSpec = z.infer<typeof plotSpecSchema>;

export function parsePlotSpec(json: unknown, source = "<spec>"): PlotSpec {
  const res = plotSpecSchema.safeParse(json);
  if (!res.success) {
    const issue = res.error.issues[0];
    throw new CsvError(
      `${source}: invalid plot spec (${issue.path.join(".") || "root"}: ${issue.message})`,
    );
  }
  return res.data;
}

export interface Series {
  label: string;
  points: { x: number; y: number }[]; // sorted by x, one point per distinct x
}

interface AxisConfig {
  x: keyof ResultRow;
  y: keyof ResultRow;
  xLabel: string;
  yLabel: string;
  yScale: number;
  logLog: boolean;
}

export const AXES: Record<PlotKind, AxisConfig> = {
  RobustnessCurve: {
    x: "snr_db",
    y: "error_db",
    xLabel: "SNR (dB)",
    yLabel: "relative error (dB)",
    yScale: 1,
    logLog: false,
  },
  MeasurementSweep: {
    x: "D",
    y: "error_db",
    xLabel: "measurements D",
    yLabel: "relative error (dB)",
    yScale: 1,
    logLog: false,
  },
  TimingLogLog: {
    x: "d",
    y: "time_ms_total",
    xLabel: "signal length d",
    yLabel: "recovery time (s)",
    yScale: 1e-3,
    logLog: true,
  },
};

/** Group rows by `groupBy`, average y over trials at each x, sort by x.
 *  Rows with a non-finite x (e.g. snr_db = inf on a robustness plot) are
 *  dropped; an entirely empty result is an error. */
export function buildSeries(
  rows: ResultRow[],
  kind: PlotKind,
  groupBy: string,
): Series[] {
  if (!(REQUIRED_COLUMNS as readonly string[]).includes(groupBy)) {
    throw new CsvError(`missing column "${groupBy}"`);
  }
  const axes = AXES[kind];
  const buckets = new Map<string, Map<number, number[]>>();
  for (const row of rows) {
    const x = Number(row[axes.x]);
    const y = Number(row[axes.y]) * axes.yScale;
    if (!Number.isFinite(x) || !Number.isFinite(y)) continue;
    const label = String(row[groupBy as keyof ResultRow]);
    if (!buckets.has(label)) buckets.set(label, new Map());
    const perX = buckets.get(label)!;
    if (!perX.has(x)) perX.set(x, []);
    perX.get(x)!.push(y);
  }
  const series: Series[] = [...buckets.entries()]
    .sort(([a], [b]) => a.localeCompare(b))
    .map(([label, perX]) => ({
      label,
      points: [...perX.entries()]
        .sort(([a], [b]) => a - b)
        .map(([x, ys]) => ({
          x,
          y: ys.reduce((s, v) => s + v, 0) / ys.length,
        })),
    }));
  if (series.length === 0) {
    throw new CsvError("no plottable rows (all x or y values non-finite)");
  }
  return series;
}

/** Least-squares slope of log10(y) against log10(x), pooled over series. */
export function logLogSlope(series: Series[]): number {
  const pts = series.flatMap((s) => s.points)
    .filter((p) => p.x > 0 && p.y > 0)
    .map((p) => ({ lx: Math.log10(p.x), ly: Math.log10(p.y) }));
  if (pts.length < 2) return NaN;
  const mx = pts.reduce((s, p) => s + p.lx, 0) / pts.length;
  const my = pts.reduce((s, p) => s + p.ly, 0) / pts.length;
  let num = 0;
  let den = 0;
  for (const p of pts) {
    num += (p.lx - mx) * (p.ly - my);
    den += (p.lx - mx) ** 2;
  }
  return num / den;
}
