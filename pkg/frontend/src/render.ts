// Orchestration: spec -> CSV rows -> series -> SVG string + count summary.

import { readFileSync } from "fs";
import { parseResultsCsv, type ResultRow } from "./schema.js";
import {
  AXES,
  buildSeries,
  logLogSlope,
  type PlotSpec,
  type Series,
} from "./series.js";
import { renderChart } from "./svg.js";

export interface FigureResult {
  svg: string;
  series: Series[];
  seriesCount: number;
  pointCounts: Record<string, number>;
}

const DEFAULT_TITLES = {
  RobustnessCurve: "Reconstruction error vs SNR",
  MeasurementSweep: "Reconstruction error vs measurement count",
  TimingLogLog: "Recovery time vs signal length",
} as const;

export function renderFigure(spec: PlotSpec, rows: ResultRow[]): FigureResult {
  const series = buildSeries(rows, spec.kind, spec.groupBy);
  const axes = AXES[spec.kind];
  let annotation: string | undefined;
  if (spec.kind === "TimingLogLog") {
    annotation = `fitted slope ${logLogSlope(series).toFixed(2)}`;
  }
  const svg = renderChart(series, {
    title: spec.title ?? DEFAULT_TITLES[spec.kind],
    xLabel: axes.xLabel,
    yLabel: axes.yLabel,
    logLog: axes.logLog,
    annotation,
  });
  const pointCounts: Record<string, number> = {};
  for (const s of series) pointCounts[s.label] = s.points.length;
  return { svg, series, seriesCount: series.length, pointCounts };
}

/** Read and concatenate the spec's input CSV file(s). */
export function loadRows(spec: PlotSpec): ResultRow[] {
  const inputs = Array.isArray(spec.input) ? spec.input : [spec.input];
  return inputs.flatMap((path) =>
    parseResultsCsv(readFileSync(path, "utf8"), path),
  );
}
