export { CsvError, parseResultsCsv, REQUIRED_COLUMNS } from "./schema.js";
export type { ColumnName, ResultRow } from "./schema.js";
export {
  AXES,
  buildSeries,
  logLogSlope,
  parsePlotSpec,
  PLOT_KINDS,
  plotSpecSchema,
} from "./series.js";
export type { PlotKind, PlotSpec, Series } from "./series.js";
export { renderChart } from "./svg.js";
export type { ChartOptions } from "./svg.js";
export { loadRows, renderFigure } from "./render.js";
export type { FigureResult } from "./render.js";
export { main, runOne } from "./cli.js";
