#!/usr/bin/env node
// blockpr-plot <spec.json> [<spec.json> ...]
//
// Each spec names input CSV(s), a figure kind, a grouping column, and the
// output SVG path. Exit 0 when every figure renders; exit 1 on the first
// bad spec, unreadable/invalid CSV, or missing column (no file is written
// for the failing spec).

import { mkdirSync, readFileSync, writeFileSync } from "fs";
import { dirname, resolve } from "path";
import { loadRows, renderFigure } from "./render.js";
import { parsePlotSpec, type PlotSpec } from "./series.js";

export function runOne(specPath: string): string {
  const spec: PlotSpec = parsePlotSpec(
    JSON.parse(readFileSync(specPath, "utf8")),
    specPath,
  );
  // input/output paths are relative to the spec file, so spec bundles stay
  // relocatable
  const base = dirname(resolve(specPath));
  const resolved: PlotSpec = {
    ...spec,
    input: Array.isArray(spec.input)
      ? spec.input.map((p) => resolve(base, p))
      : resolve(base, spec.input),
    output: resolve(base, spec.output),
  };
  const fig = renderFigure(resolved, loadRows(resolved));
  mkdirSync(dirname(resolved.output), { recursive: true });
  writeFileSync(resolved.output, fig.svg);
  const counts = Object.entries(fig.pointCounts)
    .map(([label, n]) => `${label}:${n}`)
    .join(" ");
  return `wrote ${resolved.output} (${fig.seriesCount} series; points ${counts})`;
}

export function main(argv: string[]): number {
  if (argv.length === 0 || argv.includes("--help") || argv.includes("-h")) {
    console.error("usage: blockpr-plot <spec.json> [<spec.json> ...]");
    return argv.length === 0 ? 1 : 0;
  }
  for (const specPath of argv) {
    try {
      console.log(runOne(specPath));
    } catch (err) {
      console.error(`error: ${err instanceof Error ? err.message : err}`);
      return 1;
    }
  }
  return 0;
}

// Only run when invoked as a script, not when imported by tests.
if (
  process.argv[1] &&
  (process.argv[1].endsWith("cli.js") || process.argv[1].endsWith("blockpr-plot"))
) {
  process.exit(main(process.argv.slice(2)));
}
