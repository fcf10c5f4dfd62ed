import { readFileSync } from "fs";
import { describe, expect, it } from "vitest";
import { renderFigure } from "../src/render.js";
import { parseResultsCsv } from "../src/schema.js";
import type { PlotSpec } from "../src/series.js";

const FIXTURES = new URL("./fixtures/", import.meta.url).pathname;
const robustness = parseResultsCsv(
  readFileSync(FIXTURES + "robustness.csv", "utf8"),
);
const timing = parseResultsCsv(readFileSync(FIXTURES + "timing.csv", "utf8"));

const robustnessSpec: PlotSpec = {
  input: "robustness.csv",
  kind: "RobustnessCurve",
  groupBy: "algorithm",
  output: "robustness.svg",
};

describe("renderFigure", () => {
  it("reports series/point counts that match the table", () => {
    const fig = renderFigure(robustnessSpec, robustness);
    expect(fig.seriesCount).toBe(2);
    expect(fig.pointCounts).toEqual({ blockpr: 6, gs: 6 });
  });

  it("draws one polyline per series and one marker per point", () => {
    const fig = renderFigure(robustnessSpec, robustness);
    expect(fig.svg.match(/<polyline /g)).toHaveLength(2);
    expect(fig.svg.match(/<circle /g)).toHaveLength(12);
    expect(fig.svg).toContain("SNR (dB)");
    expect(fig.svg).toContain("relative error (dB)");
    expect(fig.svg).toContain("Reconstruction error vs SNR");
  });

  it("annotates the timing figure with the fitted log-log slope", () => {
    const fig = renderFigure(
      {
        input: "timing.csv",
        kind: "TimingLogLog",
        groupBy: "algorithm",
        output: "timing.svg",
      },
      timing,
    );
    expect(fig.seriesCount).toBe(1);
    expect(fig.svg).toMatch(/fitted slope -?\d+\.\d\d/);
    expect(fig.svg).toContain("recovery time (s)");
  });

  it("honours a custom title", () => {
    const fig = renderFigure({ ...robustnessSpec, title: "run 42" }, robustness);
    expect(fig.svg).toContain(">run 42</text>");
  });

  it("is deterministic: same rows give identical bytes", () => {
    const a = renderFigure(robustnessSpec, robustness).svg;
    const b = renderFigure(robustnessSpec, robustness).svg;
    expect(a).toBe(b);
  });
});
