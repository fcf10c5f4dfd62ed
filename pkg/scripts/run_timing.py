#!/usr/bin/env python3
"""Runtime-scaling benchmark: recovery time vs signal length.

Noiseless recoveries with delta = ceil(log2 d) over a dyadic range of d,
several trials each; prints the fitted log-log slope (quasilinear pipelines
land near 1).  Output feeds the timing figure:

    python scripts/run_timing.py --out results/timing.csv
"""

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from blockpr.harness import ExperimentConfig, aggregate, run_experiment


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/timing.csv")
    ap.add_argument("--log2-min", type=int, default=8)
    ap.add_argument("--log2-max", type=int, default=13)
    ap.add_argument("--trials", type=int, default=3)
    ap.add_argument("--seed", type=int, default=9)
    args = ap.parse_args(argv)

    ds = tuple(2**k for k in range(args.log2_min, args.log2_max + 1))
    deltas = tuple(int(math.ceil(math.log2(d))) for d in ds)
    config = ExperimentConfig(ds=ds, deltas=deltas, pairing="zip",
                              algorithms=("blockpr",),
                              n_trials=args.trials, seed=args.seed)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    rows = run_experiment(config, out_csv=args.out)
    print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)

    aggs = aggregate(rows)
    print(f"{'d':>6} {'delta':>6} {'mean_ms':>9}")
    for agg in aggs:
        print(f"{agg['d']:>6} {agg['delta']:>6} {agg['mean_time_ms']:>9.2f}")
    slope = float(np.polyfit(np.log2([a["d"] for a in aggs]),
                             np.log2([a["mean_time_ms"] for a in aggs]), 1)[0])
    print(f"log-log slope: {slope:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
