#!/usr/bin/env python3
"""Error-vs-measurement-count benchmark at fixed noise.

Sweeps the band half-width delta at fixed d and SNR; the total measurement
count is D = d * (2*delta - 1), so the sweep shows how reconstruction error
buys into the oversampling rate.  Output feeds the measurement-sweep figure:

    python scripts/run_measurement_sweep.py --out results/measurements.csv
"""

import argparse
import sys
from pathlib import Path

from blockpr.harness import ExperimentConfig, aggregate, run_experiment
from blockpr.sync import MagnitudeMethod


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/measurements.csv")
    ap.add_argument("--d", type=int, default=64)
    ap.add_argument("--deltas", type=int, nargs="+", default=[2, 3, 4, 5, 6, 8])
    ap.add_argument("--snr", type=float, default=30.0)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args(argv)

    # gamma=2 blocks are valid for every delta >= 2 in the sweep
    config = ExperimentConfig(
        ds=(args.d,), deltas=tuple(args.deltas), snrs_db=(args.snr,),
        algorithms=("blockpr", "gs"), n_trials=args.trials, seed=args.seed,
        magnitude=MagnitudeMethod(gamma=2, step=1, combine="mean"),
    )
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    rows = run_experiment(config, out_csv=args.out, threads=args.threads)
    print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)

    print(f"{'delta':>6} {'D':>6} {'algorithm':>10} {'mean_db':>9}")
    for agg in aggregate(rows):
        D = agg["d"] * (2 * agg["delta"] - 1)
        print(f"{agg['delta']:>6} {D:>6} {agg['algorithm']:>10} "
              f"{agg['mean_error_db']:>9.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
