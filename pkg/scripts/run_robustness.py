#!/usr/bin/env python3
"""Error-vs-SNR benchmark at a fixed problem size.

Runs the recovery pipeline (block magnitudes), its alternating-projection
refinement, and the plain alternating-projection baseline over a grid of
noise levels, writing one CSV row per (snr, algorithm, trial).  The output
feeds the robustness figure:

    python scripts/run_robustness.py --out results/robustness.csv
    blockpr-plot frontend/specs/robustness.json   # after building frontend/
"""

import argparse
import sys
from pathlib import Path

from blockpr.harness import ExperimentConfig, aggregate, run_experiment
from blockpr.sync import MagnitudeMethod


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/robustness.csv")
    ap.add_argument("--d", type=int, default=64)
    ap.add_argument("--delta", type=int, default=4)
    ap.add_argument("--snrs", type=float, nargs="+",
                    default=[20.0, 30.0, 40.0, 50.0, 60.0])
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--threads", type=int, default=None,
                    help="worker threads (default: BLOCKPR_THREADS or 1)")
    args = ap.parse_args(argv)

    config = ExperimentConfig(
        ds=(args.d,), deltas=(args.delta,), snrs_db=tuple(args.snrs),
        algorithms=("blockpr", "blockpr_gs", "gs"),
        n_trials=args.trials, seed=args.seed,
        magnitude=MagnitudeMethod(gamma=args.delta, step=1, combine="mean"),
    )
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    rows = run_experiment(config, out_csv=args.out, threads=args.threads)
    print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)

    print(f"{'snr_db':>7} {'algorithm':>12} {'mean_db':>9} {'median_db':>10}")
    for agg in aggregate(rows):
        print(f"{agg['snr_db']:>7.0f} {agg['algorithm']:>12} "
              f"{agg['mean_error_db']:>9.2f} {agg['median_error_db']:>10.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
