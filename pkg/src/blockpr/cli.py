"""Command-line interface.

Subcommands: masks, measure, recover, spectrum, bench, check-bounds.
Exit codes: 0 success, 1 validation/usage failure or violated bound, 2 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from blockpr.core import MaskKind, build_masks
from blockpr.harness import (
    ALGORITHMS,
    ExperimentConfig,
    aggregate,
    run_experiment,
    synthesize_noise,
    trial_rng,
)
from blockpr.lifting import build_solver, forward_measure
from blockpr.serialize import (
    load_grid_csv,
    load_grid_json,
    load_masks_json,
    load_signal_csv,
    load_signal_json,
    save_grid_csv,
    save_grid_json,
    save_masks_json,
    save_report_json,
    save_signal_csv,
    save_signal_json,
)
from blockpr.spectral import spectral_gap
from blockpr.sync import MagnitudeMethod, RecoverConfig, recover

EXP_KAPPA_FACTOR = 144.0 * math.e ** 2
EXP_KAPPA_QUAD = 9.0 * math.e ** 2 / 4.0


def _mask_kind(name: str) -> MaskKind:
    try:
        return MaskKind(name)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"unknown mask kind {name!r}; choose from "
            f"{[k.value for k in MaskKind]}") from None


def _load_signal(path: str):
    return load_signal_json(path) if path.endswith(".json") else load_signal_csv(path)


def _load_grid(path: str):
    return load_grid_json(path) if path.endswith(".json") else load_grid_csv(path)


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok)


def _snr_list(text: str) -> tuple[float | None, ...]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        out.append(None if tok.lower() in ("inf", "none", "noiseless")
                   else float(tok))
    return tuple(out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="blockpr",
                                description="Phase retrieval from local "
                                            "correlation measurements.")
    sub = p.add_subparsers(dest="command", required=True)

    pm = sub.add_parser("masks", help="construct a deterministic mask family")
    pm.add_argument("--kind", type=_mask_kind, default=MaskKind.EXP_FOURIER)
    pm.add_argument("--d", type=int, required=True)
    pm.add_argument("--delta", type=int, required=True)
    pm.add_argument("--decay", type=float, default=None)
    pm.add_argument("--format", choices=["csv", "json"], default="json")
    pm.add_argument("--out", default=None, help="default: stdout")

    pe = sub.add_parser("measure", help="measure a signal through a mask family")
    pe.add_argument("--kind", type=_mask_kind, default=MaskKind.EXP_FOURIER)
    pe.add_argument("--delta", type=int, required=True)
    pe.add_argument("--decay", type=float, default=None)
    pe.add_argument("--signal", required=True, help="signal file (.csv or .json)")
    pe.add_argument("--snr-db", type=float, default=None,
                    help="add Gaussian noise at this SNR")
    pe.add_argument("--seed", type=int, default=0)
    pe.add_argument("--format", choices=["csv", "json"], default="csv")
    pe.add_argument("--out", default=None, help="default: stdout")

    pr = sub.add_parser("recover", help="recover a signal from a measurement grid")
    pr.add_argument("--grid", required=True, help="grid file (.csv or .json)")
    group = pr.add_mutually_exclusive_group()
    group.add_argument("--kind", type=_mask_kind, default=MaskKind.EXP_FOURIER,
                       help="rebuild the deterministic masks used to measure")
    group.add_argument("--masks", default=None, help="mask family JSON file")
    pr.add_argument("--decay", type=float, default=None)
    pr.add_argument("--strategy", choices=["auto", "block_fft", "pair_closed"],
                    default="auto")
    pr.add_argument("--magnitude", choices=["blocks", "diagonal"], default="blocks")
    pr.add_argument("--truth", default=None, help="reference signal for error_db")
    pr.add_argument("--report", default=None, help="write run diagnostics JSON here")
    pr.add_argument("--format", choices=["csv", "json"], default="csv")
    pr.add_argument("--out", default=None, help="default: stdout")

    ps = sub.add_parser("spectrum", help="band graph spectrum and gap bounds")
    ps.add_argument("--d", type=int, required=True)
    ps.add_argument("--delta", type=int, required=True)
    ps.add_argument("--format", choices=["csv", "json"], default="json")
    ps.add_argument("--out", default=None, help="default: stdout")

    pb = sub.add_parser("bench", help="run a benchmark sweep to CSV")
    pb.add_argument("--ds", type=_int_list, required=True, help="e.g. 32,64")
    pb.add_argument("--deltas", type=_int_list, required=True, help="e.g. 3,4")
    pb.add_argument("--pairing", choices=["product", "zip"], default="product")
    pb.add_argument("--snrs-db", type=_snr_list, default=(None,),
                    help="e.g. 20,30,40,inf")
    pb.add_argument("--algorithms", default="blockpr",
                    help=f"comma list from {sorted(ALGORITHMS)}")
    pb.add_argument("--trials", type=int, default=10)
    pb.add_argument("--seed", type=int, default=0)
    pb.add_argument("--kind", type=_mask_kind, default=MaskKind.EXP_FOURIER)
    pb.add_argument("--gs-max-iter", type=int, default=10_000)
    pb.add_argument("--threads", type=int, default=None,
                    help="default: BLOCKPR_THREADS or 1")
    pb.add_argument("--out", required=True, help="results CSV (resumable)")

    pc = sub.add_parser("check-bounds",
                        help="verify conditioning and spectral-gap guarantees")
    pc.add_argument("--d", type=int, required=True)
    pc.add_argument("--delta", type=int, required=True)
    pc.add_argument("--kind", type=_mask_kind, default=MaskKind.EXP_FOURIER)
    pc.add_argument("--decay", type=float, default=None)
    return p


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")


def _cmd_masks(args) -> int:
    fam = build_masks(args.kind, args.d, args.delta, decay=args.decay)
    if args.format == "json":
        if args.out is None:
            tmp = {"kind": fam.kind.value, "d": fam.d, "K": fam.K,
                   "delta": fam.delta, "decay": fam.decay,
                   "masks": [[[v.real, v.imag] for v in row] for row in fam.masks]}
            _emit(json.dumps(tmp, indent=1), None)
        else:
            save_masks_json(fam, args.out)
    else:
        lines = ["mask,index,re,im"]
        for j in range(fam.K):
            for n in range(fam.d):
                v = fam.masks[j, n]
                lines.append(f"{j},{n},{v.real!r},{v.imag!r}")
        _emit("\n".join(lines), args.out)
    return 0


def _cmd_measure(args) -> int:
    x = _load_signal(args.signal)
    fam = build_masks(args.kind, x.d, args.delta, decay=args.decay)
    grid = forward_measure(x, fam)
    if args.snr_db is not None:
        grid = synthesize_noise(grid, args.snr_db, trial_rng(args.seed, 0))
    if args.out is None:
        import io
        buf = io.StringIO()
        if args.format == "csv":
            buf.write(f"# delta={grid.delta}\n")
            w = csv.writer(buf)
            w.writerow(["shift", "mask", "y"])
            for ell in range(grid.d):
                for j in range(grid.K):
                    w.writerow([ell, j, repr(float(grid.y[ell, j]))])
        else:
            json.dump({"d": grid.d, "K": grid.K, "delta": grid.delta,
                       "y": grid.y.tolist(), "noise": grid.noise}, buf, indent=1)
        _emit(buf.getvalue(), None)
    elif args.format == "csv":
        save_grid_csv(grid, args.out)
    else:
        save_grid_json(grid, args.out)
    return 0


def _cmd_recover(args) -> int:
    grid = _load_grid(args.grid)
    if args.masks is not None:
        fam = load_masks_json(args.masks)
    else:
        fam = build_masks(args.kind, grid.d, grid.delta, decay=args.decay)
    solver = build_solver(fam, args.strategy)
    truth = _load_signal(args.truth) if args.truth else None
    cfg = RecoverConfig(magnitude=MagnitudeMethod(kind=args.magnitude))
    est, report = recover(grid, solver, cfg, truth=truth)
    if args.out is None:
        lines = ["index,re,im"]
        lines += [f"{i},{v.real!r},{v.imag!r}" for i, v in enumerate(est.entries)]
        _emit("\n".join(lines), None)
    elif args.format == "json":
        save_signal_json(est, args.out)
    else:
        save_signal_csv(est, args.out)
    if args.report:
        save_report_json(report, args.report)
    msg = (f"recovered d={solver.d} delta={solver.delta} "
           f"strategy={solver.strategy} kappa={solver.kappa:.4g} "
           f"eig_iters={report.eigen['iterations']}")
    if report.error_db is not None:
        msg += f" error_db={report.error_db:.2f}"
    print(msg, file=sys.stderr)
    return 0


def _cmd_spectrum(args) -> int:
    rep = spectral_gap(args.d, args.delta).to_dict()
    if args.format == "json":
        _emit(json.dumps(rep, indent=1), args.out)
    else:
        lines = ["key,value"] + [f"{k},{v!r}" for k, v in rep.items()
                                 if not isinstance(v, list)]
        _emit("\n".join(lines), args.out)
    return 0


def _cmd_bench(args) -> int:
    algorithms = tuple(tok for tok in args.algorithms.split(",") if tok)
    cfg = ExperimentConfig(ds=args.ds, deltas=args.deltas, snrs_db=args.snrs_db,
                           algorithms=algorithms, n_trials=args.trials,
                           seed=args.seed, mask_kind=args.kind,
                           gs_max_iter=args.gs_max_iter, pairing=args.pairing)
    rows = run_experiment(cfg, args.out, threads=args.threads)
    for agg in aggregate(rows):
        print(f"d={agg['d']} delta={agg['delta']} snr_db={agg['snr_db']} "
              f"{agg['algorithm']}: median {agg['median_error_db']:.2f} dB "
              f"over {agg['n']} trials ({agg['mean_time_ms']:.2f} ms avg)",
              file=sys.stderr)
    print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    return 0


def _cmd_check_bounds(args) -> int:
    d, delta = args.d, args.delta
    checks: list[tuple[str, bool, str]] = []

    fam = build_masks(args.kind, d, delta, decay=args.decay)
    solver = build_solver(fam)
    if args.kind is MaskKind.EXP_FOURIER:
        a = fam.decay
        kappa_bound = max(EXP_KAPPA_FACTOR, EXP_KAPPA_QUAD * max(delta - 1, 1) ** 2)
        smin_bound = 7.0 / (20.0 * a) * math.exp(-(delta + 1) / a)
        checks.append(("kappa_upper", solver.kappa < kappa_bound,
                       f"kappa={solver.kappa:.6g} < {kappa_bound:.6g}"))
        checks.append(("sigma_min_lower", solver.sigma_min > smin_bound,
                       f"sigma_min={solver.sigma_min:.6g} > {smin_bound:.6g}"))
    elif args.kind is MaskKind.SPIKE_PAIR:
        root = math.sqrt(2 * delta)
        kappa_bound = (2 + 2 * root) * (0.5 + root)
        checks.append(("kappa_upper", solver.kappa <= kappa_bound,
                       f"kappa={solver.kappa:.6g} <= {kappa_bound:.6g}"))
    else:
        checks.append(("kappa_finite", np.isfinite(solver.kappa),
                       f"kappa={solver.kappa:.6g}"))

    rep = spectral_gap(d, delta)
    if rep.bounds_valid:
        checks.append(("gap_lower", rep.gap_magnitude >= rep.gap_lower_bound - 1e-9,
                       f"gap={rep.gap_magnitude:.6g} >= {rep.gap_lower_bound:.6g}"))
        checks.append(("gap_upper", rep.gap_signed <= rep.gap_upper_bound + 1e-9,
                       f"gap_signed={rep.gap_signed:.6g} <= {rep.gap_upper_bound:.6g}"))

    failed = False
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failed = failed or not ok
    return 1 if failed else 0


_COMMANDS = {
    "masks": _cmd_masks,
    "measure": _cmd_measure,
    "recover": _cmd_recover,
    "spectrum": _cmd_spectrum,
    "bench": _cmd_bench,
    "check-bounds": _cmd_check_bounds,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage problems; fold those into the validation
        # exit code (1) while letting --help keep its success status.
        return 1 if exc.code else 0
    try:
        return _COMMANDS[args.command](args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
