"""Benchmark harness: seeded trials, noise synthesis, resumable CSV results.

Every trial is reproducible in isolation: the data for (seed, trial) comes
from a dedicated counter-based stream (Philox keyed by [seed, trial]), so
results do not depend on execution order, thread count, or which other
combinations run.  Rows carry a fixed column set; a JSON sidecar stores the
configuration and a content hash over the non-timing columns so reruns can
be checked for bit-identical results.

Set BLOCKPR_THREADS to parallelize trials across a thread pool (the heavy
kernels release the GIL inside BLAS/FFT).
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from blockpr.baselines import GSConfig, gerchberg_saxton, gs_refine
from blockpr.core import MaskKind, Signal, build_masks
from blockpr.lifting import MeasurementGrid, build_solver, forward_measure
from blockpr.spectral import error_db  # re-exported: the harness error metric
from blockpr.sync import MagnitudeMethod, RecoverConfig, recover

__all__ = [
    "CSV_COLUMNS",
    "ALGORITHMS",
    "ExperimentConfig",
    "delta_for_budget",
    "trial_rng",
    "random_trial_signal",
    "synthesize_noise",
    "run_trial",
    "run_experiment",
    "load_results_csv",
    "results_hash",
    "aggregate",
    "error_db",
]

CSV_COLUMNS = ["d", "delta", "D", "snr_db", "algorithm", "trial", "error_db",
               "time_ms_total", "time_ms_solve", "time_ms_eig", "eig_iters",
               "kappa"]

ALGORITHMS = ("blockpr", "blockpr_diag", "blockpr_gs", "gs")


def delta_for_budget(d: int, budget: int) -> int:
    """Bandwidth delta such that d * (2*delta - 1) measurements stay within
    the budget: delta = ceil((budget/d + 1) / 2), at least 1."""
    if budget < d:
        raise ValueError(f"budget {budget} below one measurement per shift (d={d})")
    return max(1, math.ceil((budget / d + 1) / 2))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Counter-based stream for one trial; independent of all other trials."""
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) | int(trial)))


def random_trial_signal(d: int, rng: np.random.Generator) -> Signal:
    z = (rng.normal(size=d) + 1j * rng.normal(size=d)) / np.sqrt(2.0)
    return Signal(z)


def synthesize_noise(grid: MeasurementGrid, snr_db: float | None,
                     rng: np.random.Generator) -> MeasurementGrid:
    """Additive white Gaussian noise at a prescribed signal-to-noise ratio.

    sigma^2 = sum(y^2) / (D * 10^(snr_db/10)), so E||noise||^2 matches
    ||y||^2 / 10^(snr_db/10).  The realized ratio is recorded in grid.noise.
    """
    if snr_db is None or np.isinf(snr_db):
        return grid
    power = float(np.sum(grid.y ** 2))
    if power == 0.0:
        raise ValueError("cannot set an SNR for an all-zero grid")
    D = grid.y.size
    sigma = math.sqrt(power / (D * 10.0 ** (snr_db / 10.0)))
    noise = rng.normal(scale=sigma, size=grid.y.shape)
    realized = 10.0 * math.log10(power / float(np.sum(noise ** 2)))
    return MeasurementGrid(y=grid.y + noise, delta=grid.delta,
                           noise={"snr_db": float(snr_db), "sigma": sigma,
                                  "realized_snr_db": realized})


@dataclass(frozen=True)
class ExperimentConfig:
    """A benchmark sweep.

    pairing "product" crosses ds with deltas; "zip" walks them in lockstep
    (equal lengths required) for scaling sweeps like delta = ceil(log2 d).
    """

    ds: tuple[int, ...]
    deltas: tuple[int, ...]
    snrs_db: tuple[float | None, ...] = (None,)
    algorithms: tuple[str, ...] = ("blockpr",)
    n_trials: int = 10
    seed: int = 0
    mask_kind: MaskKind = MaskKind.EXP_FOURIER
    strategy: str = "auto"
    magnitude: MagnitudeMethod = field(default_factory=MagnitudeMethod)
    gs_max_iter: int = 10_000
    pairing: str = "product"

    def __post_init__(self):
        for alg in self.algorithms:
            if alg not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {alg!r}; choose from {ALGORITHMS}")
        if self.pairing not in ("product", "zip"):
            raise ValueError("pairing must be 'product' or 'zip'")
        if self.pairing == "zip" and len(self.ds) != len(self.deltas):
            raise ValueError("zip pairing needs len(ds) == len(deltas)")

    def dimension_pairs(self) -> list[tuple[int, int]]:
        if self.pairing == "zip":
            return list(zip(self.ds, self.deltas))
        return [(d, delta) for d in self.ds for delta in self.deltas]

    def to_dict(self) -> dict:
        return {
            "ds": list(self.ds),
            "deltas": list(self.deltas),
            "snrs_db": [None if s is None else float(s) for s in self.snrs_db],
            "algorithms": list(self.algorithms),
            "n_trials": self.n_trials,
            "seed": self.seed,
            "mask_kind": self.mask_kind.value,
            "strategy": self.strategy,
            "magnitude": {"kind": self.magnitude.kind, "gamma": self.magnitude.gamma,
                          "step": self.magnitude.step, "combine": self.magnitude.combine},
            "gs_max_iter": self.gs_max_iter,
            "pairing": self.pairing,
        }


def _gs_seed(seed: int, trial: int) -> int:
    return (seed * 1_000_003 + trial) & 0x7FFFFFFF


def run_trial(d: int, delta: int, snr_db: float | None, algorithm: str,
              trial: int, config: ExperimentConfig, solver, masks) -> dict:
    """One benchmark row.  The signal and noise depend only on
    (seed, trial, d, delta, snr_db) - never on the algorithm."""
    rng = trial_rng(config.seed, trial)
    x = random_trial_signal(d, rng)
    grid = synthesize_noise(forward_measure(x, masks), snr_db, rng)

    row = {
        "d": d, "delta": delta, "D": d * masks.K,
        "snr_db": float("inf") if snr_db is None else float(snr_db),
        "algorithm": algorithm, "trial": trial,
        "time_ms_solve": None, "time_ms_eig": None,
        "eig_iters": None, "kappa": None,
    }

    if algorithm in ("blockpr", "blockpr_diag", "blockpr_gs"):
        magnitude = (MagnitudeMethod(kind="diagonal")
                     if algorithm == "blockpr_diag" else config.magnitude)
        est, report = recover(grid, solver, RecoverConfig(magnitude=magnitude),
                              truth=x)
        row.update(error_db=report.error_db,
                   time_ms_total=report.stage_times_ms["total"],
                   time_ms_solve=report.stage_times_ms["solve"],
                   time_ms_eig=report.stage_times_ms["eigen"],
                   eig_iters=report.eigen["iterations"],
                   kappa=solver.kappa)
        if algorithm == "blockpr_gs":
            refined, res = gs_refine(grid, masks, est, iterations=100, truth=x)
            row.update(error_db=res.error_db,
                       time_ms_total=row["time_ms_total"] + res.time_ms)
    elif algorithm == "gs":
        cfg = GSConfig(max_iter=config.gs_max_iter,
                       seed=_gs_seed(config.seed, trial))
        est, res = gerchberg_saxton(grid, masks, cfg, truth=x)
        row.update(error_db=res.error_db, time_ms_total=res.time_ms)
    else:  # pragma: no cover - guarded by ExperimentConfig validation
        raise ValueError(f"unknown algorithm {algorithm!r}")
    return row


def _row_key(row: dict) -> tuple:
    return (int(row["d"]), int(row["delta"]), float(row["snr_db"]),
            str(row["algorithm"]), int(row["trial"]))


def _format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def run_experiment(config: ExperimentConfig, out_csv: str | Path | None = None,
                   resume: bool = True, threads: int | None = None) -> list[dict]:
    """Run (or finish) a sweep; returns all rows, including pre-existing ones.

    Completed (d, delta, snr, algorithm, trial) combinations found in out_csv
    are skipped, so an interrupted run continues where it stopped.  Rows are
    appended as they finish; the sidecar <out_csv>.meta.json records the
    configuration and the content hash.
    """
    existing: list[dict] = []
    done: set = set()
    if out_csv is not None and resume and Path(out_csv).exists():
        existing = load_results_csv(out_csv)
        done = {_row_key(r) for r in existing}

    pending = []
    for d, delta in config.dimension_pairs():
        for snr_db in config.snrs_db:
            for algorithm in config.algorithms:
                for trial in range(config.n_trials):
                    key = (d, delta,
                           float("inf") if snr_db is None else float(snr_db),
                           algorithm, trial)
                    if key not in done:
                        pending.append((d, delta, snr_db, algorithm, trial))

    solvers: dict = {}
    masks_cache: dict = {}
    for d, delta, *_ in pending:
        if (d, delta) not in solvers:
            masks = build_masks(config.mask_kind, d, delta)
            masks_cache[d, delta] = masks
            solvers[d, delta] = build_solver(masks, config.strategy)

    if threads is None:
        threads = int(os.environ.get("BLOCKPR_THREADS", "1"))
    threads = max(1, threads)

    lock = threading.Lock()
    new_rows: list[dict] = []
    writer = None
    fh = None
    if out_csv is not None:
        out_csv = Path(out_csv)
        fresh = not (out_csv.exists() and resume)
        fh = open(out_csv, "w" if fresh else "a", newline="")
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(CSV_COLUMNS)
            fh.flush()

    def work(task):
        d, delta, snr_db, algorithm, trial = task
        row = run_trial(d, delta, snr_db, algorithm, trial, config,
                        solvers[d, delta], masks_cache[d, delta])
        with lock:
            new_rows.append(row)
            if writer is not None:
                writer.writerow([_format_cell(row[c]) for c in CSV_COLUMNS])
                fh.flush()
        return row

    try:
        if threads == 1:
            for task in pending:
                work(task)
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(work, pending))
    finally:
        if fh is not None:
            fh.close()

    rows = existing + new_rows
    rows.sort(key=_row_key)
    if out_csv is not None:
        sidecar = {
            "config": config.to_dict(),
            "rows": len(rows),
            "results_hash": results_hash(rows),
            "written_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
        }
        with open(str(out_csv) + ".meta.json", "w") as mfh:
            json.dump(sidecar, mfh, indent=1)
    return rows


def load_results_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        raw = list(csv.DictReader(fh))
    rows = []
    for r in raw:
        rows.append({
            "d": int(r["d"]), "delta": int(r["delta"]), "D": int(r["D"]),
            "snr_db": float(r["snr_db"]),
            "algorithm": r["algorithm"], "trial": int(r["trial"]),
            "error_db": float(r["error_db"]),
            "time_ms_total": float(r["time_ms_total"]),
            "time_ms_solve": float(r["time_ms_solve"]) if r["time_ms_solve"] else None,
            "time_ms_eig": float(r["time_ms_eig"]) if r["time_ms_eig"] else None,
            "eig_iters": int(r["eig_iters"]) if r["eig_iters"] else None,
            "kappa": float(r["kappa"]) if r["kappa"] else None,
        })
    return rows


def results_hash(rows: list[dict]) -> str:
    """Content hash over the deterministic columns (timings excluded)."""
    stable_cols = ["d", "delta", "D", "snr_db", "algorithm", "trial",
                   "error_db", "eig_iters", "kappa"]
    h = hashlib.sha256()
    for row in sorted(rows, key=_row_key):
        h.update("|".join(_format_cell(row[c]) for c in stable_cols).encode())
        h.update(b"\n")
    return h.hexdigest()


def aggregate(rows: list[dict]) -> list[dict]:
    """Group by (d, delta, snr_db, algorithm): median/mean error, mean time."""
    groups: dict = {}
    for r in rows:
        groups.setdefault((r["d"], r["delta"], r["snr_db"], r["algorithm"]),
                          []).append(r)
    out = []
    for (d, delta, snr_db, algorithm), members in sorted(groups.items()):
        errs = np.array([m["error_db"] for m in members], dtype=float)
        times = np.array([m["time_ms_total"] for m in members], dtype=float)
        out.append({
            "d": d, "delta": delta, "snr_db": snr_db, "algorithm": algorithm,
            "n": len(members),
            "median_error_db": float(np.median(errs)),
            "mean_error_db": float(np.mean(errs)),
            "mean_time_ms": float(np.mean(times)),
        })
    return out
