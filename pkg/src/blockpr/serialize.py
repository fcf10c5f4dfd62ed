"""File formats for signals, measurement grids, mask families, and reports.

CSV is the interchange format of the benchmark harness; JSON carries the same
payloads plus metadata.  All floats are written with Python repr (shortest
string that parses back to the identical double), so save -> load roundtrips
are exact.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from blockpr.core import MaskFamily, MaskKind, Signal
from blockpr.lifting import MeasurementGrid

__all__ = [
    "save_signal_csv", "load_signal_csv",
    "save_signal_json", "load_signal_json",
    "save_grid_csv", "load_grid_csv",
    "save_grid_json", "load_grid_json",
    "save_masks_json", "load_masks_json",
    "save_report_json", "load_report_json",
]


def _complex_pairs(z: np.ndarray) -> list[list[float]]:
    return [[float(v.real), float(v.imag)] for v in z]


def _from_pairs(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


# -- signals -------------------------------------------------------------------


def save_signal_csv(x: Signal, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "re", "im"])
        for i, v in enumerate(x.entries):
            w.writerow([i, repr(float(v.real)), repr(float(v.imag))])


def load_signal_csv(path: str | Path) -> Signal:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: empty signal file")
    entries = np.zeros(len(rows), dtype=np.complex128)
    for row in rows:
        entries[int(row["index"])] = float(row["re"]) + 1j * float(row["im"])
    return Signal(entries)


def save_signal_json(x: Signal, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump({"d": x.d, "entries": _complex_pairs(x.entries)}, fh, indent=1)


def load_signal_json(path: str | Path) -> Signal:
    with open(path) as fh:
        payload = json.load(fh)
    return Signal(_from_pairs(payload["entries"]))


# -- measurement grids ---------------------------------------------------------


def save_grid_csv(grid: MeasurementGrid, path: str | Path) -> None:
    """Long-form rows (shift, mask, y); bandwidth kept in a leading comment."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# delta={grid.delta}\n")
        w = csv.writer(fh)
        w.writerow(["shift", "mask", "y"])
        for ell in range(grid.d):
            for j in range(grid.K):
                w.writerow([ell, j, repr(float(grid.y[ell, j]))])


def load_grid_csv(path: str | Path) -> MeasurementGrid:
    delta = None
    data_lines = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                if key.strip() == "delta":
                    delta = int(val)
                continue
            data_lines.append(line)
    if delta is None:
        raise ValueError(f"{path}: missing '# delta=...' header")
    rows = list(csv.DictReader(data_lines))
    if not rows:
        raise ValueError(f"{path}: no measurement rows")
    d = max(int(r["shift"]) for r in rows) + 1
    K = max(int(r["mask"]) for r in rows) + 1
    y = np.full((d, K), np.nan)
    for r in rows:
        y[int(r["shift"]), int(r["mask"])] = float(r["y"])
    if np.any(np.isnan(y)):
        raise ValueError(f"{path}: incomplete grid (missing shift/mask rows)")
    return MeasurementGrid(y=y, delta=delta)


def save_grid_json(grid: MeasurementGrid, path: str | Path) -> None:
    payload = {
        "d": grid.d,
        "K": grid.K,
        "delta": grid.delta,
        "y": [[float(v) for v in row] for row in grid.y],
    }
    if grid.noise is not None:
        payload["noise"] = grid.noise
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)


def load_grid_json(path: str | Path) -> MeasurementGrid:
    with open(path) as fh:
        payload = json.load(fh)
    return MeasurementGrid(y=np.asarray(payload["y"], dtype=np.float64),
                           delta=int(payload["delta"]),
                           noise=payload.get("noise"))


# -- mask families ---------------------------------------------------------------


def save_masks_json(masks: MaskFamily, path: str | Path) -> None:
    payload = {
        "kind": masks.kind.value,
        "d": masks.d,
        "K": masks.K,
        "delta": masks.delta,
        "decay": masks.decay,
        "masks": [_complex_pairs(row) for row in masks.masks],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)


def load_masks_json(path: str | Path) -> MaskFamily:
    with open(path) as fh:
        payload = json.load(fh)
    rows = np.stack([_from_pairs(row) for row in payload["masks"]])
    return MaskFamily(masks=rows, delta=int(payload["delta"]),
                      kind=MaskKind(payload["kind"]), decay=payload.get("decay"))


# -- reports ---------------------------------------------------------------------


def save_report_json(report, path: str | Path) -> None:
    """Serialize anything exposing to_dict() (or a plain mapping)."""
    payload = report.to_dict() if hasattr(report, "to_dict") else dict(report)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, default=_json_fallback)


def load_report_json(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _json_fallback(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")
