"""Classical alternating-projection baseline (Gerchberg-Saxton).

Works on the linear frame behind the correlation grid,

    (F x)[l, j] = <shift_l x, m_j>,   y = |F x|^2,

alternating between the magnitude constraint (replace |F x| by sqrt(y),
keep phases) and the range of F (least-squares projection).  Because the
frame is shift-structured, both F and its pseudoinverse diagonalize over
FFT frequencies: (F x)^[f, j] = conj(mhat_j[f]) * xhat[f], so each
iteration costs O(K d log d).

Used as the comparison point for the synchronization pipeline and as an
optional warm-started refinement of its output.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from blockpr.core import MaskFamily, Signal, csign
from blockpr.lifting import MeasurementGrid
from blockpr.spectral import error_db

__all__ = [
    "GSConfig",
    "GSResult",
    "frame_apply",
    "frame_pinv_apply",
    "gerchberg_saxton",
    "gs_refine",
]


@dataclass(frozen=True)
class GSConfig:
    """max_iter iterations, stopping early when the relative iterate change
    drops below tol.  seed drives the random Gaussian initialization (ignored
    when an explicit starting point is supplied)."""

    max_iter: int = 10_000
    tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")


@dataclass(frozen=True)
class GSResult:
    iterations: int
    converged: bool
    residual: float            # || |F x| - sqrt(y) ||_F at the final iterate
    relative_residual: float   # residual / ||sqrt(y)||_F
    rel_change: float          # last relative iterate change
    residuals: np.ndarray      # residual at the start of each iteration + final
    time_ms: float
    error_db: float | None = None

    def summary(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "residual": self.residual,
            "relative_residual": self.relative_residual,
            "error_db": self.error_db,
            "time_ms": self.time_ms,
        }


def _mask_spectra(masks: MaskFamily) -> tuple[np.ndarray, np.ndarray]:
    """conj(mhat) per mask, and the per-frequency frame weights sum_j |mhat_j[f]|^2."""
    mhat = np.fft.fft(masks.masks, axis=1)  # (K, d)
    weights = np.sum(np.abs(mhat) ** 2, axis=0)  # (d,)
    if np.any(weights <= 1e-14 * weights.max(initial=0.0)):
        dead = int(np.argmin(weights))
        raise ValueError(f"mask family leaves frequency {dead} unmeasured; "
                         "the frame has no left inverse")
    return mhat.conj(), weights


def frame_apply(x: Signal | np.ndarray, masks: MaskFamily) -> np.ndarray:
    """The (d, K) linear frame (F x)[l, j] = <shift_l x, m_j>."""
    e = x.entries if isinstance(x, Signal) else np.asarray(x, dtype=np.complex128)
    xhat = np.fft.fft(e)
    return np.fft.ifft(xhat[None, :] * np.fft.fft(masks.masks, axis=1).conj(), axis=1).T


def frame_pinv_apply(V: np.ndarray, masks: MaskFamily) -> np.ndarray:
    """Least-squares preimage of a (d, K) frame image, one 1-d solve per
    FFT frequency: xhat[f] = sum_j mhat_j[f] Vhat[f, j] / sum_j |mhat_j[f]|^2."""
    mhat_conj, weights = _mask_spectra(masks)
    Vhat = np.fft.fft(V, axis=0)  # (d, K)
    xhat = np.einsum("jf,fj->f", mhat_conj.conj(), Vhat) / weights
    return np.fft.ifft(xhat)


def gerchberg_saxton(grid: MeasurementGrid, masks: MaskFamily,
                     config: GSConfig | None = None,
                     init: Signal | None = None,
                     truth: Signal | None = None) -> tuple[Signal, GSResult]:
    """Alternating projections between the measured magnitudes and the frame
    range.  Returns the estimate (up to global phase) and run statistics.

    The measurement-domain residual || |F x_t| - sqrt(y) || is non-increasing
    in t (each step is a pair of nearest-point projections).
    """
    cfg = config or GSConfig()
    if grid.d != masks.d or grid.K != masks.K:
        raise ValueError("grid shape does not match mask family")
    t0 = time.perf_counter()
    d, K = grid.d, grid.K
    target = np.sqrt(np.maximum(grid.y, 0.0))  # (d, K)
    tnorm = float(np.linalg.norm(target))

    mhat_conj, weights = _mask_spectra(masks)  # (K, d), (d,)
    mhat = mhat_conj.conj()

    if init is not None:
        if init.d != d:
            raise ValueError("starting point has the wrong length")
        e = init.entries.copy()
    else:
        rng = np.random.Generator(np.random.Philox(cfg.seed))
        e = (rng.normal(size=d) + 1j * rng.normal(size=d)) / np.sqrt(2.0)
        e *= tnorm / max(np.linalg.norm(frame_apply(e, masks)), 1e-300)

    xhat = np.fft.fft(e)
    residuals = np.empty(cfg.max_iter + 1)
    converged = False
    rel_change = np.inf
    iterations = 0
    for t in range(cfg.max_iter):
        V = np.fft.ifft(xhat[None, :] * mhat_conj, axis=1).T   # F x_t, (d, K)
        residuals[t] = np.linalg.norm(np.abs(V) - target)
        V = target * csign(V)                                  # magnitude projection
        Vhat = np.fft.fft(V, axis=0)
        xhat_new = np.einsum("jf,fj->f", mhat, Vhat) / weights  # range projection
        iterations = t + 1
        rel_change = float(np.linalg.norm(xhat_new - xhat)
                           / max(np.linalg.norm(xhat), 1e-300))
        xhat = xhat_new
        if rel_change < cfg.tol:
            converged = True
            break

    est = Signal(np.fft.ifft(xhat))
    res = float(np.linalg.norm(np.abs(frame_apply(est, masks)) - target))
    residuals[iterations] = res
    result = GSResult(
        iterations=iterations,
        converged=converged,
        residual=res,
        relative_residual=res / max(tnorm, 1e-300),
        rel_change=rel_change,
        residuals=residuals[: iterations + 1].copy(),
        time_ms=(time.perf_counter() - t0) * 1e3,
        error_db=None if truth is None else error_db(est, truth),
    )
    return est, result


def gs_refine(grid: MeasurementGrid, masks: MaskFamily, x0: Signal,
              iterations: int = 100,
              truth: Signal | None = None) -> tuple[Signal, GSResult]:
    """Warm-started alternating-projection polish of an existing estimate."""
    cfg = GSConfig(max_iter=iterations)
    return gerchberg_saxton(grid, masks, cfg, init=x0, truth=truth)
