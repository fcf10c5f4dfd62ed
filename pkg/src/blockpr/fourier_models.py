"""Fourier-domain measurement models: ptychography and short-time Fourier
transform (STFT) magnitudes.

Both models are exact reindexings of the local correlation grid, so the banded
inversion pipeline applies unchanged:

* Ptychography records, for every specimen shift l, the Fourier intensities of
  the exit wave (shifted signal times a delta-supported illumination probe).
  Frequency g plays the role of a mask: the correlation mask is
  conj(probe) * exp(2*pi*i*n*g/d).  Sampling 2*delta - 1 evenly spaced
  frequencies of the exponential probe reproduces the EXP_FOURIER family
  entry for entry.

* STFT magnitudes with a band-limited window (spectrum supported on delta
  frequencies) and a subset of window positions are, after transposing the
  (position, frequency) axes, a correlation grid for the Fourier-domain
  signal xhat / d.  Recovery runs in that domain and returns by inverse FFT.
"""

from __future__ import annotations

import numpy as np

from blockpr.core import MaskFamily, MaskKind, Signal, build_masks
from blockpr.lifting import MeasurementGrid, build_solver, forward_measure
from blockpr.sync import RecoverConfig, RecoveryReport, recover

__all__ = [
    "exp_illumination",
    "ptycho_frequencies",
    "ptycho_masks",
    "ptycho_measure",
    "stft_window",
    "stft_shifts",
    "stft_masks",
    "stft_measure",
    "stft_to_grid",
    "stft_recover",
]


def exp_illumination(delta: int, decay: float | None = None) -> np.ndarray:
    """The exponentially damped probe window used by the EXP_FOURIER masks:
    entries exp(-(n+1)/a) / (2*delta-1)^(1/4) for n = 0 .. delta-1."""
    delta = int(delta)
    if delta < 1:
        raise ValueError("delta must be positive")
    a = float(decay) if decay is not None else max(4.0, (delta - 1) / 2.0)
    if a <= 0:
        raise ValueError("decay parameter must be positive")
    n = np.arange(delta)
    return np.exp(-(n + 1) / a) / (2 * delta - 1) ** 0.25


def ptycho_frequencies(d: int, delta: int) -> np.ndarray:
    """The 2*delta - 1 evenly spaced modulation frequencies j * d/(2*delta-1).

    Requires (2*delta - 1) | d; these are the frequencies at which the
    ptychographic family coincides with the EXP_FOURIER masks."""
    K = 2 * delta - 1
    if d % K != 0:
        raise ValueError(f"evenly spaced sampling needs (2*delta-1) | d, "
                         f"got d={d}, 2*delta-1={K}")
    return np.arange(K) * (d // K)


def ptycho_masks(d: int, delta: int, *, decay: float | None = None,
                 illumination: np.ndarray | None = None,
                 frequencies: np.ndarray | None = None) -> MaskFamily:
    """Masks of the ptychographic model: conj(probe) modulated at the given
    frequencies, m_g[n] = conj(w[n]) * exp(2*pi*i*n*g/d) for n < delta.

    Default illumination is the exponential probe; default frequencies are
    the 2*delta - 1 evenly spaced ones (requires (2*delta-1) | d), which make
    the family coincide with build_masks(EXP_FOURIER, d, delta).
    """
    d = int(d)
    delta = int(delta)
    if not 1 <= delta <= d:
        raise ValueError(f"delta must satisfy 1 <= delta <= d, got delta={delta}, d={d}")
    if illumination is None:
        probe = exp_illumination(delta, decay)
    else:
        probe = np.asarray(illumination, dtype=np.complex128)
        if probe.shape != (delta,):
            raise ValueError(f"illumination must have shape ({delta},)")
    if frequencies is None:
        frequencies = ptycho_frequencies(d, delta)
    freqs = np.asarray(frequencies, dtype=np.int64) % d
    if freqs.ndim != 1 or freqs.size == 0:
        raise ValueError("frequencies must be a non-empty 1-d integer array")

    n = np.arange(delta)
    masks = np.zeros((freqs.size, d), dtype=np.complex128)
    masks[:, :delta] = probe.conj()[None, :] * np.exp(
        2j * np.pi * n[None, :] * freqs[:, None] / d)
    return MaskFamily(masks=masks, delta=delta, kind=MaskKind.PTYCHO)


def ptycho_measure(x: Signal, illumination: np.ndarray,
                   frequencies: np.ndarray) -> MeasurementGrid:
    """Physical-form ptychographic intensities: for each shift l, the Fourier
    magnitudes |FFT(shift_l x * probe)[g]|^2 at the requested frequencies.

    Equals forward_measure(x, ptycho_masks(...)) entry for entry.
    """
    probe = np.asarray(illumination, dtype=np.complex128)
    delta = probe.size
    d = x.d
    if delta > d:
        raise ValueError("illumination longer than the signal")
    freqs = np.asarray(frequencies, dtype=np.int64) % d
    w = np.zeros(d, dtype=np.complex128)
    w[:delta] = probe
    y = np.empty((d, freqs.size))
    for ell in range(d):
        spectrum = np.fft.fft(np.roll(x.entries, -ell) * w)
        y[ell] = np.abs(spectrum[freqs]) ** 2
    return MeasurementGrid(y=y, delta=delta)


# -- STFT --------------------------------------------------------------------


def stft_window(d: int, delta: int, *, decay: float | None = None) -> np.ndarray:
    """A band-limited window of length d whose conjugate's spectrum is the
    exponential probe on frequencies 0 .. delta-1 (zero elsewhere).

    With this window and evenly spaced positions, the STFT grid transposes
    into the EXP_FOURIER correlation grid for xhat / d.
    """
    chat = np.zeros(d, dtype=np.complex128)
    chat[:delta] = exp_illumination(delta, decay)
    return np.fft.ifft(chat).conj()


def stft_shifts(d: int, delta: int) -> np.ndarray:
    """2*delta - 1 evenly spaced window positions (requires (2*delta-1) | d)."""
    return ptycho_frequencies(d, delta)


def stft_measure(x: Signal, window: np.ndarray,
                 shifts: np.ndarray | None = None) -> np.ndarray:
    """Spectrogram magnitudes Y[i, k] = |FFT(x * roll(window, shifts[i]))[k]|^2.

    shifts defaults to all d window positions; Y has shape (len(shifts), d).
    """
    window = np.asarray(window, dtype=np.complex128)
    d = x.d
    if window.shape != (d,):
        raise ValueError(f"window must have shape ({d},)")
    if shifts is None:
        shifts = np.arange(d)
    shifts = np.asarray(shifts, dtype=np.int64) % d
    Y = np.empty((shifts.size, d))
    for i, s in enumerate(shifts):
        Y[i] = np.abs(np.fft.fft(x.entries * np.roll(window, s))) ** 2
    return Y


def stft_masks(window: np.ndarray, delta: int,
               shifts: np.ndarray | None = None) -> MaskFamily:
    """Correlation masks equivalent to STFT magnitudes with this window.

    The window must be band-limited: fft(conj(window)) supported on the first
    delta frequencies.  Mask for position s has entries
    chat[g] * exp(-2*pi*i*g*s/d), g < delta, with chat = fft(conj(window)).
    """
    window = np.asarray(window, dtype=np.complex128)
    d = window.size
    delta = int(delta)
    if not 1 <= delta <= d:
        raise ValueError(f"delta must satisfy 1 <= delta <= d, got delta={delta}, d={d}")
    chat = np.fft.fft(window.conj())
    tail = np.abs(chat[delta:]) if delta < d else np.array([0.0])
    if tail.size and tail.max(initial=0.0) > 1e-10 * max(np.abs(chat).max(), 1e-300):
        raise ValueError("window is not band-limited to the first "
                         f"{delta} frequencies (tail {tail.max():.2e})")
    if shifts is None:
        shifts = np.arange(d)
    shifts = np.asarray(shifts, dtype=np.int64) % d
    g = np.arange(delta)
    masks = np.zeros((shifts.size, d), dtype=np.complex128)
    masks[:, :delta] = chat[None, :delta] * np.exp(
        -2j * np.pi * g[None, :] * shifts[:, None] / d)
    return MaskFamily(masks=masks, delta=delta, kind=MaskKind.CUSTOM)


def stft_to_grid(Y: np.ndarray, delta: int) -> MeasurementGrid:
    """Reinterpret spectrogram magnitudes as a correlation grid for xhat / d:
    a pure transpose, Y[position i, frequency k] -> y[shift k, mask i]."""
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2:
        raise ValueError("Y must be a (n_shifts, d) array")
    return MeasurementGrid(y=np.ascontiguousarray(Y.T), delta=int(delta))


def stft_recover(Y: np.ndarray, window: np.ndarray, delta: int,
                 shifts: np.ndarray | None = None,
                 config: RecoverConfig | None = None,
                 truth: Signal | None = None) -> tuple[Signal, RecoveryReport]:
    """Recover a signal from STFT magnitudes (up to a global phase).

    Solves the transposed correlation system for z = xhat / d, then inverts
    the FFT.  The reported error_db is computed in the Fourier domain, which
    equals the time-domain figure since the map z -> x is a scaled unitary.
    """
    masks = stft_masks(window, delta, shifts)
    d = masks.d
    grid = stft_to_grid(Y, delta)
    if grid.d != d or grid.K != masks.K:
        raise ValueError("spectrogram shape does not match window/shifts")
    solver = build_solver(masks)
    truth_z = None if truth is None else Signal(np.fft.fft(truth.entries) / d)
    z, report = recover(grid, solver, config, truth=truth_z)
    x = Signal(d * np.fft.ifft(z.entries))
    return x, report
