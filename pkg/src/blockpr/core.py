"""Core types for banded phase retrieval: signals, mask families, banded Hermitian
matrices stored by circular diagonals, and the band projection.

Index conventions (0-based throughout):
  * circular shift:  (shift_l x)[j] = x[(j + l) % d]
  * band membership: entry (i, j) is "in band" iff circdist(i, j) < delta, where
    circdist(i, j) = min((i - j) % d, (j - i) % d)
  * mask support:    masks live on the first delta coordinates {0, .., delta-1}
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "circdist",
    "csign",
    "circular_shift",
    "Signal",
    "MaskKind",
    "MaskFamily",
    "build_masks",
    "BandedHermitian",
    "PhaseMatrix",
    "normalize_phases",
    "t_delta_project",
]


def circdist(i, j, d):
    """Circular distance between indices i and j on the ring Z_d.

    Accepts scalars or integer arrays (broadcast).
    """
    fwd = np.mod(np.asarray(i) - np.asarray(j), d)
    bwd = np.mod(np.asarray(j) - np.asarray(i), d)
    out = np.minimum(fwd, bwd)
    return out.item() if np.ndim(out) == 0 else out


def csign(z):
    """Entrywise signum z/|z| with the convention csign(0) = 1.

    Works for real or complex scalars and arrays; always returns complex.
    """
    z = np.asarray(z, dtype=np.complex128)
    mag = np.abs(z)
    out = np.where(mag == 0.0, 1.0 + 0.0j, z / np.where(mag == 0.0, 1.0, mag))
    return out.item() if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class Signal:
    """A length-d complex signal (immutable)."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=np.complex128, copy=True)
        if e.ndim != 1 or e.size == 0:
            raise ValueError("signal must be a non-empty 1-D array")
        if not np.all(np.isfinite(e)):
            raise ValueError("signal entries must be finite")
        e.flags.writeable = False
        object.__setattr__(self, "entries", e)

    @property
    def d(self) -> int:
        return self.entries.size

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.entries)

    @property
    def phases(self) -> np.ndarray:
        """Entrywise signum (unit modulus; zero entries map to 1)."""
        return csign(self.entries)

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))


def circular_shift(x: Signal, ell: int) -> Signal:
    """Shift a signal left by ell positions: result[j] = x[(j + ell) % d].

    Shifting e_0 by 1 in d = 4 yields e_3 under this wraparound convention.
    """
    return Signal(np.roll(x.entries, -int(ell)))


class MaskKind(enum.Enum):
    """Deterministic mask family constructions.

    EXP_FOURIER - exponentially damped windowed Fourier masks (well conditioned,
                  decay parameter a, K = 2*delta - 1).
    SPIKE_PAIR  - impulse-pair masks {e0} + {e0 + e_j, e0 + i*e_j : 1 <= j < delta}
                  admitting an O(d*delta) closed-form inversion.
    PTYCHO      - modulated-illumination (ptychographic) masks; see fourier_models.
    CUSTOM      - caller-supplied masks.
    """

    EXP_FOURIER = "exp_fourier"
    SPIKE_PAIR = "spike_pair"
    PTYCHO = "ptycho"
    CUSTOM = "custom"


@dataclass(frozen=True)
class MaskFamily:
    """A family of K masks in C^d, each supported on the first delta coordinates.

    masks[j] is the j-th mask; shape (K, d).
    """

    masks: np.ndarray
    delta: int
    kind: MaskKind = MaskKind.CUSTOM
    decay: float | None = None

    def __post_init__(self):
        m = np.array(self.masks, dtype=np.complex128, copy=True)
        if m.ndim != 2 or m.shape[0] == 0:
            raise ValueError("masks must be a non-empty (K, d) array")
        d = m.shape[1]
        delta = int(self.delta)
        if not 1 <= delta <= d:
            raise ValueError(f"delta must satisfy 1 <= delta <= d, got delta={delta}, d={d}")
        if delta < d and np.any(m[:, delta:] != 0):
            raise ValueError("masks must vanish outside the first delta coordinates")
        m.flags.writeable = False
        object.__setattr__(self, "masks", m)
        object.__setattr__(self, "delta", delta)

    @property
    def K(self) -> int:
        return self.masks.shape[0]

    @property
    def d(self) -> int:
        return self.masks.shape[1]


def build_masks(kind: MaskKind, d: int, delta: int, *, decay: float | None = None) -> MaskFamily:
    """Construct one of the deterministic mask families with K = 2*delta - 1 masks.

    EXP_FOURIER: mask j has entries exp(-(n+1)/a) / (2*delta-1)^(1/4)
                 * exp(2*pi*i*n*j / (2*delta-1)) for n < delta, with
                 a = decay if given else max(4, (delta-1)/2).
    SPIKE_PAIR:  mask 0 = e_0; mask 2j-1 = e_0 + e_j; mask 2j = e_0 + i*e_j
                 for j = 1 .. delta-1.
    """
    d = int(d)
    delta = int(delta)
    if not 1 <= delta <= d:
        raise ValueError(f"delta must satisfy 1 <= delta <= d, got delta={delta}, d={d}")
    K = 2 * delta - 1

    if kind is MaskKind.EXP_FOURIER:
        a = float(decay) if decay is not None else max(4.0, (delta - 1) / 2.0)
        if a <= 0:
            raise ValueError("decay parameter must be positive")
        n = np.arange(delta)
        window = np.exp(-(n + 1) / a) / (2 * delta - 1) ** 0.25
        masks = np.zeros((K, d), dtype=np.complex128)
        for j in range(K):
            masks[j, :delta] = window * np.exp(2j * np.pi * n * j / (2 * delta - 1))
        return MaskFamily(masks=masks, delta=delta, kind=kind, decay=a)

    if kind is MaskKind.SPIKE_PAIR:
        if delta > 1 and d < 2:
            raise ValueError("spike-pair masks need d >= 2 when delta > 1")
        masks = np.zeros((K, d), dtype=np.complex128)
        masks[0, 0] = 1.0
        for j in range(1, delta):
            masks[2 * j - 1, 0] = 1.0
            masks[2 * j - 1, j] = 1.0
            masks[2 * j, 0] = 1.0
            masks[2 * j, j] = 1.0j
        return MaskFamily(masks=masks, delta=delta, kind=kind)

    raise ValueError(f"build_masks only constructs EXP_FOURIER or SPIKE_PAIR, got {kind}")


class BandedHermitian:
    """Hermitian d x d matrix supported on the circular band circdist(i, j) < delta,
    stored by circular diagonals.

    diags[k, i] holds entry (i, (i + k) % d) for k = 0 .. n_diags-1, where
    n_diags = min(delta, d // 2 + 1); diagonals beyond d // 2 are redundant by
    Hermitian symmetry and are not stored. diags[0] is real. When d is even and
    the half-ring diagonal k = d/2 is stored, its entries satisfy
    diags[d/2, i] = conj(diags[d/2, (i + d/2) % d]).

    Storage is O(d * delta); matvec is O(d * delta).
    """

    __slots__ = ("d", "delta", "diags")

    def __init__(self, d: int, delta: int, diags: np.ndarray, *, validate: bool = True):
        d = int(d)
        delta = int(delta)
        if not 1 <= delta <= d:
            raise ValueError(f"delta must satisfy 1 <= delta <= d, got delta={delta}, d={d}")
        kmax = min(delta - 1, d // 2)
        diags = np.array(diags, dtype=np.complex128, copy=True)
        if diags.shape != (kmax + 1, d):
            raise ValueError(f"diags must have shape {(kmax + 1, d)}, got {diags.shape}")
        if validate:
            if np.any(diags[0].imag != 0.0):
                raise ValueError("main diagonal must be real")
            if d % 2 == 0 and kmax == d // 2:
                half = np.roll(diags[kmax], -(d // 2))
                if not np.allclose(diags[kmax], half.conj(), rtol=0, atol=0):
                    raise ValueError("half-ring diagonal violates Hermitian symmetry")
        diags.flags.writeable = False
        self.d = d
        self.delta = delta
        self.diags = diags

    @property
    def n_diags(self) -> int:
        return self.diags.shape[0]

    @classmethod
    def zeros(cls, d: int, delta: int) -> "BandedHermitian":
        kmax = min(delta - 1, d // 2)
        return cls(d, delta, np.zeros((kmax + 1, d), dtype=np.complex128), validate=False)

    @classmethod
    def from_diagonals(cls, diags: np.ndarray, delta: int) -> "BandedHermitian":
        diags = np.asarray(diags)
        return cls(diags.shape[1], delta, diags)

    def dense(self) -> np.ndarray:
        """Assemble the full d x d matrix."""
        d = self.d
        X = np.zeros((d, d), dtype=np.complex128)
        rows = np.arange(d)
        for k in range(self.n_diags):
            cols = (rows + k) % d
            X[rows, cols] = self.diags[k]
            X[cols, rows] = self.diags[k].conj()
        return X

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """Compute X @ v in O(d * delta)."""
        v = np.asarray(v, dtype=np.complex128)
        out = self.diags[0].real.astype(np.complex128) * v
        half_ring = self.d % 2 == 0 and self.n_diags - 1 == self.d // 2
        for k in range(1, self.n_diags):
            Dk = self.diags[k]
            out += Dk * np.roll(v, -k)
            if not (half_ring and k == self.n_diags - 1):
                out += np.roll(Dk.conj() * v, k)
        return out

    def diagonal(self) -> np.ndarray:
        return self.diags[0].real.copy()

    def frobenius_norm(self) -> float:
        half_ring = self.d % 2 == 0 and self.n_diags - 1 == self.d // 2
        total = float(np.sum(self.diags[0].real ** 2))
        for k in range(1, self.n_diags):
            w = 1.0 if (half_ring and k == self.n_diags - 1) else 2.0
            total += w * float(np.sum(np.abs(self.diags[k]) ** 2))
        return float(np.sqrt(total))

    def copy(self) -> "BandedHermitian":
        return BandedHermitian(self.d, self.delta, self.diags, validate=False)

    def __add__(self, other: "BandedHermitian") -> "BandedHermitian":
        self._check_compatible(other)
        return BandedHermitian(self.d, self.delta, self.diags + other.diags, validate=False)

    def __sub__(self, other: "BandedHermitian") -> "BandedHermitian":
        self._check_compatible(other)
        return BandedHermitian(self.d, self.delta, self.diags - other.diags, validate=False)

    def scaled(self, c: float) -> "BandedHermitian":
        return BandedHermitian(self.d, self.delta, self.diags * float(c), validate=False)

    def _check_compatible(self, other: "BandedHermitian") -> None:
        if not isinstance(other, BandedHermitian):
            raise TypeError("expected BandedHermitian")
        if (self.d, self.delta) != (other.d, other.delta):
            raise ValueError("dimension/bandwidth mismatch")


class PhaseMatrix:
    """A banded Hermitian matrix whose in-band entries all have unit modulus
    (the entrywise signum of a banded lift). Wraps BandedHermitian storage."""

    __slots__ = ("matrix",)

    def __init__(self, matrix: BandedHermitian, *, validate: bool = True):
        if validate:
            if np.any(np.abs(np.abs(matrix.diags) - 1.0) > 1e-12):
                raise ValueError("phase matrix entries must have unit modulus")
        self.matrix = matrix

    @property
    def d(self) -> int:
        return self.matrix.d

    @property
    def delta(self) -> int:
        return self.matrix.delta

    def dense(self) -> np.ndarray:
        return self.matrix.dense()


def normalize_phases(X: BandedHermitian) -> PhaseMatrix:
    """Entrywise signum of the in-band entries (zero entries map to 1): the
    noisy phase-synchronization input of the recovery pipeline."""
    diags = csign(X.diags)
    diags[0] = diags[0].real  # signum of a real diagonal is +-1
    return PhaseMatrix(BandedHermitian(X.d, X.delta, diags, validate=False), validate=False)


def t_delta_project(A: np.ndarray, delta: int) -> BandedHermitian:
    """Orthogonal projection of a Hermitian matrix onto the circular band
    {(i, j): circdist(i, j) < delta}, returned in diagonal storage.

    Raises ValueError if A is not (numerically) Hermitian.
    """
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    d = A.shape[0]
    delta = int(delta)
    if not 1 <= delta <= d:
        raise ValueError(f"delta must satisfy 1 <= delta <= d, got delta={delta}, d={d}")
    scale = max(1.0, float(np.linalg.norm(A)))
    if np.linalg.norm(A - A.conj().T) > 1e-10 * scale:
        raise ValueError("input matrix is not Hermitian")

    kmax = min(delta - 1, d // 2)
    rows = np.arange(d)
    diags = np.empty((kmax + 1, d), dtype=np.complex128)
    for k in range(kmax + 1):
        # average the two Hermitian reads of the same entry so roundoff-level
        # asymmetry in the input cannot leak into the stored diagonals
        vals = 0.5 * (A[rows, (rows + k) % d] + A[(rows + k) % d, rows].conj())
        if k == 0:
            vals = vals.real.astype(np.complex128)
        diags[k] = vals
    return BandedHermitian(d, delta, diags, validate=False)
