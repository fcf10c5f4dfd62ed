"""Spectral structure of the band graph and perturbation diagnostics.

The banded projection of the all-ones rank-one lift, U = T_delta(1 1*), is
circulant; its eigenvalues are the Dirichlet-kernel values

    nu_j = 1 + 2 * sum_{k=1}^{delta-1} cos(2 pi j k / d),   j = 0..d-1,

with top eigenvalue nu_0 = 2*delta - 1. The band graph G carries weight matrix
W = U (self-loop weight 1 included), so every vertex has degree 2*delta - 1 and
vol(G) = d * (2*delta - 1). The frustration of a phase assignment y w.r.t. a
phase matrix measures how far the matrix is from the consistent rank-one model;
eigenvector synchronization is controlled by the spectral gap of U and a
Cheeger-type inequality with constant 44.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from blockpr.core import BandedHermitian, PhaseMatrix, Signal

__all__ = [
    "dirichlet_eigenvalues",
    "dirichlet_ratio",
    "band_adjacency",
    "band_laplacian",
    "SpectrumReport",
    "spectral_gap",
    "connection_laplacian",
    "frustration",
    "phase_aligned_distance",
    "error_db",
    "SmallSetReport",
    "rho_small_set",
    "relative_deviation",
    "SinThetaReport",
    "sin_theta_report",
    "Rank1Report",
    "rank1_report",
    "SyncRatioReport",
    "sync_ratio_report",
    "perturbation_oracles",
    "PerturbationOracles",
    "CHEEGER_CONSTANT",
    "RANK1_CONSTANT",
]

# constant in the Cheeger-type frustration inequality for the synchronization step
CHEEGER_CONSTANT = 44.0
# constant in the rank-one eigenvector perturbation bound
RANK1_CONSTANT = 1.0 + 2.0 * math.sqrt(2.0)


def dirichlet_eigenvalues(d: int, delta: int) -> np.ndarray:
    """Eigenvalues nu_j (j = 0..d-1, unsorted) of U = T_delta(1 1*).

    Requires d >= 2*delta - 1 so that the 2*delta - 1 circular diagonals of U
    are distinct; beyond that the band saturates and the formula over-counts.
    """
    d = int(d)
    delta = int(delta)
    if not 1 <= delta <= d:
        raise ValueError("need 1 <= delta <= d")
    if d < 2 * delta - 1:
        raise ValueError(f"need d >= 2*delta - 1, got d={d}, delta={delta}")
    j = np.arange(d)
    nus = np.ones(d)
    for k in range(1, delta):
        nus += 2.0 * np.cos(2.0 * np.pi * j * k / d)
    return nus


def dirichlet_ratio(d: int, delta: int, j: int) -> float:
    """Closed form nu_j = sin(theta_j (delta - 1/2)) / sin(theta_j / 2) with
    theta_j = 2 pi j / d, valid for j != 0 (mod d)."""
    theta = 2.0 * np.pi * (j % d) / d
    if theta == 0.0:
        return float(2 * delta - 1)
    return float(np.sin(theta * (delta - 0.5)) / np.sin(theta / 2.0))


def band_adjacency(d: int, delta: int) -> BandedHermitian:
    """U = T_delta(1 1*): weight matrix of the band graph (self-loops included)."""
    kmax = min(int(delta) - 1, int(d) // 2)
    return BandedHermitian(d, delta, np.ones((kmax + 1, d), dtype=np.complex128),
                           validate=False)


def band_laplacian(d: int, delta: int) -> np.ndarray:
    """Dense normalized Laplacian L = I - U / (2*delta - 1) of the band graph."""
    U = band_adjacency(d, delta).dense().real
    return np.eye(d) - U / (2 * delta - 1)


@dataclass(frozen=True)
class SpectrumReport:
    d: int
    delta: int
    nus: np.ndarray
    nu1: float               # top eigenvalue, = 2*delta - 1
    gap_signed: float        # nu1 - max_{j>=1} nu_j
    gap_magnitude: float     # nu1 - max_{j>=1} |nu_j|
    tau: float               # second-smallest Laplacian eigenvalue, gap_signed/(2 delta - 1)
    gap_lower_bound: float
    gap_upper_bound: float
    bounds_valid: bool       # the two bounds are guaranteed only for d >= 4 delta, delta >= 3

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "delta": self.delta,
            "nu1": self.nu1,
            "gap_signed": self.gap_signed,
            "gap_magnitude": self.gap_magnitude,
            "tau": self.tau,
            "gap_lower_bound": self.gap_lower_bound,
            "gap_upper_bound": self.gap_upper_bound,
            "bounds_valid": self.bounds_valid,
            "nus": self.nus.tolist(),
        }


def spectral_gap(d: int, delta: int) -> SpectrumReport:
    """Eigenvalue gap of U with the guaranteed two-sided estimates.

    gap_magnitude >= min(0.75 * (2 delta - 1), pi^2 delta^3 / (3 d^2)) and
    gap_signed   <= (1/6) (pi / d)^2 (2 delta - 1)^3, both valid once
    d >= 4 delta and delta >= 3.
    """
    nus = dirichlet_eigenvalues(d, delta)
    nu1 = float(nus[0])
    if d == 1:
        rest_max = rest_abs = nu1  # degenerate single-node ring
    else:
        rest_max = float(nus[1:].max())
        rest_abs = float(np.abs(nus[1:]).max())
    gap_signed = nu1 - rest_max
    gap_magnitude = nu1 - rest_abs
    tau = gap_signed / (2 * delta - 1)
    lower = min(0.75 * (2 * delta - 1), np.pi**2 * delta**3 / (3.0 * d**2))
    upper = (np.pi / d) ** 2 * (2 * delta - 1) ** 3 / 6.0
    return SpectrumReport(
        d=int(d), delta=int(delta), nus=nus, nu1=nu1,
        gap_signed=gap_signed, gap_magnitude=gap_magnitude, tau=tau,
        gap_lower_bound=float(lower), gap_upper_bound=float(upper),
        bounds_valid=bool(d >= 4 * delta and delta >= 3),
    )


def connection_laplacian(P: PhaseMatrix) -> np.ndarray:
    """Dense connection Laplacian L1 = I - X~ / (2*delta - 1) of a phase matrix
    over the band graph (diagnostic; PSD up to roundoff)."""
    X = P.matrix
    return np.eye(X.d) - X.dense() / (2 * X.delta - 1)


def frustration(P: PhaseMatrix, y: np.ndarray) -> float:
    """Frustration of the assignment y w.r.t. the phase matrix over the band
    graph: quadratic form y*(D - X~)y / (y* D y) with D = (2*delta - 1) I.

    Computed both as the quadratic form and as the edge sum
    (1/2) sum_{ordered in-band (i,j)} |y_i - X~_ij y_j|^2 / sum_i deg |y_i|^2;
    the two are asserted to agree to 1e-12.
    """
    X = P.matrix
    d, delta = X.d, X.delta
    y = np.asarray(y, dtype=np.complex128)
    if y.shape != (d,):
        raise ValueError(f"assignment must have shape ({d},)")
    ynorm2 = float(np.vdot(y, y).real)
    if ynorm2 == 0.0:
        raise ValueError("assignment must be nonzero")
    deg = 2 * delta - 1
    denom = deg * ynorm2

    quad = (deg * ynorm2 - np.vdot(y, X.matvec(y)).real) / denom

    half_ring = d % 2 == 0 and X.n_diags - 1 == d // 2
    total = 0.5 * float(np.sum(np.abs(y - X.diags[0].real * y) ** 2))
    for k in range(1, X.n_diags):
        terms = np.abs(y - X.diags[k] * np.roll(y, -k)) ** 2
        w = 0.5 if (half_ring and k == X.n_diags - 1) else 1.0
        total += w * float(np.sum(terms))
    edge = total / denom

    if abs(quad - edge) > 1e-12 * max(1.0, abs(quad)):
        raise AssertionError(f"frustration forms disagree: {quad} vs {edge}")
    return float(quad)


def phase_aligned_distance(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """min over theta of ||a - exp(i theta) b||_2 and the minimizing theta."""
    a = np.asarray(a, dtype=np.complex128).ravel()
    b = np.asarray(b, dtype=np.complex128).ravel()
    if a.shape != b.shape:
        raise ValueError("length mismatch")
    inner = np.vdot(b, a)  # sum a conj(b)
    theta = float(np.angle(inner))
    # evaluate the aligned difference entrywise: the closed form
    # ||a||^2 + ||b||^2 - 2|inner| cancels catastrophically for close vectors
    dist = float(np.linalg.norm(a - np.exp(1j * theta) * b))
    return dist, theta


ERROR_DB_FLOOR = -300.0


def error_db(x: Signal | np.ndarray, truth: Signal | np.ndarray) -> float:
    """Phase-aligned relative squared error on a decibel scale:
    10 log10( min_theta ||x - e^{i theta} x0||^2 / ||x0||^2 ), floored at -300 dB."""
    xe = x.entries if isinstance(x, Signal) else np.asarray(x, dtype=np.complex128)
    te = truth.entries if isinstance(truth, Signal) else np.asarray(truth, dtype=np.complex128)
    tnorm = float(np.linalg.norm(te))
    if tnorm == 0.0:
        raise ValueError("truth signal must be nonzero")
    dist, _ = phase_aligned_distance(xe, te)
    if dist == 0.0:
        return ERROR_DB_FLOOR
    db = 20.0 * math.log10(dist / tnorm)
    return max(db, ERROR_DB_FLOOR)


@dataclass(frozen=True)
class SmallSetReport:
    indices: np.ndarray    # positions with |x0| below the threshold
    threshold: float       # (delta * ||n|| / rho)^(1/4)
    rho_star: float        # rho at which the set empties, kappa delta ||n|| / min|x0|^4


def rho_small_set(x0: Signal, rho: float, delta: int, noise_norm: float,
                  *, kappa: float = 1.0) -> SmallSetReport:
    """Indices where the signal magnitude falls below (delta ||n||_2 / rho)^(1/4);
    entries in this set have unreliable recovered phase. rho_star is the weight at
    which the set is guaranteed empty (kappa defaults to 1; pass the solver's
    condition number for the conservative variant)."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    if noise_norm < 0:
        raise ValueError("noise norm must be nonnegative")
    mags = x0.magnitudes
    threshold = (delta * noise_norm / rho) ** 0.25
    indices = np.flatnonzero(mags < threshold)
    mmin = float(mags.min())
    rho_star = math.inf if mmin == 0.0 else kappa * delta * noise_norm / mmin**4
    return SmallSetReport(indices=indices, threshold=float(threshold), rho_star=float(rho_star))


# ---------------------------------------------------------------------------
# perturbation oracles


def _as_dense(A) -> np.ndarray:
    if isinstance(A, BandedHermitian):
        return A.dense()
    return np.asarray(A, dtype=np.complex128)


def relative_deviation(A0, A) -> float:
    """eta = ||A - A0||_F / ||A0||_F for dense arrays or banded matrices."""
    if isinstance(A0, BandedHermitian) and isinstance(A, BandedHermitian):
        return (A - A0).frobenius_norm() / A0.frobenius_norm()
    D0, D = _as_dense(A0), _as_dense(A)
    return float(np.linalg.norm(D - D0) / np.linalg.norm(D0))


@dataclass(frozen=True)
class SinThetaReport:
    lhs: float   # 1 - |<x1, v1>|^2
    rhs: float   # 4 eta^2 ||A0||_F^2 / (nu1 - nu2)^2
    eta: float
    gap: float


def sin_theta_report(A0, A) -> SinThetaReport:
    """Top-eigenvector misalignment against the guaranteed sin-theta bound."""
    D0, D = _as_dense(A0), _as_dense(A)
    w0, V0 = np.linalg.eigh(D0)
    w1, V1 = np.linalg.eigh(D)
    x1 = V0[:, -1]
    v1 = V1[:, -1]
    gap = float(w0[-1] - w0[-2])
    eta = float(np.linalg.norm(D - D0) / np.linalg.norm(D0))
    lhs = 1.0 - abs(np.vdot(x1, v1)) ** 2
    rhs = 4.0 * eta**2 * float(np.linalg.norm(D0)) ** 2 / gap**2
    return SinThetaReport(lhs=float(lhs), rhs=float(rhs), eta=eta, gap=gap)


@dataclass(frozen=True)
class Rank1Report:
    lhs: float    # min_theta || e^{i theta} x0 - sqrt|lam1| v1 ||
    rhs: float    # (1 + 2 sqrt 2) eta ||x0||
    eta: float
    lam1: float


def rank1_report(x0: Signal, A) -> Rank1Report:
    """Distance from the scaled top eigenvector of A to the generating vector of
    the rank-one reference x0 x0*, against the (1 + 2 sqrt 2) eta ||x0|| bound."""
    D = _as_dense(A)
    x = x0.entries
    X0 = np.outer(x, x.conj())
    eta = float(np.linalg.norm(D - X0) / np.linalg.norm(X0))
    w, V = np.linalg.eigh(D)
    top = int(np.argmax(np.abs(w)))
    lam1 = float(w[top])
    v1 = V[:, top]
    lhs, _ = phase_aligned_distance(math.sqrt(abs(lam1)) * v1, x)
    rhs = RANK1_CONSTANT * eta * float(np.linalg.norm(x))
    return Rank1Report(lhs=float(lhs), rhs=float(rhs), eta=eta, lam1=lam1)


@dataclass(frozen=True)
class SyncRatioReport:
    eta: float            # ||X~ - X~0||_F / ||X~0||_F
    measured: float       # min_theta || x~0 - e^{i theta} x~ ||
    ratio_main: float     # measured / (eta d^{5/2} / delta^2)
    ratio_weak: float     # measured / (eta d^3 / delta^{5/2})


def sync_ratio_report(P0: PhaseMatrix, P: PhaseMatrix,
                      xt0: np.ndarray, xt: np.ndarray) -> SyncRatioReport:
    """Monitored (not asserted) constants for the synchronization error against
    the d^{5/2}/delta^2 and d^3/delta^{5/2} scalings."""
    X0, X = P0.matrix, P.matrix
    d, delta = X0.d, X0.delta
    eta = relative_deviation(X0, X)
    measured, _ = phase_aligned_distance(np.asarray(xt0), np.asarray(xt))
    if eta == 0.0:
        return SyncRatioReport(eta=0.0, measured=measured, ratio_main=0.0, ratio_weak=0.0)
    return SyncRatioReport(
        eta=eta,
        measured=measured,
        ratio_main=measured / (eta * d**2.5 / delta**2),
        ratio_weak=measured / (eta * d**3 / delta**2.5),
    )


@dataclass(frozen=True)
class PerturbationOracles:
    eta: float
    sin_theta: SinThetaReport
    rank1: Rank1Report | None

    def to_dict(self) -> dict:
        out = {
            "eta": self.eta,
            "sin_theta_lhs": self.sin_theta.lhs,
            "sin_theta_rhs": self.sin_theta.rhs,
            "gap": self.sin_theta.gap,
        }
        if self.rank1 is not None:
            out.update({"rank1_lhs": self.rank1.lhs, "rank1_rhs": self.rank1.rhs,
                        "lam1": self.rank1.lam1})
        return out


def perturbation_oracles(A0, A, x0: Signal | None = None) -> PerturbationOracles:
    """Bundle of eigenvector perturbation diagnostics for a reference matrix A0
    and its perturbed observation A."""
    rep = sin_theta_report(A0, A)
    r1 = rank1_report(x0, A) if x0 is not None else None
    return PerturbationOracles(eta=rep.eta, sin_theta=rep, rank1=r1)
