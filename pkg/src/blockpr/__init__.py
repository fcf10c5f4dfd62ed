"""Phase retrieval from local correlation measurements.

Pipeline: deterministic well-conditioned masks -> banded lifted linear inversion
-> eigenvector angular synchronization -> magnitude estimation, plus spectral
diagnostics, Fourier-domain measurement models (ptychography / STFT), a
classical alternating-projection baseline, and a benchmark harness with a CLI.
"""

from blockpr.core import (
    BandedHermitian,
    MaskFamily,
    MaskKind,
    PhaseMatrix,
    Signal,
    build_masks,
    circdist,
    circular_shift,
    csign,
    normalize_phases,
    t_delta_project,
)
from blockpr.lifting import (
    MeasurementGrid,
    SolveInfo,
    SolverBuildError,
    build_solver,
    forward_apply_lifted,
    forward_measure,
    invert,
    lifted_outer,
)
from blockpr.spectral import (
    SpectrumReport,
    dirichlet_eigenvalues,
    error_db,
    frustration,
    phase_aligned_distance,
    perturbation_oracles,
    spectral_gap,
)
from blockpr.sync import (
    EigenConfig,
    EigenResult,
    MagnitudeMethod,
    RecoverConfig,
    RecoveryReport,
    estimate_magnitudes,
    recover,
    top_phase_eigenvector,
)

__all__ = [
    "BandedHermitian",
    "MaskFamily",
    "MaskKind",
    "PhaseMatrix",
    "Signal",
    "build_masks",
    "circdist",
    "circular_shift",
    "csign",
    "normalize_phases",
    "t_delta_project",
    "MeasurementGrid",
    "SolveInfo",
    "SolverBuildError",
    "build_solver",
    "forward_apply_lifted",
    "forward_measure",
    "invert",
    "lifted_outer",
    "SpectrumReport",
    "dirichlet_eigenvalues",
    "error_db",
    "frustration",
    "phase_aligned_distance",
    "perturbation_oracles",
    "spectral_gap",
    "EigenConfig",
    "EigenResult",
    "MagnitudeMethod",
    "RecoverConfig",
    "RecoveryReport",
    "estimate_magnitudes",
    "recover",
    "top_phase_eigenvector",
]

__version__ = "0.1.0"
