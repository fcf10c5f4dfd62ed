import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blockpr.core import MaskFamily, MaskKind, Signal, build_masks, circdist, t_delta_project
from blockpr.lifting import (
    MeasurementGrid,
    SolverBuildError,
    build_solver,
    forward_apply_lifted,
    forward_measure,
    invert,
    lifted_outer,
)


def random_signal(d, seed):
    rng = np.random.Generator(np.random.Philox(key=seed))
    return Signal(rng.normal(size=d) + 1j * rng.normal(size=d))


def random_masks(d, delta, K, seed):
    rng = np.random.Generator(np.random.Philox(key=seed))
    m = np.zeros((K, d), dtype=complex)
    m[:, :delta] = rng.normal(size=(K, delta)) + 1j * rng.normal(size=(K, delta))
    return MaskFamily(masks=m, delta=delta)


# ---------------------------------------------------------------------------
# independent oracles (definition-level, no FFTs, no diagonal storage)


def oracle_measure(x, masks):
    """Brute-force y[l, j] = |sum_n x[(n+l) % d] conj(m_j[n])|^2."""
    d = x.size
    K = masks.shape[0]
    y = np.zeros((d, K))
    for ell in range(d):
        for j in range(K):
            acc = 0.0 + 0.0j
            for n in range(d):
                acc += x[(n + ell) % d] * np.conj(masks[j, n])
            y[ell, j] = abs(acc) ** 2
    return y


def band_pairs(d, delta):
    return [(i, j) for i in range(d) for j in range(d) if circdist(i, j, d) < delta]


def shift_matrix(d, ell):
    # rows: (S_ell)[p, q] = 1 iff q = (p + ell) % d
    return np.roll(np.eye(d), ell, axis=1)


def oracle_dense_operator(masks, delta):
    """Dense matrix of the lifted map w.r.t. the matrix-unit basis of the band."""
    K, d = masks.shape
    pairs = band_pairs(d, delta)
    A = np.zeros((d * K, len(pairs)), dtype=complex)
    for col, (i, j) in enumerate(pairs):
        E = np.zeros((d, d), dtype=complex)
        E[i, j] = 1.0
        for ell in range(d):
            S = shift_matrix(d, ell)
            W = S @ E @ S.conj().T
            for jj in range(K):
                m = masks[jj]
                A[ell * K + jj, col] = m.conj() @ W @ m
    return A, pairs


def oracle_dense_solve(masks, delta, y):
    """Least-squares banded Hermitian solve via the dense operator + lstsq."""
    K, d = masks.shape
    A, pairs = oracle_dense_operator(masks, delta)
    coef, *_ = np.linalg.lstsq(A, y.reshape(d * K), rcond=None)
    X = np.zeros((d, d), dtype=complex)
    for c, (i, j) in enumerate(pairs):
        X[i, j] = coef[c]
    return 0.5 * (X + X.conj().T)


def oracle_pair_real_matrix(d, delta):
    """Dense real system matrix of the closed-form parametrization
    (z = [diag; Re offdiags; Im offdiags], rows ordered by mask then shift)."""
    n = d * (2 * delta - 1)
    C = np.zeros((n, n))
    I = np.eye(d)
    C[:d, :d] = I
    for k in range(1, delta):
        P = np.roll(I, k, axis=1)  # (P v)[l] = v[(l+k) % d]
        r1 = d * (2 * k - 1)
        r2 = d * 2 * k
        C[r1:r1 + d, :d] = I + P
        C[r1:r1 + d, d * k:d * (k + 1)] = 2 * I
        C[r2:r2 + d, :d] = I + P
        C[r2:r2 + d, d * (delta - 1 + k):d * (delta + k)] = -2 * I
    return C


# ---------------------------------------------------------------------------
# forward map


@pytest.mark.parametrize("kind", [MaskKind.EXP_FOURIER, MaskKind.SPIKE_PAIR])
@pytest.mark.parametrize("d,delta", [(8, 3), (11, 4), (16, 2)])
def test_forward_matches_bruteforce(kind, d, delta):
    fam = build_masks(kind, d=d, delta=delta)
    x = random_signal(d, seed=d * 7 + delta)
    grid = forward_measure(x, fam)
    expect = oracle_measure(x.entries, fam.masks)
    assert grid.y.shape == (d, 2 * delta - 1)
    assert np.all(grid.y >= 0)
    assert np.allclose(grid.y, expect, rtol=1e-10, atol=1e-10 * expect.max())


def test_forward_unit_impulse_single_mask():
    # x = e_0, one mask = e_0: only the ell = 0 shift sees the impulse
    fam = build_masks(MaskKind.SPIKE_PAIR, d=6, delta=1)
    grid = forward_measure(Signal(np.eye(6)[0]), fam)
    expect = np.zeros((6, 1))
    expect[0, 0] = 1.0
    assert np.allclose(grid.y, expect, atol=1e-14)


def test_lifted_outer_matches_dense_projection():
    x = random_signal(12, seed=3)
    X = lifted_outer(x, 4)
    dense = t_delta_project(np.outer(x.entries, x.entries.conj()), 4).dense()
    assert np.allclose(X.dense(), dense, atol=1e-12)


@given(d=st.integers(min_value=5, max_value=20), seed=st.integers(min_value=0, max_value=2**31))
@settings(max_examples=25, deadline=None)
def test_forward_apply_lifted_is_linear(d, seed):
    delta = min(3, (d + 1) // 2)
    fam = build_masks(MaskKind.EXP_FOURIER, d=d, delta=delta)
    X1 = lifted_outer(random_signal(d, seed), delta)
    X2 = lifted_outer(random_signal(d, seed + 1), delta)
    lhs = forward_apply_lifted(X1 + X2.scaled(2.0), fam)
    rhs = forward_apply_lifted(X1, fam) + 2.0 * forward_apply_lifted(X2, fam)
    assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-9)


def test_grid_validation():
    with pytest.raises(ValueError):
        MeasurementGrid(y=np.zeros((0, 3)), delta=1)
    with pytest.raises(ValueError):
        MeasurementGrid(y=np.full((4, 3), np.nan), delta=2)


# ---------------------------------------------------------------------------
# solver: noiseless round trips


@pytest.mark.parametrize("kind,strategy", [
    (MaskKind.EXP_FOURIER, "block_fft"),
    (MaskKind.SPIKE_PAIR, "block_fft"),
    (MaskKind.SPIKE_PAIR, "pair_closed"),
])
@pytest.mark.parametrize("d,delta", [(8, 3), (16, 5), (13, 2)])
def test_noiseless_roundtrip(kind, strategy, d, delta):
    fam = build_masks(kind, d=d, delta=delta)
    solver = build_solver(fam, strategy=strategy)
    x = random_signal(d, seed=100 * d + delta)
    grid = forward_measure(x, fam)
    X, info = invert(solver, grid)
    expect = lifted_outer(x, delta)
    scale = expect.frobenius_norm()
    assert np.allclose(X.dense(), expect.dense(), atol=1e-9 * scale)
    assert info.residual <= 1e-8 * max(1.0, float(np.linalg.norm(grid.y)))
    dense = X.dense()
    assert np.allclose(dense, dense.conj().T, atol=1e-12)


def test_auto_strategy_selection():
    pair = build_masks(MaskKind.SPIKE_PAIR, d=10, delta=3)
    expf = build_masks(MaskKind.EXP_FOURIER, d=10, delta=3)
    assert build_solver(pair).strategy == "pair_closed"
    assert build_solver(expf).strategy == "block_fft"
    with pytest.raises(SolverBuildError):
        build_solver(expf, strategy="pair_closed")


# ---------------------------------------------------------------------------
# solver vs dense oracles


@pytest.mark.parametrize("d,delta", [(8, 2), (12, 3), (16, 5), (32, 4)])
def test_solve_matches_dense_oracle_noisy(d, delta):
    rng = np.random.Generator(np.random.Philox(key=d + delta))
    for kind in (MaskKind.EXP_FOURIER, MaskKind.SPIKE_PAIR):
        fam = build_masks(kind, d=d, delta=delta)
        x = random_signal(d, seed=delta * 17 + d)
        y = forward_measure(x, fam).y + 0.01 * rng.normal(size=(d, fam.K))
        grid = MeasurementGrid(y=y, delta=delta)
        solver = build_solver(fam)
        X, _ = invert(solver, grid)
        expect = oracle_dense_solve(fam.masks, delta, y)
        assert np.allclose(X.dense(), expect, atol=1e-9 * max(1.0, np.linalg.norm(expect)))


def test_two_strategies_agree_on_pair_masks():
    d, delta = 24, 4
    fam = build_masks(MaskKind.SPIKE_PAIR, d=d, delta=delta)
    rng = np.random.Generator(np.random.Philox(key=9))
    x = random_signal(d, seed=42)
    y = forward_measure(x, fam).y + 0.05 * rng.normal(size=(d, fam.K))
    grid = MeasurementGrid(y=y, delta=delta)
    X1, _ = invert(build_solver(fam, strategy="block_fft"), grid)
    X2, _ = invert(build_solver(fam, strategy="pair_closed"), grid)
    scale = max(1.0, X1.frobenius_norm())
    assert np.allclose(X1.dense(), X2.dense(), atol=1e-9 * scale)


@pytest.mark.parametrize("d,delta", [(6, 2), (8, 3), (10, 2)])
def test_kappa_matches_dense_svd_block_fft(d, delta):
    for kind in (MaskKind.EXP_FOURIER, MaskKind.SPIKE_PAIR):
        fam = build_masks(kind, d=d, delta=delta)
        solver = build_solver(fam, strategy="block_fft")
        A, _ = oracle_dense_operator(fam.masks, delta)
        sv = np.linalg.svd(A, compute_uv=False)
        assert solver.kappa == pytest.approx(sv[0] / sv[-1], rel=1e-8)
        assert solver.sigma_min == pytest.approx(sv[-1], rel=1e-8)


@pytest.mark.parametrize("d,delta", [(6, 2), (9, 3), (14, 4), (8, 2)])
def test_kappa_matches_dense_svd_pair_closed(d, delta):
    fam = build_masks(MaskKind.SPIKE_PAIR, d=d, delta=delta)
    solver = build_solver(fam, strategy="pair_closed")
    C = oracle_pair_real_matrix(d, delta)
    assert C.shape == (d * (2 * delta - 1),) * 2
    sv = np.linalg.svd(C, compute_uv=False)
    assert solver.kappa == pytest.approx(sv[0] / sv[-1], rel=1e-8)
    assert solver.sigma_min == pytest.approx(sv[-1], rel=1e-8)


def test_pair_real_matrix_oracle_is_consistent():
    # the dense real parametrization reproduces the measurement grid ordering
    d, delta = 7, 3
    fam = build_masks(MaskKind.SPIKE_PAIR, d=d, delta=delta)
    x = random_signal(d, seed=11)
    X = lifted_outer(x, delta)
    z = np.concatenate([X.diags[0].real]
                       + [X.diags[k].real for k in range(1, delta)]
                       + [X.diags[k].imag for k in range(1, delta)])
    y = oracle_pair_real_matrix(d, delta) @ z
    grid = forward_measure(x, fam)
    # rows ordered mask-major: [y[:,0], y[:,1], y[:,2], ...]
    expect = np.concatenate([grid.y[:, j] for j in range(fam.K)])
    assert np.allclose(y, expect, atol=1e-10 * max(1.0, expect.max()))


# ---------------------------------------------------------------------------
# failure modes and noise control


def test_too_few_masks_rejected_with_frequency():
    d, delta = 12, 3
    fam = random_masks(d, delta, K=2 * delta - 2, seed=5)
    with pytest.raises(SolverBuildError, match="frequency"):
        build_solver(fam)


def test_degenerate_masks_rejected():
    d, delta = 10, 2
    m = np.zeros((3, d), dtype=complex)
    m[:, 0] = 1.0  # three copies of e_0: cannot see off-diagonals
    fam = MaskFamily(masks=m, delta=delta)
    with pytest.raises(SolverBuildError, match="frequency"):
        build_solver(fam)


def test_random_masks_generically_invertible():
    d, delta = 14, 3
    fam = random_masks(d, delta, K=2 * delta - 1, seed=1)
    solver = build_solver(fam)
    x = random_signal(d, seed=2)
    X, _ = invert(solver, forward_measure(x, fam))
    assert np.allclose(X.dense(), lifted_outer(x, delta).dense(),
                       atol=1e-8 * max(1.0, x.norm() ** 2))


def test_noise_error_bounded_by_kappa():
    # || X - X0 ||_F <= kappa * ||n||_2 over 100 random noise draws
    d, delta = 16, 3
    x = random_signal(d, seed=123)
    X0 = lifted_outer(x, delta)
    for kind in (MaskKind.EXP_FOURIER, MaskKind.SPIKE_PAIR):
        fam = build_masks(kind, d=d, delta=delta)
        solver = build_solver(fam)
        clean = forward_measure(x, fam)
        rng = np.random.Generator(np.random.Philox(key=77))
        for _ in range(100):
            n = 0.1 * rng.normal(size=clean.y.shape)
            grid = MeasurementGrid(y=clean.y + n, delta=delta)
            X, _ = invert(solver, grid)
            err = (X - X0).frobenius_norm()
            assert err <= solver.kappa * np.linalg.norm(n) + 1e-12


def test_solver_report_fields():
    fam = build_masks(MaskKind.EXP_FOURIER, d=16, delta=3)
    rep = build_solver(fam).report()
    assert rep["strategy"] == "block_fft"
    assert rep["kappa"] >= 1.0
    assert rep["sigma_min"] > 0
    assert rep["build_time_ms"] >= 0
    assert rep["n_masks"] == 5


def test_build_requires_wide_enough_ring():
    fam = build_masks(MaskKind.SPIKE_PAIR, d=4, delta=3)  # d < 2*delta - 1
    with pytest.raises(SolverBuildError):
        build_solver(fam)
