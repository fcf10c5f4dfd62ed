import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blockpr.core import (
    BandedHermitian,
    MaskKind,
    Signal,
    build_masks,
    circdist,
    circular_shift,
    csign,
    t_delta_project,
)


def random_hermitian(d, seed):
    rng = np.random.Generator(np.random.Philox(key=seed))
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (A + A.conj().T)


def random_signal(d, seed):
    rng = np.random.Generator(np.random.Philox(key=seed))
    return Signal(rng.normal(size=d) + 1j * rng.normal(size=d))


# ---------------------------------------------------------------------------
# circdist / csign


def test_circdist_basic():
    assert circdist(0, 1, 8) == 1
    assert circdist(0, 7, 8) == 1
    assert circdist(2, 6, 8) == 4
    assert circdist(5, 5, 8) == 0


@given(
    i=st.integers(min_value=0, max_value=63),
    j=st.integers(min_value=0, max_value=63),
    d=st.integers(min_value=1, max_value=64),
)
def test_circdist_symmetry_and_range(i, j, d):
    i, j = i % d, j % d
    v = circdist(i, j, d)
    assert v == circdist(j, i, d)
    assert 0 <= v <= d // 2
    assert circdist(i, i, d) == 0


def test_circdist_array():
    i = np.arange(8)
    out = circdist(i, 0, 8)
    assert out.tolist() == [0, 1, 2, 3, 4, 3, 2, 1]


def test_csign_zero_maps_to_one():
    assert csign(0.0) == 1.0 + 0.0j
    out = csign(np.array([0.0, -2.0, 3.0j]))
    assert out[0] == 1.0
    assert out[1] == -1.0
    assert out[2] == 1.0j


@given(st.complex_numbers(min_magnitude=1e-6, max_magnitude=1e6, allow_nan=False, allow_infinity=False))
def test_csign_unit_modulus(z):
    assert abs(abs(csign(z)) - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# Signal / circular_shift


def test_signal_validation():
    with pytest.raises(ValueError):
        Signal(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        Signal(np.array([np.nan, 1.0]))
    with pytest.raises(ValueError):
        Signal(np.array([]))


def test_signal_is_immutable():
    x = Signal(np.ones(4))
    with pytest.raises(ValueError):
        x.entries[0] = 2.0


def test_shift_of_basis_vector_wraps():
    # shifting e_0 by 1 in d=4 lands on e_3
    e0 = Signal(np.array([1.0, 0.0, 0.0, 0.0]))
    out = circular_shift(e0, 1)
    assert np.array_equal(out.entries, np.array([0, 0, 0, 1], dtype=complex))


@given(
    d=st.integers(min_value=1, max_value=32),
    a=st.integers(min_value=-70, max_value=70),
    b=st.integers(min_value=-70, max_value=70),
    seed=st.integers(min_value=0, max_value=2**31),
)
@settings(max_examples=60, deadline=None)
def test_shift_group_law(d, a, b, seed):
    x = random_signal(d, seed)
    lhs = circular_shift(circular_shift(x, a), b)
    rhs = circular_shift(x, (a + b) % d)
    assert np.array_equal(lhs.entries, rhs.entries)
    ident = circular_shift(x, 0)
    assert np.array_equal(ident.entries, x.entries)


# ---------------------------------------------------------------------------
# mask families


def test_spike_pair_masks_smallest_case():
    fam = build_masks(MaskKind.SPIKE_PAIR, d=4, delta=2)
    assert fam.K == 3
    expect = np.zeros((3, 4), dtype=complex)
    expect[0, 0] = 1
    expect[1, 0] = 1
    expect[1, 1] = 1
    expect[2, 0] = 1
    expect[2, 1] = 1j
    assert np.array_equal(fam.masks, expect)


def test_exp_fourier_single_mask_delta1():
    fam = build_masks(MaskKind.EXP_FOURIER, d=8, delta=1)
    assert fam.K == 1
    assert fam.decay == 4.0
    nz = fam.masks[0][fam.masks[0] != 0]
    assert nz.size == 1
    assert nz[0] == pytest.approx(np.exp(-0.25))


def test_exp_fourier_decay_default():
    fam = build_masks(MaskKind.EXP_FOURIER, d=32, delta=11)
    assert fam.decay == 5.0  # max(4, (11-1)/2)
    fam2 = build_masks(MaskKind.EXP_FOURIER, d=32, delta=6)
    assert fam2.decay == 4.0


def test_mask_support_and_count():
    for kind in (MaskKind.EXP_FOURIER, MaskKind.SPIKE_PAIR):
        for d, delta in [(8, 3), (16, 5), (9, 4)]:
            fam = build_masks(kind, d=d, delta=delta)
            assert fam.K == 2 * delta - 1
            assert np.all(fam.masks[:, delta:] == 0)
            # every mask touches coordinate 0
            assert np.all(fam.masks[:, 0] != 0)


def test_mask_family_rejects_bad_support():
    m = np.zeros((1, 6), dtype=complex)
    m[0, 5] = 1.0
    with pytest.raises(ValueError):
        MaskFamilyHack = __import__("blockpr.core", fromlist=["MaskFamily"]).MaskFamily
        MaskFamilyHack(masks=m, delta=2)


def test_spike_pair_outer_products_span_band_space():
    # the 30 shifted outer products for d=6, delta=3 form a basis of the
    # 30-dimensional complex band space: Gram matrix has full rank 30
    d, delta = 6, 3
    fam = build_masks(MaskKind.SPIKE_PAIR, d=d, delta=delta)
    rows = []
    band = np.zeros((d, d), dtype=bool)
    for i in range(d):
        for j in range(d):
            band[i, j] = circdist(i, j, d) < delta
    for ell in range(d):
        for m in fam.masks:
            shifted = np.roll(m, ell)  # (S_ell^* m)[n] = m[(n - ell) % d]
            outer = np.outer(shifted, shifted.conj())
            rows.append(outer[band])
    G = np.array(rows)
    assert G.shape == (30, 30)
    assert np.linalg.matrix_rank(G) == 30


def test_build_masks_validates_delta():
    with pytest.raises(ValueError):
        build_masks(MaskKind.SPIKE_PAIR, d=4, delta=0)
    with pytest.raises(ValueError):
        build_masks(MaskKind.SPIKE_PAIR, d=4, delta=5)


# ---------------------------------------------------------------------------
# BandedHermitian / t_delta_project


def test_t_delta_ones_matrix_row_sums():
    # projecting the all-ones matrix keeps 2*delta-1 ones per row
    d, delta = 8, 3
    U = t_delta_project(np.ones((d, d)), delta)
    dense = U.dense()
    assert np.array_equal(dense.sum(axis=1), np.full(d, 2 * delta - 1, dtype=complex))
    assert np.array_equal(dense, dense.conj().T)


def test_t_delta_full_band_is_identity_map():
    A = random_hermitian(7, seed=5)
    for delta in (4, 5, 6, 7):  # band covers every circdist <= 3
        out = t_delta_project(A, delta).dense()
        assert np.allclose(out, A, atol=1e-14)


def test_t_delta_zeroes_out_of_band():
    d, delta = 10, 3
    A = random_hermitian(d, seed=1)
    out = t_delta_project(A, delta).dense()
    for i in range(d):
        for j in range(d):
            if circdist(i, j, d) < delta:
                assert out[i, j] == pytest.approx(A[i, j], abs=1e-14)
            else:
                assert out[i, j] == 0


def test_t_delta_rejects_non_hermitian():
    A = np.arange(16, dtype=float).reshape(4, 4)
    with pytest.raises(ValueError):
        t_delta_project(A, 2)


@given(
    d=st.integers(min_value=2, max_value=24),
    delta=st.integers(min_value=1, max_value=24),
    seed=st.integers(min_value=0, max_value=2**31),
)
@settings(max_examples=60, deadline=None)
def test_t_delta_idempotent_and_contractive(d, delta, seed):
    delta = min(delta, d)
    A = random_hermitian(d, seed)
    P = t_delta_project(A, delta)
    P2 = t_delta_project(P.dense(), delta)
    assert np.allclose(P.dense(), P2.dense(), atol=1e-13)
    # orthogonal projection: never increases the Frobenius norm
    assert P.frobenius_norm() <= np.linalg.norm(A) + 1e-12


def test_banded_storage_roundtrip_and_matvec():
    rng = np.random.Generator(np.random.Philox(key=7))
    for d, delta in [(8, 3), (9, 4), (12, 6), (6, 3), (5, 5), (8, 8), (2, 1), (4, 4)]:
        A = random_hermitian(d, seed=d * 31 + delta)
        X = t_delta_project(A, delta)
        dense = X.dense()
        assert np.allclose(dense, dense.conj().T, atol=1e-14)
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        assert np.allclose(X.matvec(v), dense @ v, atol=1e-11)
        assert X.frobenius_norm() == pytest.approx(np.linalg.norm(dense), rel=1e-12)
        # dense -> storage -> dense round trip
        X2 = t_delta_project(dense, delta)
        assert np.allclose(X2.dense(), dense, atol=1e-14)


def test_banded_rejects_complex_diagonal():
    diags = np.zeros((2, 6), dtype=complex)
    diags[0, 0] = 1j
    with pytest.raises(ValueError):
        BandedHermitian(6, 2, diags)


def test_banded_arithmetic():
    A = t_delta_project(random_hermitian(8, 1), 3)
    B = t_delta_project(random_hermitian(8, 2), 3)
    assert np.allclose((A + B).dense(), A.dense() + B.dense())
    assert np.allclose((A - B).dense(), A.dense() - B.dense())
    assert np.allclose(A.scaled(2.5).dense(), 2.5 * A.dense())
    assert np.allclose(A.diagonal(), np.diag(A.dense()).real)
