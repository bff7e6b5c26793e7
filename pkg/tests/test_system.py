import numpy as np
import pytest

from wavext.cascade import scaling_at_dyadic
from wavext.domain import disk, interval, masked_grid, whole_box
from wavext.dwt import TransformPlan, dense_matrix
from wavext.filters import filter_bank
from wavext.system import (SystemError_, assemble_scaling, dense_A,
                           frame_operator_A, frame_operator_Zstar, rhs)


def _setup(mask, fam, N, q):
    bank = filter_bank(fam)
    grid = masked_grid(mask, N, q)
    scaling = assemble_scaling(bank, grid)
    A = frame_operator_A(scaling, bank, grid)
    Zs = frame_operator_Zstar(scaling, bank, grid)
    return bank, grid, scaling, A, Zs


def test_haar_box_small():
    bank, grid, scaling, A, Zs = _setup(whole_box(1), "db1", 4, 2)
    Ah = scaling.A_hat.toarray()
    assert all((np.abs(Ah[:, j]) > 0).sum() == 2 for j in range(4))
    assert np.abs(scaling.Z_hat.T @ scaling.A_hat - np.eye(4)).max() < 1e-12


def test_scaling_nnz_bound():
    bank, grid, scaling, *_ = _setup(interval(0.0, 0.5), "cdf22", 64, 2)
    assert scaling.A_hat.nnz <= grid.M * 4


def test_A_hat_entries_match_cascade():
    """Entries are sqrt(N) * phi(N t - l) evaluated via an independent
    cascade run at the matching dyadic resolution."""
    bank, grid, scaling, *_ = _setup(whole_box(1), "db2", 16, 4)
    s = scaling_at_dyadic(bank.h, 6)   # phi at resolution 2^-6 = 1/(Nq)
    Ah = scaling.A_hat.toarray()
    for m in (0, 7, 33):
        for l in (0, 3, 15):
            arg = m - l * 4          # (m / 64) * 16 - l in units of 1/4
            pos = arg * 2 ** 4 - s.start_index   # phi(arg/4) at level 6
            val = s.values[pos] if 0 <= pos < s.values.size else 0.0
            # wrap-around images
            for shift in (-16, 16):
                p2 = (arg + shift * 4) * 2 ** 4 - s.start_index
                if 0 <= p2 < s.values.size:
                    val += s.values[p2]
            assert abs(Ah[m, l] - 4.0 * val) < 1e-12


def test_box_Zstar_A_identity_1d():
    for fam in ("db2", "cdf33"):
        bank, grid, scaling, A, Zs = _setup(whole_box(1), fam, 64, 2)
        x = np.random.default_rng(0).standard_normal(64)
        assert np.abs(Zs(A.matvec(x)) - x).max() < 1e-10


def test_box_Zstar_A_identity_2d():
    bank, grid, scaling, A, Zs = _setup(whole_box(2), "cdf22", (16, 16), (2, 2))
    x = np.random.default_rng(1).standard_normal(256)
    assert np.abs(Zs(A.matvec(x)) - x).max() < 1e-10


def test_dense_A_factorization():
    bank, grid, scaling, A, Zs = _setup(interval(0.0, 0.5), "cdf33", 64, 2)
    Winv = dense_matrix(TransformPlan(bank, 6), inverse=True)
    expected = scaling.A_hat.toarray() @ Winv
    np.testing.assert_allclose(dense_A(A), expected, atol=1e-12)


def test_adjoint_consistency():
    bank, grid, scaling, A, Zs = _setup(interval(0.0, 0.5), "cdf33", 64, 2)
    rng = np.random.default_rng(2)
    x = rng.standard_normal(64)
    y = rng.standard_normal(grid.M)
    lhs = np.dot(A.matvec(x), y)
    rhs_ = np.dot(x, A.rmatvec(y))
    assert abs(lhs - rhs_) < 1e-12 * max(1.0, abs(lhs))


def test_plunge_identity_dense():
    bank, grid, scaling, A, Zs = _setup(interval(0.0, 0.5), "cdf33", 64, 2)
    Ad = dense_A(A)
    plunge = Ad - np.column_stack(
        [A.matvec(Zs(Ad[:, k])) for k in range(64)])
    Winv = dense_matrix(TransformPlan(bank, 6), inverse=True)
    Ah, Zh = scaling.A_hat.toarray(), scaling.Z_hat.toarray()
    expected = (Ah - Ah @ Zh.T @ Ah) @ Winv
    assert np.abs(plunge - expected).max() < 1e-10


def test_scaling_plunge_sparsity():
    for n in (64, 128, 256):
        bank, grid, scaling, *_ = _setup(interval(0.0, 0.5), "cdf22", n, 2)
        Ah, Zh = scaling.A_hat, scaling.Z_hat
        P = Ah - Ah @ (Zh.T @ Ah)
        P.data[np.abs(P.data) < 1e-12] = 0.0
        P.eliminate_zeros()
        per_row = np.diff(P.tocsr().indptr).max()
        assert per_row <= 12


def test_rhs_errors():
    bank, grid, *_ = _setup(interval(0.0, 0.5), "cdf22", 64, 2)
    assert not rhs(lambda p: np.zeros(p.shape[0]), grid).any()
    with pytest.raises(SystemError_):
        rhs(lambda p: np.full(p.shape[0], np.nan), grid)
    with pytest.raises(SystemError_):
        rhs(lambda p: np.zeros(3), grid)


def test_basis_function_consistency():
    """f = phi_k sampled on the grid equals A e_k mapped through W."""
    bank, grid, scaling, A, Zs = _setup(interval(0.0, 0.5), "cdf22", 64, 2)
    k = 10
    f_samples = scaling.A_hat.toarray()[:, k]
    e = np.zeros(64); e[k] = 1.0
    via_A = A.matvec(A.analysis(e))
    np.testing.assert_allclose(via_A, f_samples, atol=1e-10)


def test_disk_2d_identity():
    bank, grid, scaling, A, Zs = _setup(disk(0.5, 0.5, 0.35),
                                        "cdf33", (16, 16), (4, 4))
    # plunge operator vanishes on coefficients supported well inside
    x = np.zeros(256)
    x[0] = 1.0   # constant term: support everywhere -> plunge nonzero allowed
    y = A.matvec(x)
    assert np.isfinite(y).all() and y.size == grid.M
