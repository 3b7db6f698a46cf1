"""CSR storage, weighted norms, and sparse products."""
import numpy as np
import pytest

from gkbsaddle import (
    SparseMatrix,
    SparseSymMatrix,
    add_scaled_aat,
    as_vector,
    one_norm,
    weighted_norm,
)
from gkbsaddle.errors import DimensionMismatch, IndefiniteNorm
from gkbsaddle.sparse import mat_vec, transpose_mat_vec

from conftest import mat, sym


class TestSparseMatrix:
    def test_csr_invariants_after_from_coo(self):
        a = SparseMatrix.from_coo(
            3, 4, [2, 0, 0, 1], [1, 3, 0, 2], [5.0, 1.0, 2.0, 3.0]
        )
        assert a.indptr[0] == 0
        assert a.indptr[-1] == a.nnz == len(a.data)
        assert all(
            np.all(np.diff(a.indices[a.indptr[i]:a.indptr[i + 1]]) > 0)
            for i in range(a.nrows)
        )
        np.testing.assert_array_equal(
            a.to_dense(),
            [[2.0, 0, 0, 1.0], [0, 0, 3.0, 0], [0, 5.0, 0, 0]],
        )

    def test_duplicates_are_summed(self):
        a = SparseMatrix.from_coo(2, 2, [0, 0], [0, 0], [0.5, 0.5])
        assert a.nnz == 1
        assert a.to_dense()[0, 0] == 1.0

    def test_explicit_zeros_dropped(self):
        a = SparseMatrix.from_coo(2, 2, [0, 1], [0, 1], [0.0, 2.0])
        assert a.nnz == 1

    def test_zero_sum_duplicates_dropped(self):
        a = SparseMatrix.from_coo(1, 1, [0, 0], [0, 0], [1.0, -1.0])
        assert a.nnz == 0

    def test_from_dense_round_trip(self):
        d = np.array([[1.0, 0.0, -2.0], [0.0, 0.0, 3.5]])
        np.testing.assert_array_equal(SparseMatrix.from_dense(d).to_dense(), d)

    def test_out_of_range_indices_rejected(self):
        with pytest.raises(DimensionMismatch):
            SparseMatrix.from_coo(2, 2, [2], [0], [1.0])

    def test_transpose(self):
        a = mat([[1.0, 2.0], [0.0, 3.0], [4.0, 0.0]])
        np.testing.assert_array_equal(a.transpose().to_dense(), a.to_dense().T)

    def test_diagonal_includes_implicit_zeros(self):
        a = SparseMatrix.from_coo(3, 3, [2], [2], [10.0])
        np.testing.assert_array_equal(a.diagonal(), [0.0, 0.0, 10.0])

    def test_submatrix(self):
        d = np.arange(12, dtype=float).reshape(3, 4)
        a = mat(d)
        np.testing.assert_array_equal(
            a.submatrix(1, 3, 0, 2).to_dense(), d[1:3, 0:2]
        )


class TestMatVec:
    def test_identity(self):
        a = mat(np.eye(3))
        x = np.array([1.0, -2.0, 3.0])
        np.testing.assert_array_equal(mat_vec(a, x), x)

    def test_single_column(self):
        a = mat([[1.0], [0.0]])
        np.testing.assert_array_equal(mat_vec(a, np.array([7.0])), [7.0, 0.0])

    def test_transpose_single_column(self):
        a = mat([[1.0], [0.0]])
        np.testing.assert_array_equal(
            transpose_mat_vec(a, np.array([3.0, 9.0])), [3.0]
        )

    def test_matches_dense_products(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            m, n = rng.integers(1, 50, size=2)
            d = np.where(
                rng.random((m, n)) < 0.3, rng.standard_normal((m, n)), 0.0
            )
            a = mat(d)
            x = rng.standard_normal(n)
            y = rng.standard_normal(m)
            np.testing.assert_allclose(a.matvec(x), d @ x, rtol=1e-14,
                                       atol=1e-14)
            np.testing.assert_allclose(a.rmatvec(y), d.T @ y, rtol=1e-14,
                                       atol=1e-14)

    def test_dimension_mismatch(self):
        a = mat(np.eye(3))
        with pytest.raises(DimensionMismatch):
            a.matvec(np.zeros(2))
        with pytest.raises(DimensionMismatch):
            a.rmatvec(np.zeros(2))


class TestSymmetric:
    def test_constructor_rejects_asymmetry(self):
        with pytest.raises(DimensionMismatch):
            SparseSymMatrix(mat([[1.0, 2.0], [np.nextafter(2.0, 3.0), 1.0]]))

    def test_from_lower_coo_mirrors(self):
        s = SparseSymMatrix.from_lower_coo(2, [1], [0], [3.0])
        np.testing.assert_array_equal(s.to_dense(), [[0, 3.0], [3.0, 0]])

    def test_from_coo_full_pattern(self):
        s = SparseSymMatrix.from_coo(2, [0, 1, 0, 1], [0, 0, 1, 1],
                                     [2.0, 1.0, 1.0, 2.0])
        np.testing.assert_array_equal(s.to_dense(), [[2.0, 1.0], [1.0, 2.0]])

    def test_symmetrize_is_exactly_symmetric(self):
        rng = np.random.default_rng(3)
        d = rng.standard_normal((5, 5))
        s = SparseSymMatrix.symmetrize(mat(d))
        # construction would have raised otherwise; check the values too
        np.testing.assert_allclose(s.to_dense(), 0.5 * (d + d.T), rtol=1e-15)

    def test_permuted(self):
        d = np.array([[4.0, 1.0, 0.0], [1.0, 5.0, 2.0], [0.0, 2.0, 6.0]])
        perm = np.array([2, 0, 1])
        s = sym(d).permuted(perm)
        np.testing.assert_array_equal(s.to_dense(), d[np.ix_(perm, perm)])


class TestNorms:
    def test_one_norm_identity(self):
        assert one_norm(sym(np.eye(4))) == 1.0

    def test_one_norm_general(self):
        assert one_norm(mat([[1.0, -2.0], [3.0, 4.0]])) == 6.0

    def test_one_norm_diagonal(self):
        assert one_norm(sym(np.diag([2.0, 7.0]))) == 7.0

    def test_one_norm_matches_dense(self):
        rng = np.random.default_rng(11)
        d = np.where(rng.random((8, 6)) < 0.4, rng.standard_normal((8, 6)), 0)
        assert one_norm(mat(d)) == np.abs(d).sum(axis=0).max()

    def test_weighted_norm_euclidean(self):
        assert weighted_norm(np.array([3.0, 4.0]), sym(np.eye(2))) == 5.0

    def test_weighted_norm_zero(self):
        assert weighted_norm(np.zeros(2), sym(np.eye(2))) == 0.0

    def test_weighted_norm_general(self):
        v = np.array([1.0, 1.0])
        m = sym([[2.0, 1.0], [1.0, 2.0]])
        assert weighted_norm(v, m) == pytest.approx(np.sqrt(6.0), rel=1e-15)

    def test_weighted_norm_indefinite_raises(self):
        m = sym([[1.0, 0.0], [0.0, -1.0]])
        with pytest.raises(IndefiniteNorm):
            weighted_norm(np.array([0.0, 1.0]), m)

    def test_weighted_norm_clamps_roundoff(self):
        # vanishing quadratic form: exact value 0, fp may dip tiny-negative
        m = sym([[1.0, -1.0], [-1.0, 1.0]])
        v = np.array([0.1, 0.1])
        assert weighted_norm(v, m) >= 0.0


class TestAsVector:
    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            as_vector([1.0, np.nan], 2)

    def test_rejects_inf(self):
        with pytest.raises(ValueError):
            as_vector([np.inf], 1)

    def test_length_check(self):
        with pytest.raises(DimensionMismatch):
            as_vector([1.0, 2.0], 3)

    def test_copies_to_float64(self):
        v = as_vector([1, 2, 3], 3)
        assert v.dtype == np.float64


class TestAddScaledAat:
    def test_entrywise_identity(self):
        rng = np.random.default_rng(5)
        wd = rng.standard_normal((6, 6))
        wd = wd @ wd.T + 6 * np.eye(6)
        ad = np.where(rng.random((6, 3)) < 0.5, rng.standard_normal((6, 3)), 0)
        eta = 2.5
        m = add_scaled_aat(sym(wd), mat(ad), eta)
        np.testing.assert_allclose(
            m.to_dense(), wd + eta * (ad @ ad.T), rtol=1e-14, atol=1e-14
        )

    def test_result_is_exactly_symmetric(self):
        # constructing SparseSymMatrix enforces bitwise symmetry
        rng = np.random.default_rng(9)
        ad = rng.standard_normal((5, 2))
        m = add_scaled_aat(sym(np.eye(5)), mat(ad), 1.0)
        assert isinstance(m, SparseSymMatrix)
