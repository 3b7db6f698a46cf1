"""Augmented-Lagrangian transform and double-Lagrange block handling."""
import numpy as np
import pytest

from gkbsaddle import (
    SparseMatrix,
    SparseSymMatrix,
    build_double_lagrange,
    compute_gamma,
    extract_double_lagrange,
    recommend_eta,
    recover_displacement,
    regularize,
)
from gkbsaddle.errors import (
    DimensionMismatch,
    EmptyMatrix,
    NonpositiveEta,
    NotPositiveDefinite,
    PatternMismatch,
)
from gkbsaddle.saddle import SaddleSystem

from conftest import mat, random_spd_dense, sym, system


class TestGamma:
    def test_identity(self):
        assert compute_gamma(sym(np.eye(3))) == 1.0

    def test_diagonal(self):
        assert compute_gamma(sym(np.diag([2.0, 4.0]))) == 3.0

    def test_implicit_zero_diagonal_counts(self):
        w = SparseSymMatrix.from_lower_coo(3, [2], [2], [10.0])
        assert compute_gamma(w) == 5.0

    def test_empty(self):
        with pytest.raises(EmptyMatrix):
            compute_gamma(SparseSymMatrix.from_lower_coo(0, [], [], []))


class TestRecommendEta:
    def test_wnorm_identity(self):
        assert recommend_eta(sym(np.eye(2)), 1.0, "wnorm") == 1.0

    def test_wnorm_over_gamma(self):
        w = sym(np.diag([2.0, 4.0]))
        assert recommend_eta(w, 3.0, "wnorm-over-gamma") == pytest.approx(
            4.0 / 3.0, rel=1e-15
        )

    def test_golub_greiff(self):
        w = sym(np.diag([2.0, 4.0]))
        a = mat([[2.0], [0.0]])
        # gamma * ||W||_1 / ||A||_1^2 = 3 * 4 / 4
        assert recommend_eta(w, 3.0, "golub-greiff", a=a) == 3.0

    def test_golub_greiff_requires_matrix(self):
        with pytest.raises(NonpositiveEta):
            recommend_eta(sym(np.eye(2)), 1.0, "golub-greiff")

    def test_explicit(self):
        assert recommend_eta(sym(np.eye(2)), 1.0, "explicit", value=0.25) == 0.25

    def test_explicit_rejects_nonpositive(self):
        with pytest.raises(NonpositiveEta):
            recommend_eta(sym(np.eye(2)), 1.0, "explicit", value=0.0)

    def test_zero_w_rejected(self):
        w = SparseSymMatrix.from_lower_coo(2, [], [], [])
        with pytest.raises(NonpositiveEta):
            recommend_eta(w, 1.0, "wnorm")

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            recommend_eta(sym(np.eye(2)), 1.0, "nope")


class TestRegularize:
    def test_zero_load(self):
        reg = regularize(system(np.eye(2), [[1.0], [0.0]]), eta=1.0)
        np.testing.assert_array_equal(reg.m_mat.to_dense(),
                                      np.diag([2.0, 1.0]))
        np.testing.assert_array_equal(reg.b, [0.0])
        np.testing.assert_array_equal(reg.shift, [0.0, 0.0])

    def test_unit_load(self):
        reg = regularize(system(np.eye(2), [[1.0], [0.0]], g=[1.0, 0.0]),
                         eta=1.0)
        np.testing.assert_allclose(reg.shift, [0.5, 0.0], rtol=1e-15)
        np.testing.assert_allclose(reg.b, [-0.5], rtol=1e-15)

    def test_semidefinite_w_becomes_definite(self):
        reg = regularize(system(np.diag([0.0, 1.0]), [[1.0], [0.0]]), eta=1.0)
        np.testing.assert_array_equal(reg.m_mat.to_dense(), np.eye(2))

    def test_semidefinite_w_fails_at_eta_zero(self):
        with pytest.raises(NotPositiveDefinite):
            regularize(system(np.diag([0.0, 1.0]), [[1.0], [0.0]]), eta=0.0)

    def test_eta_zero_keeps_w(self):
        sys_ = system(np.diag([2.0, 3.0]), [[1.0], [0.0]], g=[2.0, 3.0])
        reg = regularize(sys_, eta=0.0)
        assert reg.m_mat is sys_.w
        assert reg.npar == 1.0
        np.testing.assert_allclose(reg.shift, [1.0, 1.0], rtol=1e-15)

    def test_npar_equals_eta_when_positive(self):
        reg = regularize(system(np.eye(2), [[1.0], [0.0]]), eta=0.125)
        assert reg.npar == 0.125

    def test_negative_eta_rejected(self):
        with pytest.raises(NonpositiveEta):
            regularize(system(np.eye(2), [[1.0], [0.0]]), eta=-1.0)

    def test_transform_identities_on_random_system(self):
        rng = np.random.default_rng(21)
        m, n = 12, 4
        wd = random_spd_dense(rng, m)
        ad = rng.standard_normal((m, n))
        g = rng.standard_normal(m)
        r = rng.standard_normal(n)
        eta = 1.75
        reg = regularize(system(wd, ad, g=g, r=r), eta=eta)
        md = wd + eta * ad @ ad.T
        s = np.linalg.solve(md, g + eta * ad @ r)
        np.testing.assert_allclose(reg.m_mat.to_dense(), md, rtol=1e-13)
        np.testing.assert_allclose(reg.shift, s, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(reg.b, r - ad.T @ s, rtol=1e-10,
                                   atol=1e-12)

    def test_recover_displacement(self):
        reg = regularize(system(np.eye(2), [[1.0], [0.0]], g=[1.0, 0.0]),
                         eta=1.0)
        np.testing.assert_allclose(
            recover_displacement(reg, np.array([1.0, 2.0])),
            [1.5, 2.0], rtol=1e-15,
        )


class TestSaddleSystem:
    def test_shapes(self):
        sys_ = system(np.eye(3), [[1.0], [0.0], [0.0]])
        assert (sys_.m, sys_.n) == (3, 1)

    def test_wide_a_rejected(self):
        with pytest.raises(DimensionMismatch):
            system(np.eye(2), [[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])

    def test_row_count_mismatch_rejected(self):
        with pytest.raises(DimensionMismatch):
            SaddleSystem(sym(np.eye(2)), mat([[1.0], [0.0], [0.0]]),
                         np.zeros(2), np.zeros(1))


class TestDoubleLagrange:
    def test_one_by_one_example(self):
        dl = build_double_lagrange(sym([[2.0]]), mat([[1.0]]), 3.0)
        np.testing.assert_array_equal(
            dl.k.to_dense(),
            [[2.0, 3.0, 3.0], [3.0, -3.0, 3.0], [3.0, 3.0, -3.0]],
        )
        assert (dl.m, dl.n, dl.gamma) == (1, 1, 3.0)

    def test_round_trip_power_of_two_gamma_is_bitwise(self):
        w = sym([[2.0, 1.0], [1.0, 6.0]])
        a = mat([[1.5, 0.0], [-0.25, 0.7]])
        dl = build_double_lagrange(w, a, 4.0)
        w2, a2, gamma = extract_double_lagrange(dl)
        assert gamma == 4.0
        np.testing.assert_array_equal(w2.to_dense(), w.to_dense())
        np.testing.assert_array_equal(a2.to_dense(), a.to_dense())

    def test_round_trip_arbitrary_gamma(self):
        rng = np.random.default_rng(8)
        w = sym(random_spd_dense(rng, 5))
        a = mat(rng.standard_normal((5, 2)))
        dl = build_double_lagrange(w, a, 3.7)
        w2, a2, gamma = extract_double_lagrange(dl)
        assert gamma == 3.7
        np.testing.assert_allclose(w2.to_dense(), w.to_dense(), rtol=1e-15)
        np.testing.assert_allclose(a2.to_dense(), a.to_dense(), rtol=1e-15)

    def test_gamma_read_from_multiplier_diagonal(self):
        dl = build_double_lagrange(sym([[2.0]]), mat([[1.0]]), 3.0)
        _, _, gamma = extract_double_lagrange(dl.k, 1, 1)
        assert gamma == 3.0

    def test_nonpositive_gamma_rejected(self):
        with pytest.raises(NonpositiveEta):
            build_double_lagrange(sym([[2.0]]), mat([[1.0]]), 0.0)

    def test_wrong_dimension_rejected(self):
        dl = build_double_lagrange(sym([[2.0]]), mat([[1.0]]), 3.0)
        with pytest.raises(DimensionMismatch):
            extract_double_lagrange(dl.k, 2, 1)

    @staticmethod
    def _corrupted(dl, i, j, value):
        kd = dl.k.to_dense()
        kd[i, j] = kd[j, i] = value
        return sym(kd)

    def test_off_diagonal_in_multiplier_block(self):
        dl = build_double_lagrange(sym(np.eye(2)), mat(np.eye(2)), 2.0)
        m = 2
        bad = self._corrupted(dl, m, m + 1, 0.5)
        with pytest.raises(PatternMismatch) as err:
            extract_double_lagrange(bad, 2, 2)
        assert (err.value.row, err.value.col) == (m, m + 1)

    def test_wrong_scale_in_coupling_identity(self):
        dl = build_double_lagrange(sym(np.eye(2)), mat(np.eye(2)), 2.0)
        m, n = 2, 2
        bad = self._corrupted(dl, m + 1, m + n + 1, 5.0)
        with pytest.raises(PatternMismatch) as err:
            extract_double_lagrange(bad, 2, 2)
        assert (err.value.row, err.value.col) == (m + 1, m + n + 1)

    def test_missing_multiplier_diagonal(self):
        dl = build_double_lagrange(sym(np.eye(2)), mat(np.eye(2)), 2.0)
        bad = self._corrupted(dl, 3, 3, 0.0)
        with pytest.raises(PatternMismatch) as err:
            extract_double_lagrange(bad, 2, 2, gamma=2.0)
        assert (err.value.row, err.value.col) == (3, 3)

    def test_differing_coupling_blocks(self):
        dl = build_double_lagrange(sym(np.eye(2)), mat(np.eye(2)), 2.0)
        kd = dl.k.to_dense()
        kd[0, 2] = kd[2, 0] = 7.0  # (1,2) entry no longer matches (1,3)
        with pytest.raises(PatternMismatch) as err:
            extract_double_lagrange(sym(kd), 2, 2)
        assert err.value.row == 0

    def test_grid_sized_round_trip(self):
        # a banded W with gamma = 4 exercises sparse patterns end to end
        wd = np.diag(np.full(6, 4.0)) + np.diag(np.full(5, -1.0), 1) \
            + np.diag(np.full(5, -1.0), -1)
        a = mat([[1.0, 0.0], [0.0, 0.5], [0.0, 0.0],
                 [-1.0, 0.0], [0.0, -0.5], [0.0, 0.0]])
        gamma = compute_gamma(sym(wd))
        assert gamma == 4.0
        dl = build_double_lagrange(sym(wd), a, gamma)
        w2, a2, g2 = extract_double_lagrange(dl)
        np.testing.assert_array_equal(w2.to_dense(), wd)
        np.testing.assert_array_equal(a2.to_dense(), a.to_dense())
        assert g2 == 4.0
