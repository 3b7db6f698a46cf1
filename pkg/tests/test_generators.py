"""Synthetic problem families: structure, determinism, well-posedness."""
import numpy as np
import pytest

from gkbsaddle import one_norm, regularize, solve
from gkbsaddle.errors import InvalidGrid, InvalidSpec, NotPositiveDefinite
from gkbsaddle.generators import (
    FAMILIES,
    ProblemSpec,
    gen_constrained_grid,
    gen_random,
    gen_semidefinite_coupled,
    generate,
    grid_laplacian,
    grid_patch_nodes,
)
from gkbsaddle.oracle import direct_saddle_solve
from gkbsaddle.cholesky import spd_factor
from gkbsaddle.sparse import add_scaled_aat


class TestProblemSpec:
    def test_family_validation(self):
        with pytest.raises(InvalidSpec):
            ProblemSpec(family="mystery")
        assert len(FAMILIES) == 3

    def test_default_constraint_filled_in(self):
        assert ProblemSpec(family="constrained-grid",
                           n_grid=8).constraint == "rigid-patch"
        assert ProblemSpec(family="random", m=4, n=2).constraint == "none"

    def test_mismatched_constraint_rejected(self):
        with pytest.raises(InvalidSpec):
            ProblemSpec(family="random", m=4, n=2, constraint="rigid-patch")


class TestGridLaplacian:
    def test_dimension(self):
        assert grid_laplacian(4).n == 16

    def test_stencil(self):
        lap = grid_laplacian(3).to_dense()
        np.testing.assert_array_equal(np.diag(lap), np.full(9, 4.0))
        # center node (1,1) -> index 4 has all four neighbors
        assert sorted(np.flatnonzero(lap[4])) == [1, 3, 4, 5, 7]
        assert lap[4].sum() == 0.0
        # corner node keeps diagonal 4 with only two neighbors
        assert lap[0].sum() == 2.0

    def test_positive_definite(self):
        assert np.linalg.eigvalsh(grid_laplacian(5).to_dense())[0] > 0.0


class TestPatch:
    def test_patch_is_centered_square(self):
        nodes = grid_patch_nodes(4)
        assert len(nodes) == 4  # side max(2, 2) = 2
        assert nodes == [1 * 4 + 1, 1 * 4 + 2, 2 * 4 + 1, 2 * 4 + 2]

    def test_patch_scales_with_grid(self):
        assert len(grid_patch_nodes(8)) == 16
        assert len(grid_patch_nodes(16)) == 64


class TestConstrainedGrid:
    def test_shapes(self):
        sys_ = gen_constrained_grid(4)
        assert sys_.m == 16
        assert sys_.n == len(grid_patch_nodes(4)) - 1

    def test_too_small_grid(self):
        with pytest.raises(InvalidGrid):
            gen_constrained_grid(3)

    def test_unsupported_constraint(self):
        with pytest.raises(InvalidSpec):
            gen_constrained_grid(8, constraint="pinned")

    def test_chain_structure(self):
        sys_ = gen_constrained_grid(4)
        ad = sys_.a.to_dense()
        nodes = grid_patch_nodes(4)
        n = sys_.n
        for c in range(n):
            col = ad[:, c]
            assert col[nodes[c]] == float(n)
            assert col[nodes[c + 1]] == -float(n)
            assert np.count_nonzero(col) == 2

    def test_full_column_rank(self):
        sys_ = gen_constrained_grid(8)
        assert np.linalg.matrix_rank(sys_.a.to_dense()) == sys_.n

    def test_loads(self):
        sys_ = gen_constrained_grid(4)
        h = 1.0 / 5.0
        np.testing.assert_array_equal(sys_.g, np.full(16, h * h))
        np.testing.assert_array_equal(sys_.r, np.zeros(sys_.n))

    def test_solution_ties_patch_together(self):
        sys_ = gen_constrained_grid(8)
        w, _ = direct_saddle_solve(sys_)
        patch = w[grid_patch_nodes(8)]
        assert np.abs(patch - patch[0]).max() <= 1e-10 * np.abs(w).max()

    def test_deterministic(self):
        a = gen_constrained_grid(6)
        b = gen_constrained_grid(6)
        np.testing.assert_array_equal(a.w.to_dense(), b.w.to_dense())
        np.testing.assert_array_equal(a.a.to_dense(), b.a.to_dense())


class TestSemidefiniteCoupled:
    def test_zero_rows_count(self):
        sys_ = gen_semidefinite_coupled(4, 1)
        d = sys_.w.to_dense()
        zero_rows = np.flatnonzero(~d.any(axis=1))
        assert list(zero_rows) == [16]

    def test_parameter_validation(self):
        with pytest.raises(InvalidGrid):
            gen_semidefinite_coupled(1, 1)
        with pytest.raises(InvalidSpec):
            gen_semidefinite_coupled(4, 0)

    def test_constraint_columns(self):
        sys_ = gen_semidefinite_coupled(4, 3, seed=1)
        ad = sys_.a.to_dense()
        mg = 16
        for c in range(3):
            assert ad[mg + c, c] == 1.0
            weights = -ad[:mg, c]
            nz = weights[weights != 0.0]
            assert len(nz) == 3
            assert nz.sum() == pytest.approx(1.0, rel=1e-14)
            assert np.all(nz > 0.0)

    def test_w_semidefinite_but_augmented_definite(self):
        sys_ = gen_semidefinite_coupled(4, 2, seed=0)
        with pytest.raises(NotPositiveDefinite):
            spd_factor(sys_.w)
        m_mat = add_scaled_aat(sys_.w, sys_.a, one_norm(sys_.w))
        spd_factor(m_mat)  # must succeed

    def test_regularized_solve_matches_oracle(self):
        sys_ = gen_semidefinite_coupled(4, 2, seed=0)
        reg = regularize(sys_, eta=one_norm(sys_.w))
        res = solve(reg)
        assert res.status in ("Converged", "LuckyBreakdown")
        w_ref, p_ref = direct_saddle_solve(sys_)
        w_num = res.u + reg.shift
        assert np.linalg.norm(w_num - w_ref) <= 1e-6 * np.linalg.norm(w_ref)
        assert np.linalg.norm(res.p - p_ref) <= 1e-6 * np.linalg.norm(p_ref)

    def test_deterministic_in_seed(self):
        a = gen_semidefinite_coupled(4, 3, seed=7)
        b = gen_semidefinite_coupled(4, 3, seed=7)
        np.testing.assert_array_equal(a.a.to_dense(), b.a.to_dense())
        np.testing.assert_array_equal(a.r, b.r)
        c = gen_semidefinite_coupled(4, 3, seed=8)
        assert not np.array_equal(a.a.to_dense(), c.a.to_dense())


class TestRandom:
    def test_identity_at_cond_one(self):
        sys_ = gen_random(10, 3, seed=0, cond_target=1.0)
        np.testing.assert_array_equal(sys_.w.to_dense(), np.eye(10))

    def test_spectrum_spread(self):
        sys_ = gen_random(12, 4, seed=0, cond_target=100.0)
        evals = np.linalg.eigvalsh(sys_.w.to_dense())
        assert evals[0] > 0.0
        assert evals[-1] / evals[0] == pytest.approx(100.0, rel=1e-6)

    def test_full_column_rank(self):
        for seed in range(5):
            sys_ = gen_random(20, 7, seed=seed)
            assert np.linalg.matrix_rank(sys_.a.to_dense()) == 7

    def test_parameter_validation(self):
        with pytest.raises(InvalidSpec):
            gen_random(3, 4)
        with pytest.raises(InvalidSpec):
            gen_random(3, 0)
        with pytest.raises(InvalidSpec):
            gen_random(3, 2, cond_target=0.5)

    def test_square_case_allowed(self):
        sys_ = gen_random(5, 5, seed=2)
        assert np.linalg.matrix_rank(sys_.a.to_dense()) == 5

    def test_deterministic_in_seed(self):
        a = gen_random(15, 5, seed=3)
        b = gen_random(15, 5, seed=3)
        np.testing.assert_array_equal(a.w.to_dense(), b.w.to_dense())
        np.testing.assert_array_equal(a.a.to_dense(), b.a.to_dense())
        np.testing.assert_array_equal(a.g, b.g)
        np.testing.assert_array_equal(a.r, b.r)

    def test_oracle_solvable(self):
        sys_ = gen_random(25, 8, seed=4, cond_target=1e3)
        direct_saddle_solve(sys_)  # must not raise


class TestGenerate:
    def test_grid_dispatch(self):
        spec = ProblemSpec(family="constrained-grid", n_grid=4)
        sys_ = generate(spec)
        ref = gen_constrained_grid(4)
        np.testing.assert_array_equal(sys_.a.to_dense(), ref.a.to_dense())

    def test_grid_inhomogeneous_r(self):
        spec = ProblemSpec(family="constrained-grid", n_grid=4, seed=5,
                           inhomogeneous_r=True)
        sys_ = generate(spec)
        assert np.any(sys_.r != 0.0)
        np.testing.assert_array_equal(generate(spec).r, sys_.r)

    def test_semidefinite_dispatch(self):
        spec = ProblemSpec(family="semidefinite-coupled", n_grid=4,
                           n_slave=2, seed=1)
        sys_ = generate(spec)
        ref = gen_semidefinite_coupled(4, 2, seed=1)
        np.testing.assert_array_equal(sys_.a.to_dense(), ref.a.to_dense())

    def test_random_dispatch(self):
        spec = ProblemSpec(family="random", m=10, n=3, seed=2,
                           cond_target=5.0)
        sys_ = generate(spec)
        ref = gen_random(10, 3, seed=2, cond_target=5.0)
        np.testing.assert_array_equal(sys_.w.to_dense(), ref.w.to_dense())
