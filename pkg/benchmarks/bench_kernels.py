"""Benchmark the compiled kernels against the pure-Python fallback.

Times the three hot paths behind one bidiagonalization iteration -- CSR
matvec, CSR transpose matvec, and the sparse Cholesky numeric
factorization plus its two triangular solves -- on a constrained-grid
problem, using both kernel backends on identical inputs.

Usage::

    python benchmarks/bench_kernels.py [--grid 48] [--repeats 20]
"""
from __future__ import annotations

import argparse
import importlib
import time

import numpy as np

from gkbsaddle import gen_constrained_grid, one_norm
from gkbsaddle._accel import py_kernels
from gkbsaddle.cholesky import PIVOT_RTOL, _rcm_permutation
from gkbsaddle.saddle import add_scaled_aat
from gkbsaddle.sparse import SparseSymMatrix


def _load_compiled():
    try:
        return importlib.import_module("gkbsaddle._accel._kernels")
    except ImportError:
        return None


def _time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best * 1e3


def _prepare(grid):
    sys_ = gen_constrained_grid(grid)
    eta = one_norm(sys_.w)
    m_mat = add_scaled_aat(sys_.w, sys_.a, eta)
    perm = _rcm_permutation(m_mat)
    mp = m_mat.permuted(perm)
    x = np.cos(np.arange(m_mat.n, dtype=np.float64))
    return sys_, m_mat, mp, x


def _chol_inputs(kern, mp: SparseSymMatrix):
    n = mp.n
    ap, ai, ax = mp.mat.indptr, mp.mat.indices, mp.mat.data
    parent = kern.etree(n, ap, ai)
    counts = kern.chol_counts(n, ap, ai, parent)
    lp = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=lp[1:])
    piv_tol = PIVOT_RTOL * float(mp.diagonal().max())
    return n, ap, ai, ax, parent, lp, piv_tol


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--grid", type=int, default=48)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    compiled = _load_compiled()
    if compiled is None:
        print("compiled extension not available; timing Python backend only")
    backends = [("python", py_kernels)] + (
        [("cython", compiled)] if compiled else []
    )

    sys_, m_mat, mp, x = _prepare(args.grid)
    a = sys_.a
    y = np.sin(np.arange(a.nrows, dtype=np.float64))
    print(f"grid {args.grid}: m = {m_mat.n}, n = {a.ncols}, "
          f"nnz(M) = {m_mat.nnz}")

    rows = []
    for label, kern in backends:
        mv = _time(
            lambda: kern.csr_matvec(
                m_mat.n, m_mat.mat.indptr, m_mat.mat.indices,
                m_mat.mat.data, x,
            ),
            args.repeats,
        )
        mtv = _time(
            lambda: kern.csr_matvec_t(
                a.nrows, a.ncols, a.indptr, a.indices, a.data, y,
            ),
            args.repeats,
        )
        n, ap, ai, ax, parent, lp, piv_tol = _chol_inputs(kern, mp)

        def factor_and_solve():
            status, _, li, lx = kern.chol_factor(
                n, ap, ai, ax, parent, lp, piv_tol
            )
            assert status == -1
            z = x.copy()
            kern.lower_solve(n, lp, li, lx, z)
            kern.lower_t_solve(n, lp, li, lx, z)

        chol = _time(factor_and_solve, max(2, args.repeats // 4))
        rows.append((label, mv, mtv, chol))

    print(f"{'backend':>8}  {'matvec ms':>10}  {'rmatvec ms':>11}  "
          f"{'chol+solve ms':>14}")
    for label, mv, mtv, chol in rows:
        print(f"{label:>8}  {mv:>10.3f}  {mtv:>11.3f}  {chol:>14.3f}")
    if len(rows) == 2:
        (_, pmv, pmtv, pchol), (_, cmv, cmtv, cchol) = rows
        print(f"{'speedup':>8}  {pmv / cmv:>10.1f}x  {pmtv / cmtv:>10.1f}x "
              f" {pchol / cchol:>13.1f}x")


if __name__ == "__main__":
    main()
