"""Sparse Cholesky factorization of symmetric positive definite matrices.

Up-looking factorization over the elimination tree with a reverse
Cuthill-McKee fill-reducing ordering.  The factor is deterministic for a
given input matrix; the numeric kernels live in ``_accel``.
"""
from __future__ import annotations

import numpy as np

from . import _accel
from .errors import DimensionMismatch, NotPositiveDefinite
from .sparse import SparseSymMatrix, as_vector

__all__ = ["SpdFactor", "spd_factor", "spd_solve"]

# A pivot at or below PIVOT_RTOL times the largest initial diagonal entry
# fails the factorization: semidefinite inputs (zero rows) produce a clear
# NotPositiveDefinite instead of garbage triangular factors.
PIVOT_RTOL = 1e-14


class SpdFactor:
    """Cholesky factor P M P' = L L' with fill-reducing permutation P.

    Attributes
    ----------
    n : int
        Dimension of the source matrix.
    perm : numpy.ndarray
        Permutation: row i of the permuted matrix is row ``perm[i]`` of the
        source.
    Lp, Li, Lx : numpy.ndarray
        The factor in compressed sparse column form, diagonal entry first
        within each column.
    """

    __slots__ = ("n", "perm", "Lp", "Li", "Lx")

    def __init__(self, n, perm, Lp, Li, Lx):
        self.n = n
        self.perm = perm
        self.Lp = Lp
        self.Li = Li
        self.Lx = Lx

    @property
    def nnz(self):
        return int(self.Lp[-1])

    def solve(self, b):
        """Solve M x = b via the two triangular sweeps."""
        b = as_vector(b, self.n, "b")
        y = b[self.perm].copy()
        _accel.lower_solve(self.n, self.Lp, self.Li, self.Lx, y)
        _accel.lower_t_solve(self.n, self.Lp, self.Li, self.Lx, y)
        x = np.empty_like(y)
        x[self.perm] = y
        return x


def _rcm_permutation(m: SparseSymMatrix):
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import reverse_cuthill_mckee

    pattern = csr_matrix(
        (np.ones(m.nnz), m.mat.indices.copy(), m.mat.indptr.copy()),
        shape=m.shape,
    )
    return np.asarray(
        reverse_cuthill_mckee(pattern, symmetric_mode=True), dtype=np.int64
    )


def spd_factor(m: SparseSymMatrix) -> SpdFactor:
    """Factor a symmetric positive definite matrix.

    Raises
    ------
    NotPositiveDefinite
        A pivot fell to ``1e-14 * max(diag)`` or below; the reported index
        refers to the original (unpermuted) matrix.
    """
    n = m.n
    perm = _rcm_permutation(m)
    mp = m.permuted(perm)
    ap, ai, ax = mp.mat.indptr, mp.mat.indices, mp.mat.data
    parent = _accel.etree(n, ap, ai)
    counts = _accel.chol_counts(n, ap, ai, parent)
    lp = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=lp[1:])
    diag = m.diagonal()
    piv_tol = PIVOT_RTOL * float(diag.max(initial=0.0))
    status, bad_pivot, li, lx = _accel.chol_factor(
        n, ap, ai, ax, parent, lp, piv_tol
    )
    if status >= 0:
        raise NotPositiveDefinite(perm[status], bad_pivot)
    return SpdFactor(n, perm, lp, li, lx)


def spd_solve(f: SpdFactor, b):
    """Solve M x = b against a previously computed factor."""
    if len(np.atleast_1d(b)) != f.n:
        raise DimensionMismatch(
            f"rhs has length {len(np.atleast_1d(b))}, factor dimension is {f.n}"
        )
    return f.solve(b)
