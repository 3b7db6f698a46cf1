"""Sparse matrix storage and the weighted linear algebra primitives.

Matrices are compressed sparse row (CSR) with 64-bit float values and
64-bit indices.  Symmetric matrices store the *full* pattern (both
triangles); assembly enforces exact symmetry so downstream code may rely
on ``(i, j)`` and ``(j, i)`` holding bitwise-equal values.
"""
from __future__ import annotations

import numpy as np

from . import _accel
from .errors import DimensionMismatch, IndefiniteNorm

__all__ = [
    "SparseMatrix",
    "SparseSymMatrix",
    "as_vector",
    "mat_vec",
    "transpose_mat_vec",
    "one_norm",
    "weighted_norm",
    "add_scaled_aat",
]


def as_vector(x, length=None, name="vector"):
    """Validate and convert ``x`` to a 1-D float64 array.

    Parameters
    ----------
    x : array_like
    length : int, optional
        Required length; a mismatch raises :class:`DimensionMismatch`.
    name : str
        Used in error messages.

    Returns
    -------
    numpy.ndarray
        Contiguous float64 copy-or-view of ``x``.

    Raises
    ------
    DimensionMismatch
        Wrong dimensionality or length.
    ValueError
        Non-finite entries (NaN/Inf are rejected at every API boundary).
    """
    v = np.ascontiguousarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-D, got shape {v.shape}")
    if length is not None and v.shape[0] != length:
        raise DimensionMismatch(
            f"{name} has length {v.shape[0]}, expected {length}"
        )
    if not np.isfinite(v).all():
        raise ValueError(f"{name} contains non-finite entries")
    return v


class SparseMatrix:
    """CSR matrix with canonical structure.

    Invariants: the row pointer is non-decreasing with ``indptr[-1] == nnz``;
    column indices are strictly increasing within each row; no explicit
    zeros are stored after canonicalization.
    """

    __slots__ = ("nrows", "ncols", "indptr", "indices", "data")

    def __init__(self, nrows, ncols, indptr, indices, data):
        self.nrows = int(nrows)
        self.ncols = int(ncols)
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64)
        self.data = np.ascontiguousarray(data, dtype=np.float64)
        if self.indptr.shape[0] != self.nrows + 1:
            raise DimensionMismatch("indptr length must be nrows + 1")
        if self.indptr[-1] != self.indices.shape[0]:
            raise DimensionMismatch("indptr[-1] must equal nnz")
        if self.indices.shape[0] != self.data.shape[0]:
            raise DimensionMismatch("indices and data lengths differ")

    # -- construction ------------------------------------------------------

    @classmethod
    def from_coo(cls, nrows, ncols, rows, cols, vals, *, drop_zeros=True):
        """Build from triplets: duplicates are summed, zeros dropped,
        columns sorted within each row."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if not (rows.shape == cols.shape == vals.shape):
            raise DimensionMismatch("triplet arrays must have equal length")
        if rows.size and (
            rows.min() < 0 or rows.max() >= nrows
            or cols.min() < 0 or cols.max() >= ncols
        ):
            raise DimensionMismatch("triplet index out of range")
        # lexicographic sort by (row, col), then segment-sum duplicates
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size:
            keep = np.empty(rows.size, dtype=bool)
            keep[0] = True
            keep[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            starts = np.flatnonzero(keep)
            vals = np.add.reduceat(vals, starts)
            rows, cols = rows[starts], cols[starts]
        if drop_zeros:
            nz = vals != 0.0
            rows, cols, vals = rows[nz], cols[nz], vals[nz]
        indptr = np.zeros(nrows + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(nrows, ncols, indptr, cols, vals)

    @classmethod
    def from_dense(cls, a):
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2:
            raise DimensionMismatch("dense input must be 2-D")
        r, c = np.nonzero(a)
        return cls.from_coo(a.shape[0], a.shape[1], r, c, a[r, c])

    # -- basic queries -----------------------------------------------------

    @property
    def nnz(self):
        return int(self.indptr[-1])

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def to_dense(self):
        out = np.zeros((self.nrows, self.ncols))
        rows = np.repeat(np.arange(self.nrows), np.diff(self.indptr))
        out[rows, self.indices] = self.data
        return out

    def diagonal(self):
        """Dense diagonal (implicit zeros included)."""
        d = np.zeros(min(self.nrows, self.ncols))
        rows = np.repeat(np.arange(self.nrows), np.diff(self.indptr))
        on_diag = rows == self.indices
        d[rows[on_diag]] = self.data[on_diag]
        return d

    def transpose(self):
        rows = np.repeat(np.arange(self.nrows), np.diff(self.indptr))
        return SparseMatrix.from_coo(
            self.ncols, self.nrows, self.indices, rows, self.data,
            drop_zeros=False,
        )

    def triplets(self):
        """(rows, cols, values) of the stored entries, row-major order."""
        rows = np.repeat(np.arange(self.nrows), np.diff(self.indptr))
        return rows, self.indices.copy(), self.data.copy()

    # -- products ----------------------------------------------------------

    def matvec(self, x):
        x = as_vector(x, self.ncols, "x")
        return _accel.csr_matvec(
            self.nrows, self.indptr, self.indices, self.data, x
        )

    def rmatvec(self, y):
        """A.T @ y without materializing the transpose."""
        y = as_vector(y, self.nrows, "y")
        return _accel.csr_matvec_t(
            self.nrows, self.ncols, self.indptr, self.indices, self.data, y
        )

    def submatrix(self, r0, r1, c0, c1):
        """Dense-index block ``[r0:r1, c0:c1]`` as a new SparseMatrix."""
        rows, cols, vals = self.triplets()
        keep = (rows >= r0) & (rows < r1) & (cols >= c0) & (cols < c1)
        return SparseMatrix.from_coo(
            r1 - r0, c1 - c0, rows[keep] - r0, cols[keep] - c0, vals[keep],
            drop_zeros=False,
        )


class SparseSymMatrix:
    """Symmetric matrix stored with its full pattern.

    Construction enforces exact symmetry: pattern and values of ``(i, j)``
    and ``(j, i)`` match bitwise.
    """

    __slots__ = ("mat",)

    def __init__(self, mat: SparseMatrix):
        if mat.nrows != mat.ncols:
            raise DimensionMismatch("symmetric matrix must be square")
        t = mat.transpose()
        if (
            not np.array_equal(mat.indptr, t.indptr)
            or not np.array_equal(mat.indices, t.indices)
            or not np.array_equal(mat.data, t.data)
        ):
            raise DimensionMismatch("matrix is not exactly symmetric")
        self.mat = mat

    @classmethod
    def from_coo(cls, n, rows, cols, vals):
        """Build from full-pattern triplets; symmetry is validated."""
        return cls(SparseMatrix.from_coo(n, n, rows, cols, vals))

    @classmethod
    def from_lower_coo(cls, n, rows, cols, vals):
        """Build from lower-triangle (or mixed) triplets by mirroring.

        Off-diagonal triplets are mirrored; duplicate coordinates are
        summed before mirroring so the result is exactly symmetric.
        """
        base = SparseMatrix.from_coo(n, n, rows, cols, vals)
        r, c, v = base.triplets()
        off = r != c
        rr = np.concatenate([r, c[off]])
        cc = np.concatenate([c, r[off]])
        vv = np.concatenate([v, v[off]])
        return cls(SparseMatrix.from_coo(n, n, rr, cc, vv, drop_zeros=False))

    @classmethod
    def from_dense(cls, a):
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch("dense input must be square")
        if not np.array_equal(a, a.T):
            raise DimensionMismatch("dense input is not symmetric")
        return cls(SparseMatrix.from_dense(a))

    @classmethod
    def symmetrize(cls, mat: SparseMatrix):
        """(A + A.T)/2 with exact symmetry by construction.

        Used after sparse products whose floating-point summation order
        may differ between the two triangles.
        """
        r, c, v = mat.triplets()
        tr, tc, tv = r.copy(), c.copy(), v.copy()
        half = SparseMatrix.from_coo(
            mat.nrows, mat.ncols,
            np.concatenate([r, tc]), np.concatenate([c, tr]),
            np.concatenate([v, tv]) * 0.5,
        )
        return cls(half)

    # -- delegation --------------------------------------------------------

    @property
    def n(self):
        return self.mat.nrows

    @property
    def shape(self):
        return self.mat.shape

    @property
    def nnz(self):
        return self.mat.nnz

    def to_dense(self):
        return self.mat.to_dense()

    def diagonal(self):
        return self.mat.diagonal()

    def triplets(self):
        return self.mat.triplets()

    def matvec(self, x):
        return self.mat.matvec(x)

    def permuted(self, perm):
        """M[perm][:, perm] as a new SparseSymMatrix."""
        perm = np.asarray(perm, dtype=np.int64)
        iperm = np.empty_like(perm)
        iperm[perm] = np.arange(perm.size)
        r, c, v = self.triplets()
        return SparseSymMatrix(
            SparseMatrix.from_coo(self.n, self.n, iperm[r], iperm[c], v,
                                  drop_zeros=False)
        )


def mat_vec(a, x):
    """Sparse product A @ x."""
    if isinstance(a, SparseSymMatrix):
        a = a.mat
    return a.matvec(x)


def transpose_mat_vec(a, y):
    """Sparse product A.T @ y (no transpose materialized)."""
    if isinstance(a, SparseSymMatrix):
        a = a.mat
    return a.rmatvec(y)


def one_norm(a):
    """Matrix 1-norm: max over columns of the absolute column sum."""
    if isinstance(a, SparseSymMatrix):
        a = a.mat
    if a.nnz == 0:
        return 0.0
    sums = np.bincount(a.indices, weights=np.abs(a.data), minlength=a.ncols)
    return float(sums.max())


def weighted_norm(v, m: SparseSymMatrix):
    """Energy norm ||v||_M = sqrt(v' M v) for symmetric M.

    Tiny negative quadratic forms (round-off on a semidefinite M) clamp to
    zero; a significantly negative value raises :class:`IndefiniteNorm`.
    """
    v = as_vector(v, m.n, "v")
    q = float(v @ m.matvec(v))
    if q < 0.0:
        vv = float(v @ v)
        if q < -1e-14 * vv * max(one_norm(m), 1.0):
            raise IndefiniteNorm(
                f"v'Mv = {q:.6g} is significantly negative; M is not PSD"
            )
        q = 0.0
    return np.sqrt(q)


def add_scaled_aat(w: SparseSymMatrix, a: SparseMatrix, eta):
    """M = W + eta * A A' with exact symmetry of the result.

    The sparse-sparse product uses scipy; the result is symmetrized
    half-sum-wise so the SparseSymMatrix bitwise invariant holds even
    when the product's two triangles were summed in different orders.
    """
    import scipy.sparse as sps

    if w.n != a.nrows:
        raise DimensionMismatch("W and A row dimensions differ")
    ws = sps.csr_matrix(
        (w.mat.data, w.mat.indices, w.mat.indptr), shape=w.shape
    )
    asp = sps.csr_matrix((a.data, a.indices, a.indptr), shape=a.shape)
    prod = (ws + float(eta) * (asp @ asp.T)).tocoo()
    merged = SparseMatrix.from_coo(
        w.n, w.n, prod.row.astype(np.int64), prod.col.astype(np.int64),
        prod.data,
    )
    return SparseSymMatrix.symmetrize(merged)
