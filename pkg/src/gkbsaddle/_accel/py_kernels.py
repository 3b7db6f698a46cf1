"""Pure-numpy fallback kernels.

Mirrors the compiled module in ``_kernels.pyx`` function-for-function so
the two backends are interchangeable at import time.  The matvecs are
vectorized; the factorization walks the elimination tree in Python loops,
which is acceptable at desk scale.

Sparse-Cholesky conventions (shared with the compiled backend):

* the input matrix is CSR with the *full* symmetric pattern; only the
  entries ``j <= k`` of each row ``k`` (its lower-triangular part) are
  read,
* the factor ``L`` is returned in CSC with the diagonal entry first in
  each column, so the triangular solves can address it directly.
"""
import numpy as np

BACKEND = "python"


def csr_matvec(m, Ap, Ai, Ax, x):
    """y = A @ x for an m-row CSR matrix."""
    y = np.zeros(m)
    if len(Ax) == 0:
        return y
    prod = Ax * x[Ai]
    nonempty = np.flatnonzero(np.diff(Ap) > 0)
    if nonempty.size:
        y[nonempty] = np.add.reduceat(prod, Ap[nonempty])
    return y


def csr_matvec_t(m, n, Ap, Ai, Ax, y):
    """x = A.T @ y without materializing the transpose."""
    if len(Ax) == 0:
        return np.zeros(n)
    rows = np.repeat(np.arange(m), np.diff(Ap))
    return np.bincount(Ai, weights=Ax * y[rows], minlength=n)


def etree(n, Ap, Ai):
    """Elimination tree of a symmetric CSR matrix (lower entries used)."""
    parent = np.full(n, -1, dtype=np.int64)
    ancestor = np.full(n, -1, dtype=np.int64)
    for k in range(n):
        for p in range(Ap[k], Ap[k + 1]):
            i = Ai[p]
            # walk from i up to the root or to k, with path compression
            while i != -1 and i < k:
                inext = ancestor[i]
                ancestor[i] = k
                if inext == -1:
                    parent[i] = k
                i = inext
    return parent


def _ereach(k, Ap, Ai, parent, flag, stack):
    """Pattern of row k of L (excluding the diagonal) in topological order.

    Returns ``top`` such that ``stack[top:len(stack)]`` holds the pattern.
    ``flag`` is a work array holding the last row that visited each column.
    """
    n = len(parent)
    top = n
    flag[k] = k
    for p in range(Ap[k], Ap[k + 1]):
        i = Ai[p]
        if i >= k:
            continue
        # traverse up the tree until hitting a flagged node
        length = 0
        while flag[i] != k:
            stack[length] = i
            length += 1
            flag[i] = k
            i = parent[i]
        # push the path onto the output stack (reversed: topological order)
        while length > 0:
            length -= 1
            top -= 1
            stack[top] = stack[length]
    return top

# NB: _ereach reuses the low end of `stack` as path scratch and the high end
# as output; a path of length L and an output of size n never overlap because
# the path is flushed before the output grows past n - L.


def chol_counts(n, Ap, Ai, parent):
    """Entries per column of L, diagonal included."""
    counts = np.ones(n, dtype=np.int64)
    flag = np.full(n, -1, dtype=np.int64)
    stack = np.zeros(n, dtype=np.int64)
    for k in range(n):
        top = _ereach(k, Ap, Ai, parent, flag, stack)
        for t in range(top, n):
            counts[stack[t]] += 1
    return counts


def chol_factor(n, Ap, Ai, Ax, parent, Lp, piv_tol):
    """Up-looking numeric Cholesky.

    Parameters
    ----------
    Lp : int64 array, length n+1
        Column pointers for L, precomputed from `chol_counts`.
    piv_tol : float
        A pivot d <= piv_tol fails the factorization.

    Returns
    -------
    (status, bad_pivot, Li, Lx) where status is -1 on success or the index
    of the failing pivot (bad_pivot holds its value, 0.0 on success).
    """
    nnz = int(Lp[n])
    Li = np.zeros(nnz, dtype=np.int64)
    Lx = np.zeros(nnz)
    c = Lp[:n].astype(np.int64).copy()  # next free slot per column
    x = np.zeros(n)
    flag = np.full(n, -1, dtype=np.int64)
    stack = np.zeros(n, dtype=np.int64)
    for k in range(n):
        top = _ereach(k, Ap, Ai, parent, flag, stack)
        # scatter the lower-triangular part of row k
        d = 0.0
        for p in range(Ap[k], Ap[k + 1]):
            i = Ai[p]
            if i < k:
                x[i] = Ax[p]
            elif i == k:
                d = Ax[p]
        for t in range(top, n):
            j = stack[t]
            lkj = x[j] / Lx[Lp[j]]
            x[j] = 0.0
            for p in range(Lp[j] + 1, c[j]):
                x[Li[p]] -= Lx[p] * lkj
            d -= lkj * lkj
            p = c[j]
            c[j] += 1
            Li[p] = k
            Lx[p] = lkj
        if not (d > piv_tol):
            return k, d, Li, Lx
        p = c[k]
        c[k] += 1
        Li[p] = k
        Lx[p] = np.sqrt(d)
    return -1, 0.0, Li, Lx


def lower_solve(n, Lp, Li, Lx, b):
    """In-place solve of L y = b (CSC, diagonal-first columns)."""
    for j in range(n):
        p0 = Lp[j]
        p1 = Lp[j + 1]
        bj = b[j] / Lx[p0]
        b[j] = bj
        if p1 > p0 + 1:
            b[Li[p0 + 1:p1]] -= Lx[p0 + 1:p1] * bj
    return b


def lower_t_solve(n, Lp, Li, Lx, b):
    """In-place solve of L.T x = b (CSC, diagonal-first columns)."""
    for j in range(n - 1, -1, -1):
        p0 = Lp[j]
        p1 = Lp[j + 1]
        if p1 > p0 + 1:
            b[j] -= Lx[p0 + 1:p1] @ b[Li[p0 + 1:p1]]
        b[j] /= Lx[p0]
    return b
