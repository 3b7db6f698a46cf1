# cython: language_level=3
"""Compiled kernels: CSR matvecs, up-looking sparse Cholesky, triangular solves.

Function-for-function mirror of ``py_kernels.py``; see that module for the
storage conventions.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"

ctypedef cnp.int64_t idx_t
ctypedef cnp.float64_t val_t


def csr_matvec(Py_ssize_t m, idx_t[::1] Ap, idx_t[::1] Ai, val_t[::1] Ax,
               val_t[::1] x):
    cdef cnp.ndarray[val_t, ndim=1] out = np.zeros(m)
    cdef val_t[::1] y = out
    cdef Py_ssize_t i, p
    cdef val_t acc
    with nogil:
        for i in range(m):
            acc = 0.0
            for p in range(Ap[i], Ap[i + 1]):
                acc += Ax[p] * x[Ai[p]]
            y[i] = acc
    return out


def csr_matvec_t(Py_ssize_t m, Py_ssize_t n, idx_t[::1] Ap, idx_t[::1] Ai,
                 val_t[::1] Ax, val_t[::1] y):
    cdef cnp.ndarray[val_t, ndim=1] out = np.zeros(n)
    cdef val_t[::1] x = out
    cdef Py_ssize_t i, p
    cdef val_t yi
    with nogil:
        for i in range(m):
            yi = y[i]
            if yi != 0.0:
                for p in range(Ap[i], Ap[i + 1]):
                    x[Ai[p]] += Ax[p] * yi
    return out


def etree(Py_ssize_t n, idx_t[::1] Ap, idx_t[::1] Ai):
    cdef cnp.ndarray[idx_t, ndim=1] parent_arr = np.full(n, -1, dtype=np.int64)
    cdef cnp.ndarray[idx_t, ndim=1] ancestor_arr = np.full(n, -1, dtype=np.int64)
    cdef idx_t[::1] parent = parent_arr
    cdef idx_t[::1] ancestor = ancestor_arr
    cdef Py_ssize_t k, p
    cdef idx_t i, inext
    with nogil:
        for k in range(n):
            for p in range(Ap[k], Ap[k + 1]):
                i = Ai[p]
                while i != -1 and i < k:
                    inext = ancestor[i]
                    ancestor[i] = k
                    if inext == -1:
                        parent[i] = k
                    i = inext
    return parent_arr


cdef Py_ssize_t _ereach(Py_ssize_t k, idx_t[::1] Ap, idx_t[::1] Ai,
                        idx_t[::1] parent, idx_t[::1] flag,
                        idx_t[::1] stack, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t top = n
    cdef Py_ssize_t p, length
    cdef idx_t i
    flag[k] = k
    for p in range(Ap[k], Ap[k + 1]):
        i = Ai[p]
        if i >= k:
            continue
        length = 0
        while flag[i] != k:
            stack[length] = i
            length += 1
            flag[i] = k
            i = parent[i]
        while length > 0:
            length -= 1
            top -= 1
            stack[top] = stack[length]
    return top


def chol_counts(Py_ssize_t n, idx_t[::1] Ap, idx_t[::1] Ai, idx_t[::1] parent):
    cdef cnp.ndarray[idx_t, ndim=1] counts_arr = np.ones(n, dtype=np.int64)
    cdef idx_t[::1] counts = counts_arr
    cdef cnp.ndarray[idx_t, ndim=1] flag_arr = np.full(n, -1, dtype=np.int64)
    cdef cnp.ndarray[idx_t, ndim=1] stack_arr = np.zeros(n, dtype=np.int64)
    cdef idx_t[::1] flag = flag_arr
    cdef idx_t[::1] stack = stack_arr
    cdef Py_ssize_t k, top, t
    with nogil:
        for k in range(n):
            top = _ereach(k, Ap, Ai, parent, flag, stack, n)
            for t in range(top, n):
                counts[stack[t]] += 1
    return counts_arr


def chol_factor(Py_ssize_t n, idx_t[::1] Ap, idx_t[::1] Ai, val_t[::1] Ax,
                idx_t[::1] parent, idx_t[::1] Lp, double piv_tol):
    cdef Py_ssize_t nnz = Lp[n]
    cdef cnp.ndarray[idx_t, ndim=1] Li_arr = np.zeros(nnz, dtype=np.int64)
    cdef cnp.ndarray[val_t, ndim=1] Lx_arr = np.zeros(nnz)
    cdef idx_t[::1] Li = Li_arr
    cdef val_t[::1] Lx = Lx_arr
    cdef cnp.ndarray[idx_t, ndim=1] c_arr = np.asarray(Lp[:n]).copy()
    cdef idx_t[::1] c = c_arr
    cdef cnp.ndarray[val_t, ndim=1] x_arr = np.zeros(n)
    cdef val_t[::1] x = x_arr
    cdef cnp.ndarray[idx_t, ndim=1] flag_arr = np.full(n, -1, dtype=np.int64)
    cdef cnp.ndarray[idx_t, ndim=1] stack_arr = np.zeros(n, dtype=np.int64)
    cdef idx_t[::1] flag = flag_arr
    cdef idx_t[::1] stack = stack_arr
    cdef Py_ssize_t k, top, t, p
    cdef idx_t i, j
    cdef val_t d, lkj
    cdef Py_ssize_t status = -1
    cdef val_t bad_pivot = 0.0
    with nogil:
        for k in range(n):
            top = _ereach(k, Ap, Ai, parent, flag, stack, n)
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
                status = k
                bad_pivot = d
                break
            p = c[k]
            c[k] += 1
            Li[p] = k
            Lx[p] = d ** 0.5
    return status, bad_pivot, Li_arr, Lx_arr


def lower_solve(Py_ssize_t n, idx_t[::1] Lp, idx_t[::1] Li, val_t[::1] Lx,
                cnp.ndarray[val_t, ndim=1] b_arr):
    cdef val_t[::1] b = b_arr
    cdef Py_ssize_t j, p
    cdef val_t bj
    with nogil:
        for j in range(n):
            bj = b[j] / Lx[Lp[j]]
            b[j] = bj
            for p in range(Lp[j] + 1, Lp[j + 1]):
                b[Li[p]] -= Lx[p] * bj
    return b_arr


def lower_t_solve(Py_ssize_t n, idx_t[::1] Lp, idx_t[::1] Li, val_t[::1] Lx,
                  cnp.ndarray[val_t, ndim=1] b_arr):
    cdef val_t[::1] b = b_arr
    cdef Py_ssize_t j, p
    cdef val_t acc
    with nogil:
        for j in range(n - 1, -1, -1):
            acc = b[j]
            for p in range(Lp[j] + 1, Lp[j + 1]):
                acc -= Lx[p] * b[Li[p]]
            b[j] = acc / Lx[Lp[j]]
    return b_arr
