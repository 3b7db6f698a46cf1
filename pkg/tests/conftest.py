"""Shared helpers for the test suite."""
from __future__ import annotations

import numpy as np

from gkbsaddle import SaddleSystem, SparseMatrix, SparseSymMatrix


def sym(dense) -> SparseSymMatrix:
    """Dense symmetric array -> SparseSymMatrix."""
    return SparseSymMatrix.from_dense(np.asarray(dense, dtype=np.float64))


def mat(dense) -> SparseMatrix:
    """Dense array -> SparseMatrix."""
    return SparseMatrix.from_dense(np.asarray(dense, dtype=np.float64))


def system(w_dense, a_dense, g=None, r=None) -> SaddleSystem:
    """Assemble a SaddleSystem from dense blocks (defaults: zero loads)."""
    w = sym(w_dense)
    a = mat(a_dense)
    g = np.zeros(a.nrows) if g is None else np.asarray(g, dtype=np.float64)
    r = np.zeros(a.ncols) if r is None else np.asarray(r, dtype=np.float64)
    return SaddleSystem(w=w, a=a, g=g, r=r)


def m_norm(v, m_dense):
    """sqrt(v' M v) evaluated densely (independent of library code)."""
    v = np.asarray(v, dtype=np.float64)
    return float(np.sqrt(v @ (np.asarray(m_dense) @ v)))


def random_spd_dense(rng, n, cond=100.0):
    """Dense SPD matrix with spectrum logspaced across ``cond``."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    d = np.logspace(0.0, np.log10(cond), n)
    a = (q * d) @ q.T
    return 0.5 * (a + a.T)
