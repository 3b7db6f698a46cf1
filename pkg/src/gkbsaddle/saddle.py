"""Saddle-point systems and the augmented-Lagrangian transform.

The block system

    [ W   A ] [ w ]   [ g ]
    [ A'  0 ] [ p ] = [ r ]

with W symmetric positive semidefinite (m x m), A of full column rank
(m x n), and ker(W) intersecting ker(A') trivially, is transformed into an
equivalent system whose leading block M = W + eta A A' is positive
definite and whose upper right-hand side block is zero:

    [ M   A ] [ u ]   [ 0 ]
    [ A'  0 ] [ p ] = [ b ],    u = w - s,  s = M^{-1}(g + eta A r),
                                b = r - A' s.

The multiplier p is unchanged by the transform.  Setting eta = 0 keeps
M = W (which must then be positive definite) and the iteration runs with
N = I.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cholesky import SpdFactor, spd_factor
from .errors import (
    DimensionMismatch,
    EmptyMatrix,
    NonpositiveEta,
    PatternMismatch,
)
from .sparse import (
    SparseMatrix,
    SparseSymMatrix,
    add_scaled_aat,
    as_vector,
    one_norm,
)

__all__ = [
    "SaddleSystem",
    "RegularizedSystem",
    "DoubleLagrangeSystem",
    "compute_gamma",
    "recommend_eta",
    "regularize",
    "recover_displacement",
    "build_double_lagrange",
    "extract_double_lagrange",
]


@dataclass
class SaddleSystem:
    """The block system {W, A, g, r}.

    Invariants (full column rank of A, trivial kernel intersection) are
    checked by the dense oracle at desk scale, not at construction.
    """

    w: SparseSymMatrix
    a: SparseMatrix
    g: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        if self.a.nrows != self.w.n:
            raise DimensionMismatch("A must have as many rows as W")
        if self.a.ncols > self.a.nrows:
            raise DimensionMismatch("A must have n <= m (tall or square)")
        self.g = as_vector(self.g, self.w.n, "g")
        self.r = as_vector(self.r, self.a.ncols, "r")

    @property
    def m(self):
        return self.w.n

    @property
    def n(self):
        return self.a.ncols


@dataclass
class RegularizedSystem:
    """The transformed system plus everything needed to iterate on it.

    ``npar`` is the scalar such that N = (1/npar) I: equal to eta when
    eta > 0, and 1 for the eta = 0 path (M = W, N = I).
    """

    m_mat: SparseSymMatrix
    m_factor: SpdFactor
    a: SparseMatrix
    eta: float
    b: np.ndarray
    gamma: float
    shift: np.ndarray
    system: SaddleSystem = field(repr=False)

    @property
    def npar(self):
        return self.eta if self.eta > 0.0 else 1.0


def compute_gamma(w: SparseSymMatrix):
    """Block-equilibration scalar: half the sum of the extreme diagonal
    entries of W (implicit zeros included, per the zero-row case)."""
    if w.n == 0:
        raise EmptyMatrix("cannot compute gamma of an empty matrix")
    d = w.diagonal()
    return 0.5 * (float(d.min()) + float(d.max()))


def recommend_eta(w: SparseSymMatrix, gamma, mode, value=None, a=None):
    """Suggested augmentation parameter.

    Parameters
    ----------
    mode : {"wnorm", "wnorm-over-gamma", "golub-greiff", "explicit"}
        wnorm: ||W||_1.  wnorm-over-gamma: ||W||_1 / gamma.  golub-greiff:
        gamma ||W||_1 / ||A||_1^2 (requires ``a``).  explicit: return
        ``value`` unchanged.
    """
    if mode == "explicit":
        if value is None or not value > 0.0:
            raise NonpositiveEta(f"explicit eta must be positive, got {value}")
        return float(value)
    if mode in ("wnorm-over-gamma", "golub-greiff") and not gamma > 0.0:
        raise NonpositiveEta(f"mode {mode} requires gamma > 0, got {gamma}")
    wn = one_norm(w)
    if mode == "wnorm":
        eta = wn
    elif mode == "wnorm-over-gamma":
        eta = wn / gamma
    elif mode == "golub-greiff":
        if a is None:
            raise NonpositiveEta("golub-greiff mode requires the constraint matrix")
        an = one_norm(a)
        if an == 0.0:
            raise NonpositiveEta("golub-greiff mode needs a nonzero A")
        eta = gamma * wn / an**2
    else:
        raise ValueError(f"unknown eta mode {mode!r}")
    if not eta > 0.0:
        raise NonpositiveEta(f"recommended eta = {eta} is not positive")
    return float(eta)


def regularize(sys: SaddleSystem, eta, gamma=1.0) -> RegularizedSystem:
    """Perform the augmented-Lagrangian transform and factor M.

    With eta = 0 the leading block is W itself and must be positive
    definite; NotPositiveDefinite propagates from the factorization either
    way when the kernel assumption is violated.
    """
    eta = float(eta)
    if eta < 0.0:
        raise NonpositiveEta(f"eta must be nonnegative, got {eta}")
    if eta > 0.0:
        m_mat = add_scaled_aat(sys.w, sys.a, eta)
        rhs = sys.g + eta * sys.a.matvec(sys.r)
    else:
        m_mat = sys.w
        rhs = sys.g
    factor = spd_factor(m_mat)
    shift = factor.solve(rhs)
    b = sys.r - sys.a.rmatvec(shift)
    return RegularizedSystem(
        m_mat=m_mat,
        m_factor=factor,
        a=sys.a,
        eta=eta,
        b=b,
        gamma=float(gamma),
        shift=shift,
        system=sys,
    )


def recover_displacement(reg: RegularizedSystem, u):
    """Map the regularized iterate back to the displacement: w = u + s."""
    u = as_vector(u, reg.m_mat.n, "u")
    return u + reg.shift


@dataclass
class DoubleLagrangeSystem:
    """The 3x3-block duplicated-multiplier matrix

        K = [ W     gA    gA  ]
            [ gA'  -gI    gI  ]
            [ gA'   gI   -gI  ]

    with g = gamma, as produced by industrial FEM exports.
    """

    k: SparseSymMatrix
    gamma: float
    m: int
    n: int


def build_double_lagrange(w: SparseSymMatrix, a: SparseMatrix, gamma):
    """Assemble the double-Lagrange matrix from (W, A, gamma)."""
    gamma = float(gamma)
    if gamma <= 0.0:
        raise NonpositiveEta(f"gamma must be positive, got {gamma}")
    m, n = a.nrows, a.ncols
    wr, wc, wv = w.triplets()
    ar, ac, av = a.triplets()
    sav = gamma * av
    idx = np.arange(n)
    rows = [wr, ar, ar, m + ac, m + n + ac, m + idx, m + n + idx,
            m + idx, m + n + idx]
    cols = [wc, m + ac, m + n + ac, ar, ar, m + idx, m + n + idx,
            m + n + idx, m + idx]
    vals = [wv, sav, sav, sav, sav,
            np.full(n, -gamma), np.full(n, -gamma),
            np.full(n, gamma), np.full(n, gamma)]
    big = SparseMatrix.from_coo(
        m + 2 * n, m + 2 * n,
        np.concatenate(rows), np.concatenate(cols), np.concatenate(vals),
        drop_zeros=False,
    )
    return DoubleLagrangeSystem(SparseSymMatrix(big), gamma, m, n)


def _check_scaled_identity(block: SparseMatrix, scale, base_row, base_col, what):
    """Every stored entry must be exactly ``scale`` on the diagonal and the
    diagonal must be fully populated."""
    r, c, v = block.triplets()
    off = r != c
    if off.any():
        i = int(np.flatnonzero(off)[0])
        raise PatternMismatch(
            base_row + r[i], base_col + c[i],
            f"{what} block must be diagonal"
        )
    if len(v) != block.nrows or not np.all(v == scale):
        seen = np.zeros(block.nrows, dtype=bool)
        seen[r[v == scale]] = True
        bad = int(np.flatnonzero(~seen)[0]) if not seen.all() else int(r[0])
        raise PatternMismatch(
            base_row + bad, base_col + bad,
            f"{what} block must equal {scale:+.6g} times the identity"
        )


def extract_double_lagrange(k, m=None, n=None, gamma=None):
    """Recover (W, A, gamma) from a double-Lagrange matrix.

    Parameters
    ----------
    k : SparseSymMatrix or DoubleLagrangeSystem
    m, n : int, optional
        Leading block size and constraint count.  Required when `k` is
        a bare matrix; read off the system object otherwise.
    gamma : float, optional
        When omitted it is read off the first diagonal entry of the
        multiplier block.

    Returns
    -------
    (SparseSystem-ready triple) W : SparseSymMatrix, A : SparseMatrix,
    gamma : float.  The gamma scaling of A is divided out.

    Raises
    ------
    PatternMismatch
        Any deviation from the expected block structure, reporting the
        first offending entry's coordinates in K.
    """
    if isinstance(k, DoubleLagrangeSystem):
        if gamma is None:
            gamma = k.gamma
        m, n = k.m, k.n
        k = k.k
    elif m is None or n is None:
        raise DimensionMismatch(
            "block sizes m, n are required when extracting from a bare matrix"
        )
    mat = k.mat
    if mat.nrows != m + 2 * n:
        raise DimensionMismatch(
            f"K has dimension {mat.nrows}, expected m + 2n = {m + 2 * n}"
        )
    if gamma is None:
        d = k.diagonal()
        gamma = -float(d[m])
    if not gamma > 0.0:
        raise PatternMismatch(m, m, f"multiplier diagonal gives gamma = {-gamma}")
    _check_scaled_identity(mat.submatrix(m, m + n, m, m + n), -gamma,
                           m, m, "(2,2)")
    _check_scaled_identity(
        mat.submatrix(m + n, m + 2 * n, m + n, m + 2 * n), -gamma,
        m + n, m + n, "(3,3)")
    _check_scaled_identity(mat.submatrix(m, m + n, m + n, m + 2 * n), gamma,
                           m, m + n, "(2,3)")
    b12 = mat.submatrix(0, m, m, m + n)
    b13 = mat.submatrix(0, m, m + n, m + 2 * n)
    if (
        not np.array_equal(b12.indptr, b13.indptr)
        or not np.array_equal(b12.indices, b13.indices)
        or not np.array_equal(b12.data, b13.data)
    ):
        # locate the first row where the two multiplier couplings differ
        for i in range(m):
            s12 = slice(int(b12.indptr[i]), int(b12.indptr[i + 1]))
            s13 = slice(int(b13.indptr[i]), int(b13.indptr[i + 1]))
            if (
                not np.array_equal(b12.indices[s12], b13.indices[s13])
                or not np.array_equal(b12.data[s12], b13.data[s13])
            ):
                cols = np.concatenate([b12.indices[s12], b13.indices[s13]])
                raise PatternMismatch(
                    i, m + int(cols[0]),
                    "(1,2) and (1,3) coupling blocks differ",
                )
    w = SparseSymMatrix(mat.submatrix(0, m, 0, m))
    a = SparseMatrix(m, n, b12.indptr, b12.indices, b12.data / gamma)
    return w, a, float(gamma)
