"""Dense brute-force reference computations for desk-scale instances.

Everything here forms explicit dense matrices and leans on numpy.linalg
(eigh / svd / LU): direct saddle solves, elliptic singular values of
A_tilde = M^{-1/2} A N^{-1/2}, the smallest eigenvalue of A' W^{-1} A,
and verification of the augmented-Lagrangian conditioning guarantee
(eta >= 1/lambda_1 implies kappa^2(A_tilde) <= 2).  Ops refuse inputs
beyond a size threshold rather than silently approximating.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    NonpositiveEta,
    NotPositiveDefinite,
    SingularSystem,
    TooLargeForDense,
)
from .saddle import SaddleSystem
from .sparse import SparseMatrix, SparseSymMatrix

__all__ = [
    "DENSE_THRESHOLD",
    "EllipticSpectrum",
    "SpectralReport",
    "saddle_matrix",
    "direct_saddle_solve",
    "elliptic_svd",
    "lambda_min_schur",
    "verify_theorem",
]

DENSE_THRESHOLD = 2000

# Slack on the kappa^2 <= 2 comparison (floating-point headroom only).
THEOREM_RTOL = 1e-8


def _check_size(size, threshold, what):
    if size > threshold:
        raise TooLargeForDense(
            f"{what}: size {size} exceeds dense threshold {threshold}"
        )


def _spd_inverse_root(mat: SparseSymMatrix, what):
    """(eigenvalues, eigenvectors, M^{-1/2}) of an SPD matrix, densely."""
    dense = mat.to_dense()
    evals, evecs = np.linalg.eigh(dense)
    if not evals[0] > 0.0:
        raise NotPositiveDefinite(int(np.argmin(evals)), float(evals[0]))
    inv_root = (evecs / np.sqrt(evals)) @ evecs.T
    return evals, evecs, inv_root


@dataclass
class EllipticSpectrum:
    """Singular values of A_tilde = M^{-1/2} A N^{-1/2}, descending.

    ``mus`` are the squared singular values (the eigenvalues of
    N^{-1/2} A' M^{-1} A N^{-1/2}); ``kappa`` = sigma_1 / sigma_n.
    """

    sigmas: np.ndarray
    mus: np.ndarray
    kappa: float


@dataclass
class SpectralReport:
    """Side-by-side spectral data for the conditioning guarantee.

    ``lambdas`` are the eigenvalues of A' W^{-1} A ascending;
    ``mu_predicted`` is eta*lambda_i / (1 + eta*lambda_i) (ascending) and
    ``mu_measured`` the squared elliptic singular values with
    M = W + eta A A' (sorted ascending) -- keeping both localizes a
    failure to the rational-transform step vs. the SVD step.  ``bound``
    is (1 + eta*lambda_1) / (eta*lambda_1), an upper bound on kappa^2.
    ``applies`` records eta*lambda_1 >= 1; ``passed`` is
    kappa2 <= 2 (+ slack) when the guarantee applies, else None.
    """

    lambdas: np.ndarray
    eta: float
    mu_predicted: np.ndarray
    mu_measured: np.ndarray
    bound: float
    kappa2: float
    applies: bool
    passed: bool | None


def saddle_matrix(sys: SaddleSystem) -> np.ndarray:
    """Dense (m+n) x (m+n) block matrix [[W, A], [A', 0]]."""
    m, n = sys.m, sys.n
    k = np.zeros((m + n, m + n))
    k[:m, :m] = sys.w.to_dense()
    a = sys.a.to_dense()
    k[:m, m:] = a
    k[m:, :m] = a.T
    return k


def direct_saddle_solve(sys: SaddleSystem, threshold=DENSE_THRESHOLD):
    """Reference solution (w, p) of the saddle system by dense LU.

    One step of iterative refinement is applied; a relative residual
    above 1e-10 afterwards means the system is (numerically) singular.

    Returns
    -------
    (w, p) : pair of ndarray

    Raises
    ------
    TooLargeForDense, SingularSystem
    """
    m, n = sys.m, sys.n
    _check_size(m + n, threshold, "direct_saddle_solve")
    k = saddle_matrix(sys)
    rhs = np.concatenate([sys.g, sys.r])
    try:
        with warnings.catch_warnings():
            # an exact zero pivot surfaces as a warning plus nans; the
            # residual check below turns that into SingularSystem
            warnings.simplefilter("ignore")
            lu, piv = scipy.linalg.lu_factor(k)
            z = scipy.linalg.lu_solve((lu, piv), rhs)
            z += scipy.linalg.lu_solve((lu, piv), rhs - k @ z)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise SingularSystem(f"dense factorization failed: {exc}") from exc
    scale = max(float(np.linalg.norm(rhs)), 1.0)
    resid = float(np.linalg.norm(rhs - k @ z)) / scale
    if not np.isfinite(resid) or resid > 1e-10:
        raise SingularSystem(
            f"saddle system numerically singular: relative residual "
            f"{resid:.3g} after refinement"
        )
    return z[:m], z[m:]


def elliptic_svd(m_mat: SparseSymMatrix, a: SparseMatrix, eta,
                 threshold=DENSE_THRESHOLD) -> EllipticSpectrum:
    """Singular values of M^{-1/2} A N^{-1/2} with N = (1/eta) I.

    ``eta = 0`` means N = I (no constraint-block scaling).  M^{-1/2}
    comes from a full symmetric eigendecomposition.

    Raises
    ------
    TooLargeForDense, NotPositiveDefinite
    """
    _check_size(m_mat.n + a.ncols, threshold, "elliptic_svd")
    _, _, m_inv_root = _spd_inverse_root(m_mat, "elliptic_svd")
    scale = np.sqrt(eta) if eta > 0.0 else 1.0
    a_tilde = scale * (m_inv_root @ a.to_dense())
    sigmas = np.linalg.svd(a_tilde, compute_uv=False)
    small = sigmas[-1] if sigmas.size else 0.0
    kappa = float(sigmas[0] / small) if small > 0.0 else np.inf
    return EllipticSpectrum(sigmas=sigmas, mus=sigmas**2, kappa=kappa)


def _schur_eigenvalues(w: SparseSymMatrix, a: SparseMatrix, threshold, what):
    """Eigenvalues of A' W^{-1} A, ascending (dense symmetric solve)."""
    _check_size(w.n + a.ncols, threshold, what)
    evals, evecs, _ = _spd_inverse_root(w, what)
    a_dense = a.to_dense()
    w_inv_a = (evecs / evals) @ (evecs.T @ a_dense)
    schur = a_dense.T @ w_inv_a
    return np.linalg.eigvalsh(0.5 * (schur + schur.T))


def lambda_min_schur(w: SparseSymMatrix, a: SparseMatrix,
                     threshold=DENSE_THRESHOLD) -> float:
    """Smallest eigenvalue of A' W^{-1} A (W must be positive definite).

    Raises
    ------
    TooLargeForDense, NotPositiveDefinite
    """
    return float(_schur_eigenvalues(w, a, threshold, "lambda_min_schur")[0])


def verify_theorem(w: SparseSymMatrix, a: SparseMatrix, eta,
                   threshold=DENSE_THRESHOLD) -> SpectralReport:
    """Check the conditioning guarantee of the eta-regularization.

    Computes lambda_i of A' W^{-1} A, the predicted elliptic eigenvalues
    mu_i = eta*lambda_i / (1 + eta*lambda_i), the measured ones from an
    independent SVD with M = W + eta A A', and the bound
    (1 + eta*lambda_1)/(eta*lambda_1) on kappa^2(A_tilde).  When
    eta*lambda_1 >= 1 the guarantee kappa^2 <= 2 applies and ``passed``
    reports it (with 1e-8 slack); otherwise ``passed`` is None.

    Raises
    ------
    NonpositiveEta, TooLargeForDense, NotPositiveDefinite
    """
    eta = float(eta)
    if not eta > 0.0:
        raise NonpositiveEta(
            f"conditioning guarantee needs eta > 0, got {eta}"
        )
    from .saddle import add_scaled_aat

    lambdas = _schur_eigenvalues(w, a, threshold, "verify_theorem")
    mu_predicted = eta * lambdas / (1.0 + eta * lambdas)
    m_mat = add_scaled_aat(w, a, eta)
    spectrum = elliptic_svd(m_mat, a, eta, threshold=threshold)
    mu_measured = np.sort(spectrum.mus)
    kappa2 = spectrum.kappa**2
    lam1 = float(lambdas[0])
    bound = (1.0 + eta * lam1) / (eta * lam1)
    applies = eta * lam1 >= 1.0
    passed = bool(kappa2 <= 2.0 + THEOREM_RTOL) if applies else None
    return SpectralReport(
        lambdas=lambdas, eta=eta, mu_predicted=mu_predicted,
        mu_measured=mu_measured, bound=bound, kappa2=kappa2,
        applies=applies, passed=passed,
    )
