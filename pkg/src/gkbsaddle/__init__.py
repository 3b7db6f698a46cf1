"""Sparse saddle-point solver via generalized Golub-Kahan
bidiagonalization (Craig variant) with augmented-Lagrangian
regularization, delay-window and Gauss-Radau stopping criteria, plus
deterministic problem generators and dense desk-scale oracles.
"""
from ._accel import backend
from .sparse import (
    SparseMatrix,
    SparseSymMatrix,
    as_vector,
    one_norm,
    weighted_norm,
    add_scaled_aat,
)
from .cholesky import SpdFactor, spd_factor, spd_solve
from .saddle import (
    SaddleSystem,
    RegularizedSystem,
    DoubleLagrangeSystem,
    compute_gamma,
    recommend_eta,
    regularize,
    recover_displacement,
    build_double_lagrange,
    extract_double_lagrange,
)
from .gkb import (
    GkbConfig,
    GkbState,
    HistoryRow,
    ConvergenceHistory,
    SolveResult,
    gkb_init,
    gkb_step,
    check_lower_bound,
    check_upper_bound,
    residual_dual_norm,
    solve,
)
from .oracle import (
    EllipticSpectrum,
    SpectralReport,
    direct_saddle_solve,
    elliptic_svd,
    lambda_min_schur,
    verify_theorem,
)
from .generators import (
    ProblemSpec,
    gen_constrained_grid,
    gen_semidefinite_coupled,
    gen_random,
    generate,
)
from .fileio import (
    RunConfig,
    read_matrix_market,
    write_matrix_market,
    load_run_config,
    save_run_config,
    write_history,
    read_history,
)
from . import errors

__version__ = "0.1.0"

__all__ = [
    "backend",
    "SparseMatrix", "SparseSymMatrix", "as_vector", "one_norm",
    "weighted_norm", "add_scaled_aat",
    "SpdFactor", "spd_factor", "spd_solve",
    "SaddleSystem", "RegularizedSystem", "DoubleLagrangeSystem",
    "compute_gamma", "recommend_eta", "regularize", "recover_displacement",
    "build_double_lagrange", "extract_double_lagrange",
    "GkbConfig", "GkbState", "HistoryRow", "ConvergenceHistory",
    "SolveResult", "gkb_init", "gkb_step", "check_lower_bound",
    "check_upper_bound", "residual_dual_norm", "solve",
    "EllipticSpectrum", "SpectralReport", "direct_saddle_solve",
    "elliptic_svd", "lambda_min_schur", "verify_theorem",
    "ProblemSpec", "gen_constrained_grid", "gen_semidefinite_coupled",
    "gen_random", "generate",
    "RunConfig", "read_matrix_market", "write_matrix_market",
    "load_run_config", "save_run_config", "write_history", "read_history",
    "errors",
    "__version__",
]
