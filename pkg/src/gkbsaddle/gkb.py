"""Craig-variant generalized Golub-Kahan bidiagonalization.

Iterates on the regularized system

    [ M   A ] [ u ]   [ 0 ]
    [ A'  0 ] [ p ] = [ b ],      N = (1/npar) I,

building M-orthonormal v_k and N-orthonormal q_k bases with the coupled
two-term recurrences, and updating

    u[k+1] = u[k] + zeta[k+1] v[k+1],   p[k+1] = p[k] - zeta[k+1] d[k+1],
    zeta[k+1] = -(beta[k+1] / alpha[k+1]) zeta[k].

The M-norm error of u[k] equals sqrt(sum_{j>k} zeta_j^2), which yields the
delay-window lower bound (``check_lower_bound``) and, with a prescribed
lower bound ``a`` on the smallest elliptic singular value, the Gauss-Radau
upper bound (``check_upper_bound``).  Stopping decisions use the lower
bound unless configured otherwise.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BreakdownAlpha,
    BreakdownBeta,
    InvalidSingularValueBound,
    ZeroRhs,
)
from .saddle import RegularizedSystem
from .sparse import as_vector

__all__ = [
    "GkbConfig",
    "GkbState",
    "HistoryRow",
    "ConvergenceHistory",
    "SolveResult",
    "gkb_init",
    "gkb_step",
    "check_lower_bound",
    "check_upper_bound",
    "residual_dual_norm",
    "solve",
]

# Breakdown threshold scale: alpha or beta at or below
# BREAKDOWN_RTOL * (beta1 + 1) triggers breakdown handling.
BREAKDOWN_RTOL = 1e-13


@dataclass
class GkbConfig:
    """Iteration parameters.

    ``bound_mode`` selects which error bounds are computed: "lower" /
    "upper" / "both".  Stopping tests xi <= tau for "lower" and "both"
    (the upper bound is recorded but the standard criterion stops the
    run), and Xi <= tau for "upper".  ``a`` is the prescribed lower bound
    on sigma_n, required whenever the upper bound is computed.
    """

    tau: float = 1e-5
    delay: int = 5
    maxit: int = 1000
    bound_mode: str = "lower"
    a: float | None = None
    capture_true_error: bool = False
    reorthogonalize: bool = False
    keep_basis: bool = False

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise ValueError(f"tau must lie in (0, 1), got {self.tau}")
        if self.delay < 1:
            raise ValueError(f"delay must be >= 1, got {self.delay}")
        if self.maxit < 1:
            raise ValueError(f"maxit must be >= 1, got {self.maxit}")
        if self.bound_mode not in ("lower", "upper", "both"):
            raise ValueError(f"unknown bound_mode {self.bound_mode!r}")
        if self.bound_mode in ("upper", "both"):
            if self.a is None or not self.a > 0.0:
                raise ValueError(
                    "bound_mode {!r} requires a > 0".format(self.bound_mode)
                )


class _RadauRecursion:
    """Pivot recursion of the Gauss-Radau bound with one eigenvalue of the
    tridiagonal matrix pinned at a^2.

    Advancing past counter k appends dbar_k and varpi_k; phi_k is computed
    from the shifted pivot.  A nonpositive pivot or radicand raises
    InvalidSingularValueBound for that counter (the pivot sequence keeps
    advancing afterwards when only the radicand failed).
    """

    def __init__(self, a):
        self.a2 = float(a) ** 2
        self.dbars = []
        self.varpis = []
        self.phis = []  # None where the radicand failed
        self.broken = False

    def advance_to(self, k, alphas, betas, zetas):
        failed = None
        while len(self.dbars) < k:
            kk = len(self.dbars) + 1
            if self.broken:
                self.dbars.append(np.nan)
                self.varpis.append(np.nan)
                self.phis.append(None)
                continue
            al2 = alphas[kk - 1] ** 2
            be2 = betas[kk - 1] ** 2
            prev = self.a2 if kk == 1 else self.varpis[-1]
            dbar = al2 + be2 - prev
            if not dbar > 0.0:
                self.broken = True
                self.dbars.append(dbar)
                self.varpis.append(np.nan)
                self.phis.append(None)
                if failed is None:
                    failed = InvalidSingularValueBound(kk, dbar, what="pivot")
                continue
            self.dbars.append(dbar)
            self.varpis.append(self.a2 + al2 * be2 / dbar)
            rad = dbar + self.a2 - be2
            if rad > 0.0:
                self.phis.append(be2 * zetas[kk - 1] ** 2 / np.sqrt(rad))
            else:
                self.phis.append(None)
                if failed is None:
                    failed = InvalidSingularValueBound(kk, rad)
        if failed is not None:
            raise failed


class GkbState:
    """Full iteration state: current vectors, iterates, scalar histories,
    and (lazily) the Gauss-Radau accumulators.

    Histories are 1-based conceptually: ``alphas[j-1]`` is alpha_j,
    ``betas[0]`` is beta_1, ``zetas[j-1]`` is zeta_j.
    """

    def __init__(self, reg: RegularizedSystem, cfg: GkbConfig):
        self.reg = reg
        self.cfg = cfg
        self.npar = reg.npar
        self.broken = False
        self.break_beta = None
        self.radau = None

        a_mat = reg.a
        b = reg.b
        beta1 = np.sqrt(self.npar) * float(np.linalg.norm(b))
        self.beta1 = beta1
        self.threshold = BREAKDOWN_RTOL * (beta1 + 1.0)
        if beta1 <= self.threshold:
            raise ZeroRhs(
                f"transformed rhs has norm {beta1:.3g}; shift already solves "
                "the constraints"
            )
        q = (self.npar / beta1) * b
        t = a_mat.matvec(q)
        w = reg.m_factor.solve(t)
        alpha1 = np.sqrt(max(float(w @ t), 0.0))
        if not np.isfinite(alpha1) or alpha1 <= self.threshold:
            raise BreakdownAlpha(1, alpha1)
        self.v = w / alpha1
        self.mv = t / alpha1
        self.q = q
        zeta1 = beta1 / alpha1
        self.dvec = q / alpha1
        self.u = zeta1 * self.v
        self.p = -zeta1 * self.dvec
        self.k = 1
        self.alphas = [alpha1]
        self.betas = [beta1]
        self.zetas = [zeta1]
        retain = cfg.reorthogonalize or cfg.keep_basis
        self.Vs = [self.v.copy()] if retain else None
        self.Qs = [self.q.copy()] if retain else None
        self.MVs = [self.mv.copy()] if retain else None

    def basis(self):
        """(V_k, Q_k) as dense column-matrices; requires basis retention."""
        if self.Vs is None:
            raise ValueError("basis not retained; set keep_basis")
        return np.column_stack(self.Vs), np.column_stack(self.Qs)


def gkb_init(reg: RegularizedSystem, cfg: GkbConfig | None = None) -> GkbState:
    """First half-step: beta_1, q_1, alpha_1, v_1, and the iterate u^(1).

    Raises
    ------
    ZeroRhs
        b = 0; the caller should return the zero solution as converged.
    BreakdownAlpha
        alpha_1 at the breakdown threshold: A is numerically rank
        deficient.
    """
    return GkbState(reg, cfg if cfg is not None else GkbConfig())


def gkb_step(state: GkbState) -> GkbState:
    """Advance the bidiagonalization by one coupled step (in place).

    Raises
    ------
    BreakdownBeta
        Lucky breakdown: the current iterate is the exact solution.
    BreakdownAlpha
        Rank-deficiency breakdown; iteration cannot continue.
    """
    if state.broken:
        raise ValueError("cannot step a broken-down state")
    reg = state.reg
    npar = state.npar
    a_mat = reg.a

    # beta_{k+1} and q_{k+1}:  g = N^{-1}(A'v_k - alpha_k N q_k)
    s = a_mat.rmatvec(state.v) - (state.alphas[-1] / npar) * state.q
    beta = np.sqrt(npar) * float(np.linalg.norm(s))
    if not np.isfinite(beta) or beta <= state.threshold:
        state.broken = True
        state.break_beta = beta
        raise BreakdownBeta(state.k + 1, beta)
    qn = (npar / beta) * s
    if state.cfg.reorthogonalize:
        for qj in state.Qs:
            qn -= (float(qj @ qn) / npar) * qj
        qn /= np.sqrt(float(qn @ qn) / npar)

    # alpha_{k+1} and v_{k+1}:  w = M^{-1}(A q_{k+1} - beta_{k+1} M v_k)
    t = a_mat.matvec(qn) - beta * state.mv
    w = reg.m_factor.solve(t)
    alpha = np.sqrt(max(float(w @ t), 0.0))
    if not np.isfinite(alpha) or alpha <= state.threshold:
        state.broken = True
        raise BreakdownAlpha(state.k + 1, alpha)
    vn = w / alpha
    mvn = t / alpha
    if state.cfg.reorthogonalize:
        for vj, mvj in zip(state.Vs, state.MVs):
            c = float(mvj @ vn)
            vn -= c * vj
            mvn -= c * mvj
        nrm = np.sqrt(float(vn @ mvn))
        vn /= nrm
        mvn /= nrm

    zeta = -(beta / alpha) * state.zetas[-1]
    state.dvec = (qn - beta * state.dvec) / alpha
    state.u = state.u + zeta * vn
    state.p = state.p - zeta * state.dvec
    state.v, state.mv, state.q = vn, mvn, qn
    state.alphas.append(alpha)
    state.betas.append(beta)
    state.zetas.append(zeta)
    state.k += 1
    if state.Vs is not None:
        state.Vs.append(vn.copy())
        state.Qs.append(qn.copy())
        state.MVs.append(mvn.copy())
    return state


def check_lower_bound(zetas, k, d, tau):
    """Delay-window lower bound on the M-norm error of iterate k - d.

    Parameters
    ----------
    zetas : sequence
        zeta history, ``zetas[j-1]`` holding zeta_j.
    k : int
        Current counter; must satisfy k >= 1.
    d : int
        Delay window length.
    tau : float
        Convergence threshold on xi.

    Returns
    -------
    (converged, xi) with xi = sqrt(sum_{j=k-d+1}^{k} zeta_j^2), or
    (False, None) while k <= d.
    """
    if k <= d:
        return False, None
    window = np.asarray(zetas[k - d:k])
    xi = float(np.sqrt(np.sum(window * window)))
    return xi <= tau, xi


def check_upper_bound(state: GkbState, k=None, d=None, tau=None, a=None):
    """Gauss-Radau upper bound on the M-norm error of iterate k - d.

    Maintains the pivot recursion

        dbar_1 = alpha_1^2 + beta_1^2 - a^2,
        dbar_k = alpha_k^2 + beta_k^2 - varpi_{k-1},
        varpi_k = a^2 + alpha_k^2 beta_k^2 / dbar_k,
        phi_k = beta_k^2 zeta_k^2 / sqrt(dbar_k + a^2 - beta_k^2),

    and for k > d returns Xi with Xi^2 = xi^2 + phi_k.

    Returns
    -------
    (converged, Xi), or (False, None) while k <= d.

    Raises
    ------
    InvalidSingularValueBound
        The shifted pivot under the square root (or the pivot itself)
        went nonpositive at some counter: ``a`` is not usable as a
        singular-value lower bound at that step.  The recursion state
        stays consistent, so later counters may still be queried.
    """
    cfg = state.cfg
    k = state.k if k is None else k
    d = cfg.delay if d is None else d
    tau = cfg.tau if tau is None else tau
    a = cfg.a if a is None else a
    if a is None or not a > 0.0:
        raise ValueError("upper bound requires a > 0")
    if state.radau is None:
        state.radau = _RadauRecursion(a)
    elif state.radau.a2 != float(a) ** 2:
        raise ValueError("upper bound queried with a different a")
    state.radau.advance_to(k, state.alphas, state.betas, state.zetas)
    if k <= d:
        return False, None
    phi = state.radau.phis[k - 1]
    if phi is None:
        return False, None
    _, xi = check_lower_bound(state.zetas, k, d, tau)
    Xi = float(np.sqrt(xi * xi + phi))
    return Xi <= tau, Xi


def residual_dual_norm(state: GkbState):
    """|beta_{k+1} zeta_k|: the dual-norm constraint residual of the
    iterate *preceding* the current counter.

    Equals ||A'u^(k) - b||_{N^{-1}} in exact arithmetic.  Requires
    beta_{k+1}, i.e. either one completed step beyond iterate k or a
    beta-breakdown (whose tiny beta -- exactly zero in the clean case --
    is used for the final iterate).
    """
    if state.break_beta is not None:
        return abs(state.break_beta * state.zetas[-1])
    if len(state.betas) < 2:
        raise ValueError("beta_{k+1} not yet available")
    return abs(state.betas[-1] * state.zetas[-2])


@dataclass
class HistoryRow:
    """One iteration record; fields are None where not (yet) available."""

    k: int
    zeta: float
    xi: float | None = None
    Xi: float | None = None
    residual_proxy: float | None = None
    true_error: float | None = None
    ms: float = 0.0


@dataclass
class ConvergenceHistory:
    """Per-iteration records plus the stopping bookkeeping.

    ``stop_k`` is the final counter.  ``first_pass_k`` is the earliest
    counter whose window bound satisfied xi <= tau; the step it certifies
    is ``certified_k = first_pass_k - delay`` (the stop happens ``delay``
    iterations after the error criterion is met).  ``radau_failed_steps``
    lists counters where the Gauss-Radau radicand went nonpositive.
    """

    rows: list = field(default_factory=list)
    stop_k: int = 0
    first_pass_k: int | None = None
    certified_k: int | None = None
    radau_failed_steps: list = field(default_factory=list)

    def column(self, name):
        return [getattr(r, name) for r in self.rows]


@dataclass
class SolveResult:
    u: np.ndarray
    p: np.ndarray
    status: str
    iterations: int
    history: ConvergenceHistory
    detail: str = ""
    state: GkbState | None = field(default=None, repr=False)


def solve(reg: RegularizedSystem, cfg: GkbConfig | None = None,
          u_true=None) -> SolveResult:
    """Run the bidiagonalization until a bound passes, breakdown, or maxit.

    Parameters
    ----------
    u_true : array_like, optional
        Oracle solution in the regularized variables; enables the
        ``true_error`` history column (required when
        ``cfg.capture_true_error`` is set).

    Returns
    -------
    SolveResult
        Status is one of "Converged", "LuckyBreakdown", "MaxitReached",
        "Breakdown".  Breakdowns surface as statuses, never exceptions.
    """
    cfg = cfg if cfg is not None else GkbConfig()
    if cfg.capture_true_error and u_true is None:
        raise ValueError("capture_true_error requires u_true")
    if u_true is not None:
        u_true = as_vector(u_true, reg.m_mat.n, "u_true")
    m_dim = reg.m_mat.n
    n_dim = reg.a.ncols
    hist = ConvergenceHistory()

    def m_err(u):
        if u_true is None:
            return None
        e = u_true - u
        return float(np.sqrt(max(float(e @ reg.m_mat.matvec(e)), 0.0)))

    t0 = time.perf_counter()
    try:
        state = gkb_init(reg, cfg)
    except ZeroRhs as exc:
        return SolveResult(
            u=np.zeros(m_dim), p=np.zeros(n_dim), status="Converged",
            iterations=0, history=hist, detail=str(exc),
        )
    except BreakdownAlpha as exc:
        return SolveResult(
            u=np.zeros(m_dim), p=np.zeros(n_dim), status="Breakdown",
            iterations=0, history=hist, detail=str(exc),
        )
    hist.rows.append(HistoryRow(
        k=1, zeta=state.zetas[0], true_error=m_err(state.u),
        ms=(time.perf_counter() - t0) * 1e3,
    ))

    want_lower = cfg.bound_mode in ("lower", "both")
    want_upper = cfg.bound_mode in ("upper", "both")
    status = "MaxitReached"
    detail = ""
    while state.k < cfg.maxit:
        t0 = time.perf_counter()
        try:
            gkb_step(state)
        except BreakdownBeta as exc:
            # exact solution reached: beta_{k+1} is (numerically) zero
            hist.rows[-1].residual_proxy = residual_dual_norm(state)
            status = "LuckyBreakdown"
            detail = str(exc)
            break
        except BreakdownAlpha as exc:
            status = "Breakdown"
            detail = str(exc)
            break
        hist.rows[-1].residual_proxy = abs(state.betas[-1] * state.zetas[-2])
        row = HistoryRow(
            k=state.k, zeta=state.zetas[-1], true_error=m_err(state.u),
            ms=(time.perf_counter() - t0) * 1e3,
        )
        hist.rows.append(row)
        stop = False
        lower_ok, row.xi = check_lower_bound(
            state.zetas, state.k, cfg.delay, cfg.tau
        )
        if lower_ok and hist.first_pass_k is None:
            hist.first_pass_k = state.k
            hist.certified_k = state.k - cfg.delay
        if want_lower and lower_ok:
            stop = True
        if want_upper:
            try:
                upper_ok, row.Xi = check_upper_bound(state, a=cfg.a)
            except InvalidSingularValueBound as exc:
                hist.radau_failed_steps.append(exc.k)
            else:
                if cfg.bound_mode == "upper" and upper_ok:
                    stop = True
        if stop:
            status = "Converged"
            break
    hist.stop_k = state.k
    return SolveResult(
        u=state.u.copy(), p=state.p.copy(), status=status,
        iterations=state.k, history=hist, detail=detail, state=state,
    )
