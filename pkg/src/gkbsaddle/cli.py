"""Command-line interface.

Subcommands wire the generators, the augmented-Lagrangian transform, the
bidiagonalization solver, the dense oracle, and the file formats into
complete workflows:

* ``solve`` -- one system from files or a generated problem.
* ``generate`` -- materialize a generated problem as Matrix Market files.
* ``eta-sweep`` -- iteration counts and reference errors across eta values.
* ``mesh-study`` -- iteration counts across grid refinements.
* ``verify-theorem`` -- conditioning guarantee check for eta = c / lambda_1.
* ``extract-dl`` -- recover (W, A, gamma) from a double-Lagrange matrix.

Exit codes: 0 success, 1 error, 2 non-convergence.  The default output
directory is the GKBSADDLE_OUT_DIR environment variable, falling back to
the current directory.
"""
from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields as dc_fields

import numpy as np

from . import fileio, generators, oracle
from .errors import GkbSaddleError, InvalidSpec
from .gkb import GkbConfig, solve as gkb_solve
from .saddle import (
    SaddleSystem,
    compute_gamma,
    extract_double_lagrange,
    recommend_eta,
    recover_displacement,
    regularize,
)
from .sparse import SparseSymMatrix, one_norm, weighted_norm

__all__ = ["main"]

OUT_DIR_ENV = "GKBSADDLE_OUT_DIR"

_FAMILY_ALIASES = {
    "grid": "constrained-grid",
    "semidef": "semidefinite-coupled",
}

_OK_STATUSES = ("Converged", "LuckyBreakdown")


class _Parser(argparse.ArgumentParser):
    """argparse reserves exit code 2 for usage errors; our contract uses
    2 for non-convergence, so usage errors exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _coerce(text):
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _parse_problem_spec(arg) -> generators.ProblemSpec:
    """--spec argument: a TOML file with a [problem] table, or an inline
    ``family=...,key=value`` string."""
    if os.path.exists(arg):
        doc = fileio.load_run_config(arg)
        if doc.problem is None:
            raise InvalidSpec(f"{arg} has no [problem] table")
        return doc.problem
    kw = {}
    for item in arg.split(","):
        if "=" not in item:
            raise InvalidSpec(
                f"bad spec fragment {item!r} (want key=value)"
            )
        key, _, val = item.partition("=")
        kw[key.strip()] = _coerce(val.strip())
    if "family" not in kw:
        raise InvalidSpec("inline spec needs family=...")
    kw["family"] = _FAMILY_ALIASES.get(kw["family"], kw["family"])
    known = {f.name for f in dc_fields(generators.ProblemSpec)}
    unknown = set(kw) - known
    if unknown:
        raise InvalidSpec(f"unknown spec keys {sorted(unknown)}")
    return generators.ProblemSpec(**kw)


def _load_system(args) -> SaddleSystem:
    if args.spec is not None:
        if any(p is not None for p in (args.w, args.a, args.g, args.r)):
            raise InvalidSpec("give either --spec or --w/--a/--g/--r")
        return generators.generate(_parse_problem_spec(args.spec))
    missing = [
        flag for flag, val in
        (("--w", args.w), ("--a", args.a), ("--g", args.g), ("--r", args.r))
        if val is None
    ]
    if missing:
        raise InvalidSpec(
            "missing " + ", ".join(missing) + " (or use --spec)"
        )
    w = fileio.read_matrix_market(args.w)
    if not isinstance(w, SparseSymMatrix):
        raise InvalidSpec(
            f"{args.w}: W must be a coordinate symmetric matrix"
        )
    a = fileio.read_matrix_market(args.a)
    g = fileio.read_matrix_market(args.g)
    r = fileio.read_matrix_market(args.r)
    return SaddleSystem(w=w, a=a, g=g, r=r)


def _resolve_eta(token, sys_: SaddleSystem):
    """--eta: a number, or one of the derived modes."""
    try:
        return float(token)
    except ValueError:
        pass
    gamma = (
        compute_gamma(sys_.w)
        if token in ("wnorm-over-gamma", "golub-greiff") else 1.0
    )
    return recommend_eta(sys_.w, gamma=gamma, mode=token, a=sys_.a)


def _parse_eta_list(text, w):
    """Comma list of eta values; a 'w' suffix scales by ||W||_1."""
    w1 = one_norm(w)
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        scale = 1.0
        if tok.endswith("w"):
            tok, scale = tok[:-1], w1
        try:
            out.append(float(tok) * scale)
        except ValueError:
            raise InvalidSpec(f"bad eta value {tok!r}") from None
    return out


def _out_dir(args):
    path = args.out_dir or os.environ.get(OUT_DIR_ENV) or "."
    os.makedirs(path, exist_ok=True)
    return path


def _write_table(out_dir, name, fmt, header, rows):
    """Machine-readable companion to the printed table."""
    import csv
    import json

    path = os.path.join(out_dir, f"{name}.{fmt}")
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow(["" if v is None else v for v in row])
    else:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump([dict(zip(header, row)) for row in rows], fh, indent=1)
            fh.write("\n")
    return path


def _print_table(header, rows):
    cells = [header] + [
        ["-" if v is None else (f"{v:.3e}" if isinstance(v, float) else str(v))
         for v in row]
        for row in rows
    ]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    for r in cells:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)))


def _reference_solution(sys_: SaddleSystem):
    """Oracle (w, p) below the dense threshold, else a tight-tolerance
    bidiagonalization run; returns (w, p, source-label)."""
    if sys_.m + sys_.n <= oracle.DENSE_THRESHOLD:
        w, p = oracle.direct_saddle_solve(sys_)
        return w, p, "dense-oracle"
    eta = one_norm(sys_.w)
    reg = regularize(sys_, eta)
    res = gkb_solve(reg, GkbConfig(tau=1e-12, delay=5, maxit=2000,
                                   reorthogonalize=True))
    return recover_displacement(reg, res.u), res.p, "gkb-tight"


def _solve_one(sys_, eta, tau, delay, maxit, bound_mode="lower",
               sigma_lb=None):
    reg = regularize(sys_, eta)
    cfg = GkbConfig(tau=tau, delay=delay, maxit=maxit,
                    bound_mode=bound_mode, a=sigma_lb)
    return reg, gkb_solve(reg, cfg)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_solve(args):
    sys_ = _load_system(args)
    eta = _resolve_eta(args.eta, sys_)
    reg, res = _solve_one(sys_, eta, args.tau, args.delay, args.maxit,
                          args.bound, args.sigma_lb)
    w = recover_displacement(reg, res.u)
    out = _out_dir(args)
    fileio.write_matrix_market(w, os.path.join(out, "w.mtx"))
    fileio.write_matrix_market(res.p, os.path.join(out, "p.mtx"))
    hist_path = os.path.join(out, f"history.{args.format}")
    fileio.write_history(res.history, hist_path, args.format)
    last = res.history.rows[-1] if res.history.rows else None
    print(f"status: {res.status}")
    print(f"iterations: {res.iterations}")
    print(f"eta: {eta:.6e}")
    if last is not None:
        xi = "-" if last.xi is None else f"{last.xi:.6e}"
        print(f"final xi: {xi}")
        if args.bound in ("upper", "both"):
            Xi = "-" if last.Xi is None else f"{last.Xi:.6e}"
            print(f"final Xi: {Xi}")
    print(f"outputs: {out}/w.mtx {out}/p.mtx {hist_path}")
    if res.status in _OK_STATUSES:
        return 0
    if res.status == "MaxitReached":
        return 2
    print(f"error: {res.detail}", file=sys.stderr)
    return 1


def cmd_generate(args):
    spec = _parse_problem_spec(args.spec)
    sys_ = generators.generate(spec)
    out = _out_dir(args)
    fileio.write_matrix_market(sys_.w, os.path.join(out, "W.mtx"))
    fileio.write_matrix_market(sys_.a, os.path.join(out, "A.mtx"))
    fileio.write_matrix_market(sys_.g, os.path.join(out, "g.mtx"))
    fileio.write_matrix_market(sys_.r, os.path.join(out, "r.mtx"))
    cfg = fileio.RunConfig(problem=spec)
    fileio.save_run_config(cfg, os.path.join(out, "problem.toml"))
    print(f"family: {spec.family}")
    print(f"m: {sys_.m}")
    print(f"n: {sys_.n}")
    print(f"outputs: {out}/W.mtx A.mtx g.mtx r.mtx problem.toml")
    return 0


def cmd_eta_sweep(args):
    sys_ = _load_system(args)
    etas = _parse_eta_list(args.etas, sys_.w)
    if len(etas) < 2:
        raise InvalidSpec("eta-sweep needs at least two eta values")
    w_ref, p_ref, source = _reference_solution(sys_)

    def run(eta):
        reg, res = _solve_one(sys_, eta, args.tau, args.delay, args.maxit)
        u = recover_displacement(reg, res.u)
        u_ref = w_ref
        du = weighted_norm(u - u_ref, reg.m_mat)
        su = weighted_norm(u_ref, reg.m_mat)
        dp = float(np.linalg.norm(res.p - p_ref))
        sp = float(np.linalg.norm(p_ref))
        return (
            eta, res.iterations,
            du / su if su > 0 else du,
            dp / sp if sp > 0 else dp,
            res.status,
        )

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            rows = list(pool.map(run, etas))
    else:
        rows = [run(eta) for eta in etas]
    header = ("eta", "iterations", "rel_err_u_M", "rel_err_p_2", "status")
    print(f"reference: {source}")
    _print_table(header, rows)
    out = _out_dir(args)
    path = _write_table(out, "eta_sweep", args.format, header, rows)
    print(f"outputs: {path}")
    return 0 if all(r[4] in _OK_STATUSES for r in rows) else 2


def cmd_mesh_study(args):
    family = _FAMILY_ALIASES.get(args.family, args.family)
    grids = []
    for tok in args.grids.split(","):
        try:
            grids.append(int(tok))
        except ValueError:
            raise InvalidSpec(f"bad grid size {tok!r}") from None
    if len(grids) < 2:
        raise InvalidSpec("mesh-study needs at least two grid sizes")

    def run(ng):
        if family == "constrained-grid":
            sys_ = generators.gen_constrained_grid(ng)
        elif family == "semidefinite-coupled":
            sys_ = generators.gen_semidefinite_coupled(
                ng, args.n_slave, args.seed
            )
        else:
            raise InvalidSpec(f"mesh-study does not support {family!r}")
        eta = _resolve_eta(args.eta, sys_)
        reg, res = _solve_one(sys_, eta, args.tau, args.delay, args.maxit)
        err = None
        if sys_.m + sys_.n <= oracle.DENSE_THRESHOLD:
            w_ref, _, _ = _reference_solution(sys_)
            u_ref = w_ref - reg.shift
            num = weighted_norm(res.u - u_ref, reg.m_mat)
            den = weighted_norm(u_ref, reg.m_mat)
            err = num / den if den > 0 else num
        return (ng, sys_.m, sys_.n, res.iterations, err, res.status)

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            rows = list(pool.map(run, grids))
    else:
        rows = [run(ng) for ng in grids]
    header = ("grid", "m", "n", "iterations", "rel_err_u_M", "status")
    _print_table(header, rows)
    counts = [r[3] for r in rows if r[5] in _OK_STATUSES]
    spread = (max(counts) - min(counts)) if counts else None
    ok = len(counts) == len(rows) and spread is not None and spread <= 3
    print(f"iteration spread: {spread}")
    print(f"spread <= 3: {'yes' if ok else 'no'}")
    out = _out_dir(args)
    path = _write_table(out, "mesh_study", args.format, header, rows)
    print(f"outputs: {path}")
    return 0 if all(r[5] in _OK_STATUSES for r in rows) else 2


def cmd_verify_theorem(args):
    sys_ = _load_system(args)
    factors = []
    for tok in args.eta_factors.split(","):
        try:
            factors.append(float(tok))
        except ValueError:
            raise InvalidSpec(f"bad eta factor {tok!r}") from None
    if not factors:
        raise InvalidSpec("need at least one eta factor")
    lam1 = oracle.lambda_min_schur(sys_.w, sys_.a)
    print(f"lambda_1: {lam1:.6e}")
    rows = []
    all_ok = True
    for c in factors:
        rep = oracle.verify_theorem(sys_.w, sys_.a, c / lam1)
        verdict = None
        if rep.applies:
            verdict = "pass" if rep.passed else "FAIL"
            all_ok = all_ok and rep.passed
        rows.append(
            (c, rep.eta, c, rep.bound, rep.kappa2, verdict)
        )
    header = ("c", "eta", "eta_lambda1", "bound", "kappa2", "kappa2_le_2")
    _print_table(header, rows)
    out = _out_dir(args)
    path = _write_table(out, "theorem", args.format, header, rows)
    print(f"outputs: {path}")
    return 0 if all_ok else 2


def cmd_extract_dl(args):
    k = fileio.read_matrix_market(args.k)
    if not isinstance(k, SparseSymMatrix):
        raise InvalidSpec(f"{args.k}: K must be a coordinate symmetric file")
    w, a, gamma = extract_double_lagrange(k, args.m, args.n,
                                          gamma=args.gamma)
    out = _out_dir(args)
    fileio.write_matrix_market(w, os.path.join(out, "W.mtx"))
    fileio.write_matrix_market(a, os.path.join(out, "A.mtx"))
    print(f"gamma: {gamma!r}")
    print(f"outputs: {out}/W.mtx {out}/A.mtx")
    return 0


# ---------------------------------------------------------------------------
# Argument wiring
# ---------------------------------------------------------------------------

def _add_system_flags(p):
    p.add_argument("--w", help="Matrix Market path for W (symmetric)")
    p.add_argument("--a", help="Matrix Market path for A")
    p.add_argument("--g", help="Matrix Market path for g")
    p.add_argument("--r", help="Matrix Market path for r")
    p.add_argument(
        "--spec",
        help="generated problem: TOML file with a [problem] table, or "
             "inline family=...,key=value",
    )


def _add_solver_flags(p, eta_default="wnorm"):
    p.add_argument(
        "--eta", default=eta_default,
        help="number, or one of wnorm | wnorm-over-gamma | golub-greiff "
             f"(default: {eta_default})",
    )
    p.add_argument("--tau", type=float, default=1e-5,
                   help="stopping tolerance (default: 1e-5)")
    p.add_argument("--delay", type=int, default=5,
                   help="delay window length d (default: 5)")
    p.add_argument("--maxit", type=int, default=1000,
                   help="iteration cap (default: 1000)")


def _add_output_flags(p):
    p.add_argument("--out-dir",
                   help=f"output directory (default: ${OUT_DIR_ENV} or .)")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="table/history file format (default: csv)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="gkbsaddle",
        description="Sparse saddle-point solver via generalized "
                    "Golub-Kahan bidiagonalization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one saddle-point system")
    _add_system_flags(p)
    _add_solver_flags(p)
    p.add_argument("--bound", choices=("lower", "upper", "both"),
                   default="lower", help="error bounds to compute")
    p.add_argument("--sigma-lb", type=float, default=None,
                   help="lower bound a on the smallest elliptic singular "
                        "value (required for --bound upper/both)")
    p.add_argument("--threads", type=int, default=1,
                   help="accepted for interface symmetry; solve is serial")
    _add_output_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("generate",
                       help="write a generated problem as Matrix Market")
    p.add_argument("--spec", required=True,
                   help="TOML file with [problem] or inline "
                        "family=...,key=value")
    _add_output_flags(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("eta-sweep",
                       help="iteration counts across eta values")
    _add_system_flags(p)
    p.add_argument("--etas", required=True,
                   help="comma list; suffix w multiplies by ||W||_1 "
                        "(e.g. 0,0.1w,1w,10w)")
    _add_solver_flags(p)
    p.add_argument("--threads", type=int, default=1)
    _add_output_flags(p)
    p.set_defaults(func=cmd_eta_sweep)

    p = sub.add_parser("mesh-study",
                       help="iteration counts across grid refinements")
    p.add_argument("--family", default="constrained-grid",
                   help="constrained-grid (grid) or "
                        "semidefinite-coupled (semidef)")
    p.add_argument("--grids", required=True,
                   help="comma list of grid sizes, e.g. 8,16,32")
    p.add_argument("--n-slave", type=int, default=12,
                   help="slave count for the semidefinite family")
    p.add_argument("--seed", type=int, default=0)
    _add_solver_flags(p)
    p.add_argument("--threads", type=int, default=1)
    _add_output_flags(p)
    p.set_defaults(func=cmd_mesh_study)

    p = sub.add_parser("verify-theorem",
                       help="check the eta conditioning guarantee")
    _add_system_flags(p)
    p.add_argument("--eta-factors", default="1,2,10",
                   help="comma list of c values; eta = c / lambda_1")
    _add_output_flags(p)
    p.set_defaults(func=cmd_verify_theorem)

    p = sub.add_parser("extract-dl",
                       help="recover (W, A, gamma) from a double-Lagrange "
                            "matrix")
    p.add_argument("--k", required=True, help="Matrix Market path for K")
    p.add_argument("--m", type=int, required=True, help="row count of W")
    p.add_argument("--n", type=int, required=True,
                   help="constraint count")
    p.add_argument("--gamma", type=float, default=None,
                   help="coupling scale (default: read from K)")
    _add_output_flags(p)
    p.set_defaults(func=cmd_extract_dl)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GkbSaddleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
