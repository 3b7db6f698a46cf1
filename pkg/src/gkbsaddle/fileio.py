"""Bit-exact file interchange: Matrix Market, run configs, histories.

Matrices and vectors travel as Matrix Market files (coordinate form for
sparse matrices, array form for vectors), values serialized with 17
significant decimal digits so write -> read reproduces every float
bitwise.  Run configuration is a small TOML schema; convergence
histories serialize to CSV or JSON with shortest-round-trip floats.

This module is named ``fileio`` rather than ``io`` to avoid shadowing
the standard-library module of that name.
"""
from __future__ import annotations

import csv
import json
import sys
from dataclasses import dataclass, asdict, fields as dc_fields

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import InvalidSpec, IoError, ParseError, UnsupportedField
from .generators import ProblemSpec
from .gkb import ConvergenceHistory, GkbConfig, HistoryRow
from .sparse import SparseMatrix, SparseSymMatrix

__all__ = [
    "read_matrix_market",
    "write_matrix_market",
    "RunConfig",
    "load_run_config",
    "save_run_config",
    "write_history",
    "read_history",
]

_ETA_MODES = ("value", "wnorm", "wnorm-over-gamma", "golub-greiff")


def _fmt(v):
    """17-significant-digit decimal form: lossless for 64-bit floats."""
    return f"{v:.16e}"


# ---------------------------------------------------------------------------
# Matrix Market
# ---------------------------------------------------------------------------

def write_matrix_market(obj, path):
    """Write a SparseMatrix / SparseSymMatrix / vector (or dense array).

    Symmetric matrices store only their lower triangle under the
    ``symmetric`` qualifier; arrays are written in ``array`` form,
    column-major.
    """
    lines = []
    if isinstance(obj, SparseSymMatrix):
        r, c, v = obj.triplets()
        keep = r >= c
        r, c, v = r[keep], c[keep], v[keep]
        lines.append("%%MatrixMarket matrix coordinate real symmetric")
        lines.append(f"{obj.n} {obj.n} {r.size}")
        lines.extend(
            f"{ri + 1} {ci + 1} {_fmt(vi)}" for ri, ci, vi in zip(r, c, v)
        )
    elif isinstance(obj, SparseMatrix):
        r, c, v = obj.triplets()
        lines.append("%%MatrixMarket matrix coordinate real general")
        lines.append(f"{obj.nrows} {obj.ncols} {r.size}")
        lines.extend(
            f"{ri + 1} {ci + 1} {_fmt(vi)}" for ri, ci, vi in zip(r, c, v)
        )
    else:
        arr = np.asarray(obj, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise ValueError("can only write 1-D or 2-D arrays")
        lines.append("%%MatrixMarket matrix array real general")
        lines.append(f"{arr.shape[0]} {arr.shape[1]}")
        lines.extend(_fmt(v) for v in arr.ravel(order="F"))
    try:
        with open(path, "w", encoding="ascii") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _parse_float(tok, path, lineno):
    try:
        return float(tok.replace("D", "e").replace("d", "e"))
    except ValueError:
        raise ParseError(path, lineno, f"bad numeric value {tok!r}") from None


def _parse_ints(toks, count, path, lineno, what):
    if len(toks) != count:
        raise ParseError(path, lineno, f"{what}: expected {count} fields")
    try:
        return [int(t) for t in toks]
    except ValueError:
        raise ParseError(path, lineno, f"{what}: bad integer") from None


def read_matrix_market(path):
    """Read a Matrix Market file.

    Returns
    -------
    SparseMatrix for ``coordinate real general``, SparseSymMatrix for
    ``coordinate real symmetric`` (entries must sit on or below the
    diagonal; the full pattern is reconstructed), and an ndarray for
    ``array real general`` (1-D when the file has a single column).
    Duplicate coordinate entries are summed.

    Raises
    ------
    ParseError, UnsupportedField, IoError
    """
    try:
        with open(path, encoding="ascii", errors="replace") as fh:
            raw = fh.read().splitlines()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if not raw:
        raise ParseError(path, 1, "empty file")
    banner = raw[0].split()
    if len(banner) != 5 or banner[0].lower() != "%%matrixmarket":
        raise ParseError(path, 1, "missing %%MatrixMarket banner")
    obj, form, field, symmetry = (t.lower() for t in banner[1:])
    if obj != "matrix":
        raise UnsupportedField(f"unsupported object {obj!r}")
    if field != "real":
        raise UnsupportedField(f"unsupported field {field!r}")
    if symmetry not in ("general", "symmetric"):
        raise UnsupportedField(f"unsupported symmetry {symmetry!r}")
    if form not in ("coordinate", "array"):
        raise ParseError(path, 1, f"unknown format {form!r}")

    # Content lines with their 1-based numbers; comments and blanks skipped.
    content = [
        (no, line.split())
        for no, line in enumerate(raw[1:], start=2)
        if line.strip() and not line.lstrip().startswith("%")
    ]
    if not content:
        raise ParseError(path, len(raw), "missing size line")
    (size_no, size_toks), entries = content[0], content[1:]

    if form == "coordinate":
        m, n, nnz = _parse_ints(size_toks, 3, path, size_no, "size line")
        if len(entries) != nnz:
            raise ParseError(
                path, size_no,
                f"declared {nnz} entries, found {len(entries)}",
            )
        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        vals = np.empty(nnz)
        for idx, (no, toks) in enumerate(entries):
            if len(toks) != 3:
                raise ParseError(path, no, "entry: expected 'i j value'")
            i, j = _parse_ints(toks[:2], 2, path, no, "entry")
            if not (1 <= i <= m and 1 <= j <= n):
                raise ParseError(path, no, f"entry ({i}, {j}) out of range")
            if symmetry == "symmetric" and i < j:
                raise ParseError(
                    path, no,
                    "entry above the diagonal in a symmetric file",
                )
            rows[idx] = i - 1
            cols[idx] = j - 1
            vals[idx] = _parse_float(toks[2], path, no)
        if symmetry == "symmetric":
            if m != n:
                raise ParseError(path, size_no, "symmetric file not square")
            return SparseSymMatrix.from_lower_coo(n, rows, cols, vals)
        return SparseMatrix.from_coo(m, n, rows, cols, vals)

    if symmetry != "general":
        raise UnsupportedField("array symmetric files are not supported")
    m, n = _parse_ints(size_toks, 2, path, size_no, "size line")
    if len(entries) != m * n:
        raise ParseError(
            path, size_no, f"declared {m * n} values, found {len(entries)}"
        )
    vals = np.empty(m * n)
    for idx, (no, toks) in enumerate(entries):
        if len(toks) != 1:
            raise ParseError(path, no, "array entry: expected one value")
        vals[idx] = _parse_float(toks[0], path, no)
    arr = vals.reshape((m, n), order="F")
    return arr[:, 0] if n == 1 else arr


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    """Everything one solve needs: inputs, eta policy, stopping, output.

    Inputs come either from four Matrix Market paths (w/a/g/r) or from an
    inline generated-problem description -- exactly one of the two.
    ``eta_mode`` is "value" (with ``eta_value``) or one of the derived
    modes; stopping fields mirror GkbConfig and are validated by it.
    """

    w: str | None = None
    a: str | None = None
    g: str | None = None
    r: str | None = None
    problem: ProblemSpec | None = None
    eta_mode: str = "wnorm"
    eta_value: float | None = None
    tau: float = 1e-5
    delay: int = 5
    maxit: int = 1000
    bound_mode: str = "lower"
    sigma_lb: float | None = None
    out_dir: str | None = None
    format: str = "csv"

    def __post_init__(self):
        paths = (self.w, self.a, self.g, self.r)
        have_paths = any(p is not None for p in paths)
        if have_paths and any(p is None for p in paths):
            raise InvalidSpec("need all four of w/a/g/r paths")
        if have_paths == (self.problem is not None):
            raise InvalidSpec(
                "exactly one of file paths or a problem spec is required"
            )
        if self.eta_mode not in _ETA_MODES:
            raise InvalidSpec(f"unknown eta mode {self.eta_mode!r}")
        if (self.eta_mode == "value") != (self.eta_value is not None):
            raise InvalidSpec("eta_value is required iff eta_mode='value'")
        if self.format not in ("csv", "json"):
            raise InvalidSpec(f"unknown output format {self.format!r}")
        GkbConfig(
            tau=self.tau, delay=self.delay, maxit=self.maxit,
            bound_mode=self.bound_mode, a=self.sigma_lb,
        )


def _problem_from_dict(d, path):
    known = {f.name for f in dc_fields(ProblemSpec)}
    unknown = set(d) - known
    if unknown:
        raise ParseError(
            path, 0, f"unknown problem keys {sorted(unknown)}"
        )
    if "family" not in d:
        raise ParseError(path, 0, "problem table needs a 'family' key")
    return ProblemSpec(**d)


def load_run_config(path) -> RunConfig:
    """Parse a TOML run configuration.

    Schema: optional tables ``[input]`` (w/a/g/r paths) or ``[problem]``
    (ProblemSpec fields), ``[solver]`` (eta, tau, delay, maxit, bound,
    sigma_lb) and ``[output]`` (out_dir, format).  ``eta`` is either a
    number or a derived-mode name.
    """
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(path, 0, f"invalid TOML: {exc}") from exc
    known = {"input", "problem", "solver", "output"}
    unknown = set(doc) - known
    if unknown:
        raise ParseError(path, 0, f"unknown tables {sorted(unknown)}")
    kw = {}
    inp = doc.get("input", {})
    for key in ("w", "a", "g", "r"):
        if key in inp:
            kw[key] = str(inp[key])
    if "problem" in doc:
        kw["problem"] = _problem_from_dict(doc["problem"], path)
    sol = doc.get("solver", {})
    if "eta" in sol:
        eta = sol["eta"]
        if isinstance(eta, str):
            kw["eta_mode"] = eta
        else:
            kw["eta_mode"] = "value"
            kw["eta_value"] = float(eta)
    for key, cast in (("tau", float), ("delay", int), ("maxit", int)):
        if key in sol:
            kw[key] = cast(sol[key])
    if "bound" in sol:
        kw["bound_mode"] = str(sol["bound"])
    if "sigma_lb" in sol:
        kw["sigma_lb"] = float(sol["sigma_lb"])
    out = doc.get("output", {})
    if "out_dir" in out:
        kw["out_dir"] = str(out["out_dir"])
    if "format" in out:
        kw["format"] = str(out["format"])
    extra_sol = set(sol) - {"eta", "tau", "delay", "maxit", "bound",
                            "sigma_lb"}
    if extra_sol:
        raise ParseError(path, 0, f"unknown solver keys {sorted(extra_sol)}")
    try:
        return RunConfig(**kw)
    except (InvalidSpec, ValueError) as exc:
        raise ParseError(path, 0, str(exc)) from exc


def _toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def save_run_config(cfg: RunConfig, path):
    """Serialize a RunConfig to TOML; load(save(cfg)) == cfg."""
    lines = []
    if cfg.problem is not None:
        lines.append("[problem]")
        for key, val in asdict(cfg.problem).items():
            lines.append(f"{key} = {_toml_value(val)}")
    else:
        lines.append("[input]")
        for key in ("w", "a", "g", "r"):
            lines.append(f"{key} = {_toml_value(getattr(cfg, key))}")
    lines.append("")
    lines.append("[solver]")
    if cfg.eta_mode == "value":
        lines.append(f"eta = {_toml_value(cfg.eta_value)}")
    else:
        lines.append(f"eta = {_toml_value(cfg.eta_mode)}")
    lines.append(f"tau = {_toml_value(cfg.tau)}")
    lines.append(f"delay = {cfg.delay}")
    lines.append(f"maxit = {cfg.maxit}")
    lines.append(f"bound = {_toml_value(cfg.bound_mode)}")
    if cfg.sigma_lb is not None:
        lines.append(f"sigma_lb = {_toml_value(cfg.sigma_lb)}")
    lines.append("")
    lines.append("[output]")
    if cfg.out_dir is not None:
        lines.append(f"out_dir = {_toml_value(cfg.out_dir)}")
    lines.append(f"format = {_toml_value(cfg.format)}")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Convergence histories
# ---------------------------------------------------------------------------

HISTORY_COLUMNS = ("k", "zeta", "xi", "Xi", "residual_proxy",
                   "true_error", "ms")


def _cell(v):
    return "" if v is None else repr(float(v))


def write_history(hist: ConvergenceHistory, path, format="csv"):
    """Serialize a convergence history.

    CSV holds one row per iteration under the fixed column header, empty
    cells where a quantity was unavailable; floats use shortest
    round-trip form.  JSON additionally carries the stopping metadata.
    """
    if format not in ("csv", "json"):
        raise ValueError(f"unknown history format {format!r}")
    try:
        if format == "csv":
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(HISTORY_COLUMNS)
                for row in hist.rows:
                    writer.writerow(
                        [row.k] + [
                            _cell(getattr(row, col))
                            for col in HISTORY_COLUMNS[1:]
                        ]
                    )
        else:
            doc = {
                "rows": [
                    {col: getattr(row, col) for col in HISTORY_COLUMNS}
                    for row in hist.rows
                ],
                "stop_k": hist.stop_k,
                "first_pass_k": hist.first_pass_k,
                "certified_k": hist.certified_k,
                "radau_failed_steps": list(hist.radau_failed_steps),
            }
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, indent=1)
                fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_history(path, format=None) -> ConvergenceHistory:
    """Read back a history file; format inferred from the extension."""
    if format is None:
        format = "json" if str(path).endswith(".json") else "csv"
    hist = ConvergenceHistory()
    try:
        if format == "csv":
            with open(path, newline="", encoding="utf-8") as fh:
                reader = csv.reader(fh)
                header = next(reader, None)
                if header != list(HISTORY_COLUMNS):
                    raise ParseError(path, 1, "bad history header")
                for row in reader:
                    vals = [None if c == "" else float(c) for c in row[1:]]
                    hist.rows.append(HistoryRow(int(row[0]), *vals))
            if hist.rows:
                hist.stop_k = hist.rows[-1].k
        else:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
            for rec in doc["rows"]:
                hist.rows.append(
                    HistoryRow(**{c: rec[c] for c in HISTORY_COLUMNS})
                )
            hist.stop_k = doc["stop_k"]
            hist.first_pass_k = doc["first_pass_k"]
            hist.certified_k = doc["certified_k"]
            hist.radau_failed_steps = list(doc["radau_failed_steps"])
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ParseError(path, 0, f"bad history file: {exc}") from exc
    return hist
