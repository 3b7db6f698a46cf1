"""Exception taxonomy shared across the package.

Every error raised by the library derives from :class:`GkbSaddleError`,
so callers (and the CLI) can distinguish library failures from plain
programming errors with a single ``except`` clause.
"""


class GkbSaddleError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(GkbSaddleError):
    """Operand shapes are incompatible."""


class EmptyMatrix(GkbSaddleError):
    """An operation that needs at least one row/column got an empty matrix."""


class IndefiniteNorm(GkbSaddleError):
    """v'Mv came out significantly negative for a supposedly SPD weight."""


class NotPositiveDefinite(GkbSaddleError):
    """A nonpositive pivot was met while factorizing an SPD-declared matrix.

    Attributes
    ----------
    index : int
        Pivot index in the original (unpermuted) ordering.
    pivot : float
        The offending pivot value.
    """

    def __init__(self, index, pivot):
        self.index = int(index)
        self.pivot = float(pivot)
        super().__init__(
            f"nonpositive pivot {pivot:.6g} at index {index}: "
            "matrix is not positive definite"
        )


class PatternMismatch(GkbSaddleError):
    """A double-Lagrange matrix does not have the expected block pattern.

    Attributes
    ----------
    row, col : int
        Coordinates (0-based) of the first offending entry.
    """

    def __init__(self, row, col, message):
        self.row = int(row)
        self.col = int(col)
        super().__init__(f"{message} (first offending entry at ({row}, {col}))")


class NonpositiveEta(GkbSaddleError):
    """An eta recommendation came out nonpositive."""


class SingularSystem(GkbSaddleError):
    """The dense oracle met a (numerically) singular saddle system."""


class TooLargeForDense(GkbSaddleError):
    """A dense-oracle operation was asked for above the dense threshold."""


class InvalidGrid(GkbSaddleError):
    """Grid generator parameter out of range."""


class InvalidSpec(GkbSaddleError):
    """Problem-specification parameters are inconsistent."""


class ZeroRhs(GkbSaddleError):
    """The transformed right-hand side b is zero: the shift already solves
    the constraint block, and the iteration converges immediately."""


class BreakdownAlpha(GkbSaddleError):
    """alpha fell below the breakdown threshold: A's numerical rank is
    deficient on the current subspace.

    Attributes
    ----------
    k : int
        Iteration counter at which the breakdown occurred.
    alpha : float
        The offending value.
    """

    def __init__(self, k, alpha):
        self.k = int(k)
        self.alpha = float(alpha)
        super().__init__(f"alpha breakdown at iteration {k}: alpha = {alpha:.6g}")


class BreakdownBeta(GkbSaddleError):
    """beta fell below the breakdown threshold: lucky breakdown, the exact
    solution has been reached in the generated subspace.

    Attributes
    ----------
    k : int
        Iteration counter at which the breakdown occurred.
    beta : float
        The offending value.
    """

    def __init__(self, k, beta):
        self.k = int(k)
        self.beta = float(beta)
        super().__init__(f"lucky breakdown at iteration {k}: beta = {beta:.6g}")


class InvalidSingularValueBound(GkbSaddleError):
    """The Gauss-Radau recursion produced a nonpositive radicand: the
    prescribed ``a`` is not usable as a lower bound on sigma_n at this step.

    Attributes
    ----------
    k : int
        Iteration counter at which the radicand failed.
    radicand : float
        The offending value of ``dbar_k + a^2 - beta_k^2`` (or ``dbar_k``
        itself when the pivot recursion broke down).
    """

    def __init__(self, k, radicand, what="radicand"):
        self.k = int(k)
        self.radicand = float(radicand)
        super().__init__(
            f"invalid singular-value bound at iteration {k}: "
            f"{what} = {radicand:.6g} <= 0"
        )


class ParseError(GkbSaddleError):
    """A file could not be parsed.

    Attributes
    ----------
    path : str
    line : int
        1-based line number of the offending line (0 when not line-specific).
    """

    def __init__(self, path, line, reason):
        self.path = str(path)
        self.line = int(line)
        super().__init__(f"{path}:{line}: {reason}")


class UnsupportedField(GkbSaddleError):
    """Matrix Market field/symmetry combination outside the supported subset."""


class IoError(GkbSaddleError):
    """Generic serialization failure."""
