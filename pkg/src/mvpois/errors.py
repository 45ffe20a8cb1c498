"""Exception hierarchy shared by all modules.

Every error carries a short ``code`` string so the CLI can print a
machine-parsable prefix and pick an exit status.
"""


class MvPoisError(Exception):
    code = "ERROR"


class MatrixError(MvPoisError, ValueError):
    code = "MATRIX"


class NotSquare(MatrixError):
    code = "NOT_SQUARE"


class AsymmetricBeyondTolerance(MatrixError):
    code = "ASYMMETRIC"


class DiagonalNotOne(MatrixError):
    code = "DIAGONAL_NOT_ONE"


class EntryOutOfRange(MatrixError):
    code = "ENTRY_OUT_OF_RANGE"


class NotPositiveSemidefinite(MatrixError):
    code = "NOT_PSD"

    def __init__(self, min_eigenvalue: float):
        self.min_eigenvalue = float(min_eigenvalue)
        super().__init__(f"matrix is not positive semidefinite (smallest eigenvalue {self.min_eigenvalue:.6g})")


class DomainError(MvPoisError, ValueError):
    code = "DOMAIN"


class DegenerateVariance(MvPoisError, ValueError):
    """A quantile column is constant on the evaluation grid."""

    code = "DEGENERATE_VARIANCE"


class NearSymmetricBounds(MvPoisError, ValueError):
    """``max_corr + min_corr`` is too close to zero for the exponential fit."""

    code = "NEAR_SYMMETRIC_BOUNDS"


class Infeasible(MvPoisError, ValueError):
    """Requested Poisson-side correlation(s) cannot be reached.

    ``pairs`` is a list of ``(i, j, requested, min_corr, max_corr)`` tuples;
    indices are ``None`` when the check was for a bare rate pair.
    """

    code = "INFEASIBLE"

    def __init__(self, message: str, pairs=()):
        self.pairs = list(pairs)
        super().__init__(message)


# Spelled out separately so callers can catch the generation-time variant.
InfeasibleCorrelation = Infeasible


class DegenerateColumn(MvPoisError, ValueError):
    code = "DEGENERATE_COLUMN"


class InsufficientData(MvPoisError, ValueError):
    code = "INSUFFICIENT_DATA"


class ConfigError(MvPoisError, ValueError):
    code = "CONFIG"
