"""Correlation matrix validation, factorisation and PSD repair."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    AsymmetricBeyondTolerance,
    DiagonalNotOne,
    EntryOutOfRange,
    NotPositiveSemidefinite,
    NotSquare,
)

SYMMETRY_TOL = 1e-12
PSD_TOL = -1e-10
FACTOR_TOL = 1e-10


class Space(str, Enum):
    NORMAL = "normal-side"
    POISSON = "poisson-target"


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Validated correlation matrix. Build with :func:`validate_correlation`."""

    entries: np.ndarray
    space: Space = Space.POISSON

    @property
    def p(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def tolist(self):
        return self.entries.tolist()


@dataclass(frozen=True, eq=False)
class FactorMatrix:
    """``entries @ entries.T`` reproduces the source correlation matrix."""

    entries: np.ndarray
    method: str

    @property
    def p(self) -> int:
        return self.entries.shape[0]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def min_eigenvalue(a) -> float:
    return float(np.linalg.eigvalsh(np.asarray(a, dtype=np.float64))[0])


def validate_correlation(raw, space=Space.POISSON) -> CorrelationMatrix:
    """Check the correlation-matrix invariants and return a frozen copy.

    Asymmetry up to 1e-12 is accepted and removed by averaging with the
    transpose; the PSD check allows a smallest eigenvalue down to -1e-10.
    """
    a = np.array(raw, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise NotSquare(f"correlation matrix must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise EntryOutOfRange("correlation matrix has non-finite entries")
    asym = np.abs(a - a.T).max()
    if asym > SYMMETRY_TOL:
        i, j = np.unravel_index(np.argmax(np.abs(a - a.T)), a.shape)
        raise AsymmetricBeyondTolerance(f"entries ({i},{j}) and ({j},{i}) differ by {asym:.3g}")
    a = 0.5 * (a + a.T)
    bad = np.flatnonzero(np.diag(a) != 1.0)
    if bad.size:
        i = int(bad[0])
        raise DiagonalNotOne(f"diagonal entry ({i},{i}) is {a[i, i]!r}, expected 1")
    if np.abs(a).max() > 1.0:
        i, j = np.unravel_index(np.argmax(np.abs(a)), a.shape)
        raise EntryOutOfRange(f"entry ({i},{j}) = {a[i, j]!r} is outside [-1, 1]")
    lam_min = min_eigenvalue(a)
    if lam_min < PSD_TOL:
        raise NotPositiveSemidefinite(lam_min)
    return CorrelationMatrix(_frozen(a), Space(space))


def factorize(R: CorrelationMatrix) -> FactorMatrix:
    """Return F with ``F @ F.T == R`` to 1e-10.

    Cholesky when R is strictly positive definite, otherwise the symmetric
    eigendecomposition ``F = V * sqrt(max(w, 0))`` (eigenvector columns
    scaled by root eigenvalues).
    """
    a = np.asarray(getattr(R, "entries", R), dtype=np.float64)
    try:
        F = np.linalg.cholesky(a)
        method = "cholesky"
    except np.linalg.LinAlgError:
        w, V = np.linalg.eigh(a)
        if w[0] < PSD_TOL:
            raise NotPositiveSemidefinite(w[0]) from None
        F = V * np.sqrt(np.clip(w, 0.0, None))
        method = "eigen"
    err = np.abs(F @ F.T - a).max()
    if err >= FACTOR_TOL and method == "cholesky":
        # Cholesky of a nearly singular matrix can lose accuracy; the eigen
        # route is better conditioned there.
        w, V = np.linalg.eigh(a)
        F = V * np.sqrt(np.clip(w, 0.0, None))
        method = "eigen"
    return FactorMatrix(_frozen(F), method)


def nearest_psd(raw, eps: float = 0.0, space=Space.NORMAL) -> CorrelationMatrix:
    """Clip eigenvalues at ``eps`` and rescale back to unit diagonal.

    Inputs that already pass :func:`validate_correlation` come back
    unchanged. One clip-and-rescale pass; rescaling by a positive diagonal
    preserves semidefiniteness, so the result is always valid.
    """
    a = np.array(raw, dtype=np.float64)
    try:
        return validate_correlation(a, space)
    except NotPositiveSemidefinite:
        pass
    a = 0.5 * (a + a.T)
    w, V = np.linalg.eigh(a)
    b = (V * np.clip(w, max(eps, 0.0), None)) @ V.T
    d = 1.0 / np.sqrt(np.diag(b))
    b = b * d[:, None] * d[None, :]
    b = 0.5 * (b + b.T)
    np.fill_diagonal(b, 1.0)
    np.clip(b, -1.0, 1.0, out=b)
    return validate_correlation(b, space)
