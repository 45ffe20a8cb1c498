"""Validation statistics for generated count matrices.

Everything here works on plain integer arrays; a ``SampleMatrix`` is
accepted wherever a matrix is expected.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from .errors import DegenerateColumn, DomainError, InsufficientData
from .scalardist import check_rate, poisson_table

MIN_EXPECTED = 5.0
CORR_TOL = 0.05
GOF_ALPHA = 1e-3
SIGMAS = 3.0


def _counts(samples) -> np.ndarray:
    return np.asarray(getattr(samples, "counts", samples))


def empirical_correlation(samples) -> np.ndarray:
    x = _counts(samples).astype(np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise DomainError("need a 2-D sample matrix with at least two rows")
    sd = x.std(axis=0)
    if np.any(sd == 0.0):
        raise DegenerateColumn(f"column(s) {[int(j) + 1 for j in np.flatnonzero(sd == 0.0)]} have zero variance")
    c = np.corrcoef(x, rowvar=False).reshape(x.shape[1], x.shape[1])
    c = 0.5 * (c + c.T)
    np.fill_diagonal(c, 1.0)
    return c


def marginal_summary(samples):
    """Per-column sample mean and unbiased variance."""
    x = _counts(samples).astype(np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 2:
        raise DomainError("need at least two rows")
    return x.mean(axis=0), x.var(axis=0, ddof=1)


def pooled_bins(expected: np.ndarray, tail: float, min_expected: float = MIN_EXPECTED):
    """Greedy left-to-right pooling of per-count expected frequencies.

    ``expected[k]`` is the expected frequency of count ``k`` and ``tail`` the
    expected frequency beyond the last entry. Returns bin start indices; the
    last bin is open-ended. Every bin ends up with expectation at least
    ``min_expected`` unless the total mass is too small for that.
    """
    starts = [0]
    acc = 0.0
    rest = float(expected.sum()) + tail
    for k, e in enumerate(expected):
        acc += e
        rest -= e
        if acc >= min_expected and rest >= min_expected:
            starts.append(k + 1)
            acc = 0.0
    return starts


def _binned(column: np.ndarray, lam: float, n: int):
    tab = poisson_table(lam)
    kmax = max(int(column.max()), tab.hi)
    ks = np.arange(kmax + 1)
    expected = n * tab.pmf_at(ks)
    starts = pooled_bins(expected, max(n - expected.sum(), 0.0))
    counts = np.bincount(column, minlength=kmax + 1)
    edges = starts + [kmax + 1]
    obs = np.array([counts[a:b].sum() for a, b in zip(edges[:-1], edges[1:])], dtype=np.float64)
    exp_ = np.array([expected[a:b].sum() for a, b in zip(edges[:-1], edges[1:])])
    # Remaining mass beyond kmax belongs to the open-ended last bin.
    exp_[-1] += n - exp_.sum()
    return starts, obs, exp_


@dataclass
class GofResult:
    statistic: float
    df: int
    p_value: float
    bins: list = field(default_factory=list)


def chisq_gof(column, rate) -> GofResult:
    """Pearson chi-square test of a count column against Poisson(rate).

    Bins are single counts pooled left to right until each expects at least
    five observations; the last bin is open-ended. ``df = bins - 1`` since
    the rate is given, not estimated.
    """
    col = np.asarray(column).astype(np.int64).ravel()
    lam = check_rate(rate)
    n = col.size
    if n < 100:
        raise InsufficientData(f"chi-square test needs at least 100 observations, got {n}")
    if np.any(col < 0):
        raise DomainError("counts must be non-negative")
    starts, obs, exp_ = _binned(col, lam, n)
    if len(starts) < 2:
        raise InsufficientData("fewer than two bins remain after pooling")
    stat = float(np.sum((obs - exp_) ** 2 / exp_))
    df = len(starts) - 1
    return GofResult(stat, df, float(sps.chi2.sf(stat, df)), starts)


def two_sample_chisq(a, b) -> GofResult:
    """Chi-square homogeneity test between two integer samples.

    Pools counts the same way as :func:`chisq_gof`, using the smaller of the
    two expected frequencies per value.
    """
    a = np.asarray(a, dtype=np.int64).ravel()
    b = np.asarray(b, dtype=np.int64).ravel()
    kmax = int(max(a.max(), b.max()))
    ca = np.bincount(a, minlength=kmax + 1).astype(np.float64)
    cb = np.bincount(b, minlength=kmax + 1).astype(np.float64)
    share = min(a.size, b.size) / (a.size + b.size)
    starts = pooled_bins((ca + cb) * share, 0.0)
    if len(starts) < 2:
        raise InsufficientData("fewer than two bins remain after pooling")
    edges = starts + [kmax + 1]
    table = np.array([[ca[s:e].sum(), cb[s:e].sum()] for s, e in zip(edges[:-1], edges[1:])]).T
    stat, p_value, df, _ = sps.chi2_contingency(table, correction=False)
    return GofResult(float(stat), int(df), float(p_value), starts)


def observed_vs_expected(column, rate) -> np.ndarray:
    """Rows ``(k, observed, expected)`` for ``k = 0 .. max(column)``."""
    col = np.asarray(column).astype(np.int64).ravel()
    lam = check_rate(rate)
    if col.size < 1:
        raise DomainError("empty column")
    ks = np.arange(int(col.max()) + 1)
    obs = np.bincount(col, minlength=ks.size)
    exp_ = col.size * poisson_table(lam).pmf_at(ks)
    return np.column_stack([ks, obs, exp_])


def mean_tolerance(lam: float, n: int) -> float:
    return SIGMAS * math.sqrt(lam / n)


def variance_tolerance(lam: float, n: int) -> float:
    # Var(s^2) ~ (mu4 - sigma^4) / n with mu4 = lam(1 + 3 lam) for Poisson.
    return SIGMAS * math.sqrt((lam + 2.0 * lam * lam) / n)


@dataclass
class ValidationReport:
    n: int
    rates: np.ndarray
    empirical_corr: np.ndarray
    target_corr: np.ndarray
    max_corr_error: float
    marginal_means: np.ndarray
    marginal_variances: np.ndarray
    gof: list
    obs_vs_exp: list
    checks: dict

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def failures(self) -> list:
        return [k for k, ok in self.checks.items() if not ok]


def validate(samples, rates, target_corr, corr_tol: float = CORR_TOL, alpha: float = GOF_ALPHA) -> ValidationReport:
    """Full report: correlation error, marginal moments, GOF per column."""
    x = _counts(samples).astype(np.int64)
    rates = np.array([check_rate(v) for v in np.ravel(rates)])
    target = np.asarray(getattr(target_corr, "entries", target_corr), dtype=np.float64)
    n, p = x.shape
    if p != rates.size or target.shape != (p, p):
        raise DomainError(f"sample matrix has {p} columns but rates/correlation describe {rates.size}")
    checks = {}
    try:
        emp = empirical_correlation(x)
        err = float(np.abs(emp - target).max())
    except DegenerateColumn:
        emp = np.full((p, p), np.nan)
        err = math.inf
    checks["max_corr_error"] = err < corr_tol
    means, variances = marginal_summary(x)
    gof, tables = [], []
    for j in range(p):
        lam = float(rates[j])
        try:
            g = chisq_gof(x[:, j], lam)
            checks[f"gof_x{j + 1}"] = g.p_value > alpha
        except InsufficientData:
            # Too little expected mass to bin; the check is skipped, not passed.
            g = GofResult(math.nan, 0, math.nan)
        gof.append(g)
        tables.append(observed_vs_expected(x[:, j], lam))
        checks[f"mean_x{j + 1}"] = abs(means[j] - lam) <= mean_tolerance(lam, n)
        checks[f"variance_x{j + 1}"] = abs(variances[j] - lam) <= variance_tolerance(lam, n)
    return ValidationReport(n, rates, emp, target, err, means, variances, gof, tables, checks)
