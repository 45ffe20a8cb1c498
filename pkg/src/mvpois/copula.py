"""Gaussian-copula sampler for multivariate Poisson vectors.

Each draw is a correlated standard Normal vector pushed through the Normal
CDF and then through the Poisson quantile of its column's rate. Because the
quantile transform shrinks correlations (badly so at low rates), the
Normal-side matrix can be pre-distorted with an exponential correction fitted
through the pair's feasible bounds.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import corrmat
from .corrmat import CorrelationMatrix, Space
from .errors import DegenerateVariance, DomainError, Infeasible, NearSymmetricBounds
from .randsrc import RandomStream, Sampler, mvn_samples
from .scalardist import check_rate, normal_cdf, poisson_table

DEFAULT_GRID = 200_000
MIN_GRID = 1_000
# Rows per independently seeded block; changing it changes the output stream.
BLOCK_ROWS = 8192
# Correction is switched on by default when any rate is below this.
AUTO_CORRECTION_RATE = 5.0
NEAR_SYMMETRIC_TOL = 1e-6


@dataclass(frozen=True)
class FeasibleBounds:
    min_corr: float
    max_corr: float

    def contains(self, r: float) -> bool:
        """Strict interior test used for feasibility."""
        return self.min_corr < r < self.max_corr


@dataclass(frozen=True)
class CorrectionFit:
    """Exponential map ``rho_pois = a * exp(b * rho_normal) + c``."""

    bounds: FeasibleBounds
    a: float
    b: float
    c: float

    def forward(self, r):
        return self.a * np.exp(self.b * np.asarray(r, dtype=np.float64)) + self.c


@dataclass(frozen=True, eq=False)
class CopulaSpec:
    rates: np.ndarray
    target_corr: CorrelationMatrix
    apply_correction: bool
    sampler: Sampler = Sampler.EXACT

    @property
    def p(self) -> int:
        return self.rates.size


@dataclass
class GenerationReport:
    working_corr: CorrelationMatrix
    factor_method: str
    psd_adjustment: float = 0.0
    passthrough_pairs: list = field(default_factory=list)


@dataclass(frozen=True, eq=False)
class SampleMatrix:
    counts: np.ndarray
    spec: CopulaSpec
    seed: int
    report: GenerationReport | None = None
    normal: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.counts.shape[0]

    @property
    def p(self) -> int:
        return self.counts.shape[1]


def make_spec(rates, target_corr, apply_correction=None, sampler=Sampler.EXACT) -> CopulaSpec:
    """Validate inputs and build a :class:`CopulaSpec`.

    ``apply_correction=None`` turns the correction on when any rate is
    below 5.
    """
    rates = np.array([check_rate(x) for x in np.ravel(rates)], dtype=np.float64)
    if not isinstance(target_corr, CorrelationMatrix):
        target_corr = corrmat.validate_correlation(target_corr, Space.POISSON)
    if target_corr.p != rates.size:
        raise DomainError(f"{rates.size} rates given for a {target_corr.p}x{target_corr.p} correlation matrix")
    if apply_correction is None:
        apply_correction = bool(np.any(rates < AUTO_CORRECTION_RATE))
    rates.setflags(write=False)
    return CopulaSpec(rates, target_corr, bool(apply_correction), Sampler(sampler))


def _grid(m: int) -> np.ndarray:
    return (np.arange(1, m + 1, dtype=np.float64) - 0.5) / m


@lru_cache(maxsize=1024)
def _bounds_cached(lam1: float, lam2: float, m: int) -> FeasibleBounds:
    u = _grid(m)
    x = poisson_table(lam1).quantile(u).astype(np.float64)
    y = poisson_table(lam2).quantile(u).astype(np.float64)
    if x.std() == 0.0 or y.std() == 0.0:
        raise DegenerateVariance(
            f"quantiles are constant on a {m}-point grid for rates ({lam1:g}, {lam2:g}); increase the grid size"
        )
    # 1 - u_i is u_{m+1-i} on the midpoint grid, so the antithetic column is
    # the comonotone one reversed.
    max_corr = float(np.corrcoef(x, y)[0, 1])
    min_corr = float(np.corrcoef(x, y[::-1])[0, 1])
    return FeasibleBounds(min(min_corr, 0.0), min(max_corr, 1.0))


def feasible_bounds(lam1, lam2, m: int = DEFAULT_GRID) -> FeasibleBounds:
    """Attainable Pearson correlation range for two Poisson marginals.

    Evaluated deterministically on the midpoint grid ``(i - 0.5) / m``: the
    comonotone pair gives ``max_corr`` and the antithetic pair ``min_corr``.
    """
    if int(m) < MIN_GRID:
        raise DomainError(f"grid size must be at least {MIN_GRID}, got {m}")
    return _bounds_cached(check_rate(lam1), check_rate(lam2), int(m))


def fit_correction(bounds: FeasibleBounds) -> CorrectionFit:
    """Fit the exponential map through (-1, min), (0, 0) and (1, max).

    Raises:
        NearSymmetricBounds: if ``|max_corr + min_corr| <= 1e-6``; the
            coefficient ``a`` diverges there.
    """
    lo, hi = bounds.min_corr, bounds.max_corr
    if not hi > 0.0 > lo:
        raise DomainError(f"bounds must straddle zero, got [{lo}, {hi}]")
    if abs(hi + lo) <= NEAR_SYMMETRIC_TOL:
        raise NearSymmetricBounds(f"max_corr + min_corr = {hi + lo:.3g}; exponential fit is singular")
    a = -hi * lo / (hi + lo)
    b = math.log((hi + a) / a)
    return CorrectionFit(bounds, a, b, -a)


def correct_target(r: float, fit: CorrectionFit) -> float:
    """Normal-side correlation whose image under ``fit`` is ``r``."""
    ratio = (r + fit.a) / fit.a
    if ratio <= 0.0:
        raise Infeasible(
            f"correlation {r:g} is unreachable for bounds [{fit.bounds.min_corr:.6g}, {fit.bounds.max_corr:.6g}]",
            [(None, None, r, fit.bounds.min_corr, fit.bounds.max_corr)],
        )
    out = math.log(ratio) / fit.b
    if not -1.0 <= out <= 1.0:
        raise Infeasible(
            f"correlation {r:g} needs Normal-side value {out:.6g} outside [-1, 1]; "
            f"bounds [{fit.bounds.min_corr:.6g}, {fit.bounds.max_corr:.6g}]",
            [(None, None, r, fit.bounds.min_corr, fit.bounds.max_corr)],
        )
    return out


def correct_pair(lam1, lam2, r: float, m: int = DEFAULT_GRID) -> float:
    """Bounds, fit and inversion for one rate pair.

    Targets must sit strictly inside the feasible bounds. Near-symmetric
    bounds fall back to the identity map.
    """
    if r == 0.0:
        return 0.0
    bounds = feasible_bounds(lam1, lam2, m)
    if not bounds.contains(r):
        raise Infeasible(
            f"correlation {r:g} is outside the open feasible range ({bounds.min_corr:.6g}, {bounds.max_corr:.6g})",
            [(None, None, r, bounds.min_corr, bounds.max_corr)],
        )
    try:
        fit = fit_correction(bounds)
    except NearSymmetricBounds:
        return float(r)
    return correct_target(r, fit)


@dataclass
class CorrectionResult:
    matrix: CorrelationMatrix
    raw: np.ndarray
    psd_adjustment: float
    passthrough_pairs: list


def correct_matrix_detailed(target: CorrelationMatrix, rates, m: int = DEFAULT_GRID) -> CorrectionResult:
    target = target if isinstance(target, CorrelationMatrix) else corrmat.validate_correlation(target)
    rates = [check_rate(x) for x in np.ravel(rates)]
    t = np.asarray(target.entries)
    out = np.array(t, dtype=np.float64)
    failures = []
    passthrough = []
    for i in range(t.shape[0]):
        for j in range(i + 1, t.shape[0]):
            r = float(t[i, j])
            if r == 0.0:
                continue
            bounds = feasible_bounds(rates[i], rates[j], m)
            if not bounds.contains(r):
                failures.append((i, j, r, bounds.min_corr, bounds.max_corr))
                continue
            try:
                fit = fit_correction(bounds)
            except NearSymmetricBounds:
                passthrough.append((i, j))
                continue
            try:
                out[i, j] = out[j, i] = correct_target(r, fit)
            except Infeasible:
                failures.append((i, j, r, bounds.min_corr, bounds.max_corr))
    if failures:
        desc = "; ".join(f"pair ({i + 1},{j + 1}) requested {r:g} bounds ({lo:.6g}, {hi:.6g})" for i, j, r, lo, hi in failures)
        raise Infeasible(f"infeasible target correlations: {desc}", failures)
    repaired = corrmat.nearest_psd(out, 0.0, Space.NORMAL)
    adjustment = float(np.abs(np.asarray(repaired.entries) - out).max())
    return CorrectionResult(repaired, out, adjustment, passthrough)


def correct_matrix(target: CorrelationMatrix, rates, m: int = DEFAULT_GRID) -> CorrelationMatrix:
    """Apply the pairwise correction to every off-diagonal entry.

    The edited matrix is PSD-repaired if the pairwise changes broke
    semidefiniteness. Zero targets stay zero.
    """
    return correct_matrix_detailed(target, rates, m).matrix


def working_matrix(spec: CopulaSpec, m: int = DEFAULT_GRID) -> GenerationReport:
    if spec.apply_correction:
        res = correct_matrix_detailed(spec.target_corr, spec.rates, m)
        working = res.matrix
        adj, passthrough = res.psd_adjustment, res.passthrough_pairs
    else:
        working = CorrelationMatrix(spec.target_corr.entries, Space.NORMAL)
        adj, passthrough = 0.0, []
    factor = corrmat.factorize(working)
    return GenerationReport(working, factor.method, adj, passthrough), factor


def transform(normal: np.ndarray, rates) -> np.ndarray:
    """Map Normal columns to Poisson counts through CDF then quantile."""
    u = normal_cdf(normal)
    counts = np.empty(normal.shape, dtype=np.int64)
    for j, lam in enumerate(np.ravel(rates)):
        counts[:, j] = poisson_table(float(lam)).quantile(u[:, j])
    return counts


def generate(
    spec: CopulaSpec,
    n: int,
    seed: int,
    workers: int = 1,
    grid_size: int = DEFAULT_GRID,
    keep_normal: bool = False,
) -> SampleMatrix:
    """Draw ``n`` i.i.d. Poisson vectors for ``spec``.

    Rows are produced in blocks of ``BLOCK_ROWS``; block ``b`` uses
    ``RandomStream(seed, block=b)``, so the output does not depend on
    ``workers``.
    """
    n = int(n)
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    report, factor = working_matrix(spec, grid_size)
    starts = list(range(0, n, BLOCK_ROWS))

    def run(b: int):
        rows = min(BLOCK_ROWS, n - starts[b])
        x = mvn_samples(factor, RandomStream(seed, block=b), rows, spec.sampler)
        return x, transform(x, spec.rates)

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(starts))))
    else:
        parts = [run(b) for b in range(len(starts))]
    counts = np.concatenate([c for _, c in parts])
    normal = np.concatenate([x for x, _ in parts]) if keep_normal else None
    return SampleMatrix(counts, spec, int(seed), report, normal)
