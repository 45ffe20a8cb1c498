"""Reference configurations and the low-rate correction sweep."""

from dataclasses import dataclass

import numpy as np

from . import copula
from .stats import empirical_correlation

DEMO_SEED = 20_100_401
DEMO_N = 50_000

CONST_RATE = {
    "rates": (2.0, 2.0, 2.0),
    "corr": ((1.0, 0.4, 0.4), (0.4, 1.0, 0.4), (0.4, 0.4, 1.0)),
}
MIXED_RATE = {
    "rates": (5.0, 10.0, 15.0),
    "corr": ((1.0, -0.4, 0.4), (-0.4, 1.0, 0.5), (0.4, 0.5, 1.0)),
}
LOW_RATE_PAIRS = ((0.1, 0.1), (0.1, 0.5), (0.5, 0.5), (0.5, 0.9), (0.9, 0.9))


def covariance(rates, corr) -> np.ndarray:
    """Poisson-side covariance ``rho_ij * sqrt(lam_i * lam_j)``."""
    sd = np.sqrt(np.asarray(rates, dtype=np.float64))
    return np.asarray(corr, dtype=np.float64) * np.outer(sd, sd)


def target_grid(bounds: copula.FeasibleBounds, k: int = 9) -> np.ndarray:
    """``k`` evenly spaced targets strictly inside the feasible interval."""
    return np.linspace(bounds.min_corr, bounds.max_corr, k + 2)[1:-1]


@dataclass
class SweepRow:
    lam1: float
    lam2: float
    target: float
    corrected: float
    uncorrected: float

    @property
    def corrected_error(self) -> float:
        return abs(self.corrected - self.target)

    @property
    def uncorrected_error(self) -> float:
        return abs(self.uncorrected - self.target)


def pair_correlation(lam1, lam2, rho, n, seed, correct, grid_size=copula.DEFAULT_GRID) -> float:
    spec = copula.make_spec((lam1, lam2), [[1.0, rho], [rho, 1.0]], correct)
    out = copula.generate(spec, n, seed, grid_size=grid_size)
    return float(empirical_correlation(out.counts)[0, 1])


def low_rate_sweep(pairs=LOW_RATE_PAIRS, k: int = 9, n: int = DEMO_N, seed: int = DEMO_SEED, grid_size=copula.DEFAULT_GRID):
    rows = []
    for lam1, lam2 in pairs:
        bounds = copula.feasible_bounds(lam1, lam2, grid_size)
        for i, r in enumerate(target_grid(bounds, k)):
            s = seed + i
            rows.append(
                SweepRow(
                    lam1,
                    lam2,
                    float(r),
                    pair_correlation(lam1, lam2, r, n, s, True, grid_size),
                    pair_correlation(lam1, lam2, r, n, s, False, grid_size),
                )
            )
    return rows
