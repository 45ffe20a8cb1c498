"""Independent reference computations used by the tests.

None of these touch the package's own CDF tables or samplers.
"""

import math

import mpmath as mp
import numpy as np
from scipy import stats as sps


def mp_poisson_cdf(k: int, lam: float, dps: int = 50):
    """Exact partial sum of the Poisson pmf in arbitrary precision."""
    with mp.workdps(dps):
        lam = mp.mpf(lam)
        term = mp.exp(-lam)
        total = term
        for i in range(1, k + 1):
            term = term * lam / i
            total += term
        return total


def mp_poisson_cdf_table(kmax: int, lam: float, dps: int = 50) -> list:
    with mp.workdps(dps):
        lam_ = mp.mpf(lam)
        term = mp.exp(-lam_)
        total = term
        out = [total]
        for i in range(1, kmax + 1):
            term = term * lam_ / i
            total += term
            out.append(total)
        return out


def mp_quantile(u, table) -> int:
    """Smallest index with table value >= u (table in mpmath precision)."""
    u = mp.mpf(u)
    for k, c in enumerate(table):
        if c >= u:
            return k
    raise ValueError("table too short")


def normal_cdf_quad(x: float) -> float:
    with mp.workdps(30):
        return float(mp.quad(lambda t: mp.exp(-t * t / 2) / mp.sqrt(2 * mp.pi), [-mp.inf, 0, x]))


def grid_bounds(lam1: float, lam2: float, m: int):
    """Bounds by direct evaluation with scipy's Poisson quantile."""
    u = (np.arange(1, m + 1) - 0.5) / m
    x = sps.poisson.ppf(u, lam1)
    y = sps.poisson.ppf(u, lam2)
    y_anti = sps.poisson.ppf(1.0 - u, lam2)
    return float(np.corrcoef(x, y_anti)[0, 1]), float(np.corrcoef(x, y)[0, 1])


def exact_poisson_correlation(lam1: float, lam2: float, rho: float) -> float:
    """Pearson correlation of the copula output, by bivariate Normal integrals.

    Uses E[XY] = sum_{k,l >= 0} P(X > k, Y > l) and
    P(X > k, Y > l) = P(Z1 > z1_k, Z2 > z2_l) with z_k = Phi^-1(F(k)).
    """
    def thresholds(lam):
        kmax = int(lam + 12 * math.sqrt(lam) + 15)
        z = sps.norm.ppf(sps.poisson.cdf(np.arange(kmax), lam))
        return z[z < 8.5]

    z1, z2 = thresholds(lam1), thresholds(lam2)
    mvn = sps.multivariate_normal([0.0, 0.0], [[1.0, rho], [rho, 1.0]])
    pts = np.array([[-a, -b] for a in z1 for b in z2])
    exy = float(np.sum(mvn.cdf(pts)))
    return (exy - lam1 * lam2) / math.sqrt(lam1 * lam2)
