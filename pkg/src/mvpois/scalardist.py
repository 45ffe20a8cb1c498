"""Scalar distribution functions: Normal CDF, Poisson pmf/CDF/quantile.

The Poisson CDF is tabulated once per rate with the multiplicative pmf
recurrence ``pmf(k+1) = pmf(k) * lam / (k+1)`` and a sequential cumulative
sum. Every CDF value and every quantile is read from that one table, so
``poisson_quantile(poisson_cdf(k, lam), lam) == k`` holds bit-exactly
wherever the table is strictly increasing.

For ``lam`` large enough that ``exp(-lam)`` underflows the recurrence is
started at the mode in log space and run outward in both directions.
"""

import math
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import DomainError

# Above this rate exp(-lam) is too close to the subnormal range to start the
# recurrence at k = 0.
_LOG_START_RATE = 600.0
# Rate above which the scalar quantile starts from a Normal-approximation guess.
QUANTILE_SWITCH_RATE = 30.0
_TAIL_SIGMAS = 38.0

_ONE_BELOW = np.nextafter(1.0, 0.0)
_TINY = np.nextafter(0.0, 1.0)


def check_rate(lam) -> float:
    lam = float(lam)
    if not math.isfinite(lam) or lam <= 0.0:
        raise DomainError(f"Poisson rate must be finite and > 0, got {lam!r}")
    return lam


def normal_cdf(x):
    """Standard Normal CDF, clamped into the open interval (0, 1).

    Accepts scalars or arrays. ``ndtr`` is accurate to a few ulp over the
    whole real line; the clamp only bites for ``|x| > 8.3`` (upper side) and
    ``x < -37.5`` (lower side).
    """
    out = np.clip(special.ndtr(x), _TINY, _ONE_BELOW)
    if np.ndim(out) == 0:
        return float(out)
    return out


def normal_ppf(u):
    return special.ndtri(u)


class PoissonTable:
    """Tabulated pmf and CDF of Poisson(lam) over ``[lo, hi]``.

    Mass outside the window is below 1e-300 on the left and negligible on the
    right; the cumulative sum is divided by its final value so the last entry
    is exactly 1.0 and every ``u < 1`` has a finite quantile.
    """

    def __init__(self, lam: float):
        self.lam = lam = check_rate(lam)
        sd = math.sqrt(lam)
        self.hi = hi = int(math.ceil(lam + _TAIL_SIGMAS * sd + 40.0))
        if lam < _LOG_START_RATE:
            self.lo = 0
            steps = lam / np.arange(1, hi + 1, dtype=np.float64)
            pmf = np.cumprod(np.concatenate(([math.exp(-lam)], steps)))
        else:
            self.lo = lo = max(0, int(math.floor(lam - _TAIL_SIGMAS * sd)))
            mode = int(math.floor(lam))
            p_mode = math.exp(-lam + mode * math.log(lam) - math.lgamma(mode + 1))
            up = np.cumprod(np.concatenate(([p_mode], lam / np.arange(mode + 1, hi + 1, dtype=np.float64))))
            down = np.cumprod(np.arange(mode, lo, -1, dtype=np.float64) / lam) * p_mode
            pmf = np.concatenate((down[::-1], up))
        cdf = np.cumsum(pmf)
        total = cdf[-1]
        self.pmf = pmf / total
        self.cdf = cdf / total

    def cdf_at(self, k):
        """CDF at integer(s) ``k``; 0 below the window, 1 above it."""
        k = np.asarray(k)
        idx = np.clip(k - self.lo, 0, self.cdf.size - 1)
        out = np.where(k < self.lo, 0.0, self.cdf[idx])
        return out

    def pmf_at(self, k):
        k = np.asarray(k)
        idx = np.clip(k - self.lo, 0, self.pmf.size - 1)
        inside = (k >= self.lo) & (k <= self.hi)
        return np.where(inside, self.pmf[idx], 0.0)

    def quantile(self, u):
        """Vectorised quantile: smallest ``k`` with ``cdf(k) >= u``."""
        return np.searchsorted(self.cdf, u, side="left").astype(np.int64) + self.lo


@lru_cache(maxsize=256)
def poisson_table(lam: float) -> PoissonTable:
    return PoissonTable(lam)


def poisson_pmf(k, lam):
    tab = poisson_table(check_rate(lam))
    out = tab.pmf_at(k)
    return float(out) if np.ndim(out) == 0 else out


def poisson_cdf(k, lam):
    """P(X <= k) for X ~ Poisson(lam); ``k`` integer or integer array."""
    if np.any(np.asarray(k) < 0):
        raise DomainError("k must be a non-negative integer")
    tab = poisson_table(check_rate(lam))
    out = tab.cdf_at(k)
    return float(out) if np.ndim(out) == 0 else out


def poisson_quantile(u: float, lam: float) -> int:
    """Right-continuous inverse of the Poisson CDF.

    Returns the smallest integer ``k`` with ``poisson_cdf(k, lam) >= u``.
    Small rates scan forward from ``k = 0``; larger rates start from
    ``floor(lam + z_u * sqrt(lam))`` and walk to the exact answer.
    """
    u = float(u)
    if not 0.0 < u < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {u!r}")
    lam = check_rate(lam)
    tab = poisson_table(lam)
    cdf = tab.cdf_at
    if lam <= QUANTILE_SWITCH_RATE:
        k = 0
        while cdf(k) < u:
            k += 1
        return k
    k = int(math.floor(lam + float(normal_ppf(u)) * math.sqrt(lam)))
    k = min(max(k, tab.lo), tab.hi)
    while k > 0 and cdf(k - 1) >= u:
        k -= 1
    while cdf(k) < u:
        k += 1
    return k


def poisson_quantile_array(u, lam: float) -> np.ndarray:
    """Array version of :func:`poisson_quantile` (binary search on the table)."""
    u = np.asarray(u, dtype=np.float64)
    if u.size and (np.any(u <= 0.0) or np.any(u >= 1.0)):
        raise DomainError("quantile levels must lie in (0, 1)")
    return poisson_table(check_rate(lam)).quantile(u)


def poisson_sample_interarrival(lam: float, stream) -> int:
    """One Poisson(lam) draw by counting unit-rate exponential inter-arrivals.

    Arrivals ``-log(U)/lam`` are accumulated until the clock passes 1.
    Exact for any rate but O(lam) per draw, so meant for small rates and as
    an oracle independent of the quantile path.
    """
    lam = check_rate(lam)
    t = 0.0
    k = -1
    while t <= lam:
        t -= math.log(stream.next_uniform())
        k += 1
    return k


def poisson_samples_interarrival(lam: float, stream, size: int) -> np.ndarray:
    """``size`` independent inter-arrival draws, advanced in lock-step."""
    lam = check_rate(lam)
    clock = np.zeros(size)
    counts = np.full(size, -1, dtype=np.int64)
    active = np.arange(size)
    while active.size:
        clock[active] -= np.log(stream.uniforms(active.size))
        counts[active] += 1
        active = active[clock[active] <= lam]
    return counts
