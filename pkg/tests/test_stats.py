import math

import numpy as np
import pytest
from scipy import stats as sps

from mvpois.copula import generate, make_spec
from mvpois.errors import DegenerateColumn, InsufficientData
from mvpois.randsrc import RandomStream
from mvpois.scalardist import poisson_quantile_array, poisson_samples_interarrival
from mvpois.stats import (
    chisq_gof,
    empirical_correlation,
    marginal_summary,
    observed_vs_expected,
    pooled_bins,
    two_sample_chisq,
    validate,
)

EQUAL_04 = [[1, 0.4, 0.4], [0.4, 1, 0.4], [0.4, 0.4, 1]]


def poisson_column(lam, n, seed):
    return poisson_quantile_array(RandomStream(seed).uniforms(n), lam)


def test_empirical_correlation_examples():
    a = poisson_column(3, 1000, 1)
    c = empirical_correlation(np.column_stack([a, a]))
    assert c[0, 1] == pytest.approx(1.0, abs=1e-12)
    n = 50_000
    x = np.column_stack([poisson_column(2, n, 2), poisson_column(2, n, 3)])
    assert abs(empirical_correlation(x)[0, 1]) < 3 / math.sqrt(n)
    with pytest.raises(DegenerateColumn):
        empirical_correlation(np.column_stack([a, np.zeros_like(a)]))


def test_empirical_correlation_is_symmetric_unit_diagonal():
    out = generate(make_spec([2, 2, 2], EQUAL_04), 50_000, 4)
    c = empirical_correlation(out)
    assert np.array_equal(c, c.T)
    assert np.array_equal(np.diag(c), np.ones(3))
    assert np.all(np.abs(c - np.asarray(EQUAL_04)) < 0.05)


def test_marginal_summary_examples():
    means, variances = marginal_summary(np.zeros((10, 1), dtype=int))
    assert means[0] == 0 and variances[0] == 0
    n = 50_000
    m, _ = marginal_summary(poisson_column(2, n, 5))
    assert abs(m[0] - 2) < 0.02
    _, v = marginal_summary(poisson_column(15, n, 6))
    assert abs(v[0] - 15) < 0.6
    x = np.array([[1, 2], [3, 6]])
    m, v = marginal_summary(x)
    assert np.allclose(m, [2, 4]) and np.allclose(v, [2, 8])


def test_pooling_keeps_min_expected():
    exp_ = 1000 * sps.poisson.pmf(np.arange(60), 20.0)
    starts = pooled_bins(exp_, 1000 - exp_.sum())
    edges = starts + [60]
    sums = [exp_[a:b].sum() for a, b in zip(edges[:-1], edges[1:])]
    sums[-1] += 1000 - exp_.sum()
    assert min(sums) >= 5
    assert starts[0] == 0 and starts[1] > 1  # left tail pooled


def test_gof_matches_scipy_chisquare():
    col = poisson_column(3.0, 5000, 7)
    res = chisq_gof(col, 3.0)
    edges = res.bins + [None]
    obs = [np.count_nonzero((col >= a) & ((col < b) if b is not None else True)) for a, b in zip(edges[:-1], edges[1:])]
    cdf = lambda k: sps.poisson.cdf(k, 3.0)
    probs = [cdf(b - 1) - cdf(a - 1) if b is not None else 1 - cdf(a - 1) for a, b in zip(edges[:-1], edges[1:])]
    stat, p = sps.chisquare(obs, 5000 * np.array(probs))
    assert res.statistic == pytest.approx(stat, rel=1e-9)
    assert res.p_value == pytest.approx(p, rel=1e-6)
    assert res.df == len(res.bins) - 1


def test_gof_power():
    col = poisson_column(4.0, 10_000, 8)
    assert chisq_gof(col, 2.0).p_value < 1e-6


def test_gof_insufficient():
    with pytest.raises(InsufficientData):
        chisq_gof(np.zeros(100, dtype=int), 0.001)
    with pytest.raises(InsufficientData):
        chisq_gof(np.zeros(50, dtype=int), 2.0)


@pytest.mark.slow
def test_gof_exact_sampler_repetitions():
    passes = sum(chisq_gof(poisson_column(2.0, 1_000_000, 1000 + r), 2.0).p_value > 1e-3 for r in range(100))
    assert passes >= 99


def test_gof_calibration_under_oracle_null():
    rejections = 0
    for r in range(500):
        col = poisson_samples_interarrival(3.0, RandomStream(5000 + r), 2000)
        rejections += chisq_gof(col, 3.0).p_value < 0.01
    assert 0.003 <= rejections / 500 <= 0.03


def test_two_sample_chisq_detects_shift():
    a = poisson_column(2.0, 50_000, 9)
    b = poisson_column(2.2, 50_000, 10)
    assert two_sample_chisq(a, b).p_value < 1e-6


def test_observed_vs_expected_examples():
    t = observed_vs_expected(np.array([3]), 2.0)
    assert t[:, 0].tolist() == [0, 1, 2, 3]
    assert t[:, 1].tolist() == [0, 0, 0, 1]
    assert t[0, 2] == pytest.approx(math.exp(-2))


def test_observed_vs_expected_within_binomial_bounds():
    n = 50_000
    col = poisson_column(2.0, n, 11)
    t = observed_vs_expected(col, 2.0)
    for k, obs, exp_ in t[:9]:
        p = exp_ / n
        assert abs(obs - exp_) <= 4 * math.sqrt(n * p * (1 - p))
    # Tail mass beyond the largest observed count is small.
    assert abs(t[:, 2].sum() - n) < 0.01 * n
    assert t[:, 1].sum() == n


def test_validate_report():
    out = generate(make_spec([2, 2, 2], EQUAL_04), 50_000, 12)
    rep = validate(out, [2, 2, 2], EQUAL_04)
    assert rep.passed, rep.failures()
    assert rep.max_corr_error < 0.05
    for table in rep.obs_vs_exp:
        assert table[:, 1].sum() == 50_000


def test_validate_flags_shuffled_column():
    out = generate(make_spec([2, 2, 2], EQUAL_04), 50_000, 13)
    x = out.counts.copy()
    rng = np.random.default_rng(0)
    x[:, 1] = rng.permutation(x[:, 1])
    rep = validate(x, [2, 2, 2], EQUAL_04)
    assert not rep.checks["max_corr_error"]
    assert rep.checks["gof_x2"]


def test_validate_flags_wrong_rate():
    x = np.column_stack([poisson_column(4.0, 20_000, 14)])
    rep = validate(x, [2.0], [[1.0]])
    assert not rep.checks["gof_x1"] and not rep.checks["mean_x1"]
