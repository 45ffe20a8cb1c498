import math

import numpy as np
import pytest

from mvpois.corrmat import factorize, validate_correlation
from mvpois.randsrc import (
    RandomStream,
    Sampler,
    clt_normal,
    mvn_sample,
    mvn_samples,
    next_uniform,
    standard_normal,
    standard_normal_clt,
)

N = 1_000_000


def test_uniform_determinism():
    a, b = RandomStream(42), RandomStream(42)
    assert next_uniform(a) == next_uniform(b)
    assert np.array_equal(a.uniforms(1000), b.uniforms(1000))
    assert next_uniform(RandomStream(42)) != next_uniform(RandomStream(43))


def test_uniform_frozen_prefix():
    # Pins the generator contract: PCG64 via SeedSequence(0), top 53 bits + 1/2.
    bg = np.random.PCG64(np.random.SeedSequence(0))
    raw = bg.random_raw(3)
    expected = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) / 2.0**53
    assert np.array_equal(RandomStream(0).uniforms(3), expected)


def test_uniform_moments_and_open_interval():
    u = RandomStream(1).uniforms(N)
    assert abs(u.mean() - 0.5) < 0.002
    assert u.min() > 0.0 and u.max() < 1.0


def test_block_streams_are_distinct():
    a = RandomStream(7, block=0).uniforms(5)
    b = RandomStream(7, block=1).uniforms(5)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, RandomStream(7, block=0).uniforms(5))


def test_seed_range():
    RandomStream(2**64 - 1)
    with pytest.raises(ValueError):
        RandomStream(-1)
    with pytest.raises(ValueError):
        RandomStream(2**64)


def test_standard_normal_moments():
    z = RandomStream(2).standard_normals(N)
    assert abs(z.mean()) < 0.004
    assert abs(z.var() - 1.0) < 0.01
    assert abs((z <= 0).mean() - 0.5) < 0.002
    s1, s2 = RandomStream(9), RandomStream(9)
    assert [standard_normal(s1) for _ in range(20)] == [standard_normal(s2) for _ in range(20)]


def test_standard_normal_has_tails():
    z = RandomStream(3).standard_normals(10_000_000)
    # P(|Z| > 4) ~ 6.3e-5, so about 630 hits expected
    assert np.count_nonzero(np.abs(z) > 4) > 0


def test_clt_normal():
    z = RandomStream(4).standard_normals_clt(N)
    assert abs(z.mean()) < 0.004
    assert abs(z.var() - 1.0) < 0.01
    assert z.min() >= -6 and z.max() <= 6
    assert clt_normal(np.full(12, 0.5)) == 0.0
    s1, s2 = RandomStream(9), RandomStream(9)
    assert standard_normal_clt(s1) == standard_normal_clt(s2)


def test_mvn_sample_identity():
    F = factorize(validate_correlation(np.eye(3)))
    x = mvn_sample(F, RandomStream(5))
    assert x.shape == (3,)
    assert np.array_equal(x, RandomStream(5).standard_normals(3))
    one = factorize(validate_correlation([[1.0]]))
    assert mvn_sample(one, RandomStream(5)).shape == (1,)


def test_mvn_sample_first_row_of_batch():
    F = factorize(validate_correlation([[1, 0.3], [0.3, 1]]))
    assert np.array_equal(mvn_sample(F, RandomStream(6)), mvn_samples(F, RandomStream(6), 10)[0])


@pytest.mark.parametrize("sampler", [Sampler.EXACT, Sampler.CLT])
def test_mvn_correlation(sampler):
    rho, n = 0.4, 50_000
    F = factorize(validate_correlation([[1, rho], [rho, 1]]))
    x = mvn_samples(F, RandomStream(8), n, sampler)
    r = np.corrcoef(x, rowvar=False)[0, 1]
    assert abs(r - rho) < 0.02
    assert abs(r - rho) < 3 * (1 - rho**2) / math.sqrt(n)


def test_mvn_correlation_matrix_converges():
    R = np.array([[1, -0.4, 0.4], [-0.4, 1, 0.5], [0.4, 0.5, 1]])
    n = 50_000
    x = mvn_samples(factorize(validate_correlation(R)), RandomStream(10), n)
    emp = np.corrcoef(x, rowvar=False)
    bound = 3 * (1 - R**2) / math.sqrt(n)
    off = ~np.eye(3, dtype=bool)
    assert np.all(np.abs(emp - R)[off] < bound[off])
