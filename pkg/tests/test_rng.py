import math

import numpy as np
import pytest
from scipy import stats as sps

from brownian_argmax import rng


def test_same_seed_is_bit_identical():
    a = rng.uniform64(rng.make_stream(rng.SeedSpec(42, 0)), 1000)
    b = rng.uniform64(rng.make_stream(rng.SeedSpec(42, 0)), 1000)
    assert np.array_equal(a, b)


def test_distinct_stream_ids_differ_early():
    a = rng.uniform64(rng.make_stream(rng.SeedSpec(42, 0)), 16)
    b = rng.uniform64(rng.make_stream(rng.SeedSpec(42, 1)), 16)
    assert np.any(a != b)


def test_namespaces_are_separate():
    a = rng.uniform64(rng.stream_for(42, 3, rng.NS_THETA), 16)
    b = rng.uniform64(rng.stream_for(42, 3, rng.NS_GUE), 16)
    assert np.any(a != b)


def test_stream_does_not_depend_on_creation_order():
    later = [rng.stream_for(42, i) for i in range(8)]
    direct = rng.stream_for(42, 7)
    assert np.array_equal(rng.uniform64(later[7], 32), rng.uniform64(direct, 32))


@pytest.mark.parametrize("bad", [-1, 2**64])
def test_seed_range_is_checked(bad):
    with pytest.raises(ValueError):
        rng.SeedSpec(bad, 0)


def test_normal_moments():
    z = rng.standard_normal(rng.stream_for(1, 0), 10**6)
    assert abs(z.mean()) < 0.005
    assert abs(z.var() - 1.0) < 0.01
    assert abs((z <= 0).mean() - 0.5) < 0.0015


@pytest.mark.parametrize("stream_id", range(32))
def test_normal_ks_every_stream(stream_id):
    z = rng.standard_normal(rng.stream_for(42, stream_id), 10**4)
    d = sps.kstest(z, sps.norm.cdf).statistic
    assert d < 1.628 / math.sqrt(10**4)


def test_normal_ks_pvalues_uniform_across_streams():
    p = np.array([sps.kstest(rng.standard_normal(rng.stream_for(0, s), 10**4), sps.norm.cdf).pvalue for s in range(500)])
    assert sps.kstest(p, "uniform").pvalue > 0.01
    assert (p < 0.01).mean() < 0.01 + 3 * math.sqrt(0.01 * 0.99 / p.size)


def test_open_uniform_excludes_zero():
    u = rng.open_uniform(rng.stream_for(3, 0), 10**5)
    assert u.min() > 0.0 and u.max() <= 1.0
