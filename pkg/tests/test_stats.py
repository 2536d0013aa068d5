import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from brownian_argmax import rng
from brownian_argmax.distributions import ARCSINE, beta_cdf
from brownian_argmax.stats import (
    TestReport,
    alpha_for_sigma,
    chi_square_gof,
    chi_square_quantile,
    kolmogorov_critical,
    ks_one_sample,
    ks_statistic,
    ks_two_sample,
    ks_two_sample_statistic,
    moment_z_test,
    normal_cdf,
    two_sided_normal_quantile,
)

PHI = normal_cdf


def normals(seed, n, loc=0.0, scale=1.0):
    return loc + scale * rng.standard_normal(rng.stream_for(seed, 0, rng.NS_AUX), n)


def test_critical_value_formula():
    assert kolmogorov_critical(0.01) == pytest.approx(1.6276, abs=1e-4)
    assert kolmogorov_critical(0.05) == pytest.approx(1.3581, abs=1e-4)


def test_perfect_fit_quantiles():
    n = 1000
    samples = [sps.norm.ppf(i / (n + 1)) for i in range(1, n + 1)]
    assert ks_one_sample(samples, PHI, 0.01).passed


def test_ks_statistic_against_scipy():
    x = normals(1, 500)
    assert ks_statistic(x, PHI) == pytest.approx(sps.kstest(x, sps.norm.cdf).statistic, abs=1e-12)


def test_ks_null_passes_and_shift_fails():
    assert ks_one_sample(normals(2, 10**4), PHI, 0.01).passed
    shifted = ks_one_sample(normals(3, 10**4, loc=0.5), PHI, 0.01)
    assert not shifted.passed and shifted.p_value < 1e-6


def test_ks_rejects_empty():
    with pytest.raises(ValueError):
        ks_one_sample([], PHI, 0.01)
    with pytest.raises(ValueError):
        ks_two_sample([], [1.0], 0.01)


def test_two_sample_identical():
    x = normals(4, 100)
    r = ks_two_sample(x, x, 0.01)
    assert r.statistic == 0.0 and r.passed


def test_two_sample_against_scipy():
    a, b = normals(5, 700), normals(6, 300, loc=0.1)
    assert ks_two_sample_statistic(a, b) == pytest.approx(sps.ks_2samp(a, b).statistic, abs=1e-12)


def test_two_sample_null_and_power():
    assert ks_two_sample(normals(7, 10**4), normals(8, 10**4), 0.01).passed
    assert not ks_two_sample(normals(9, 10**4), normals(10, 10**4, scale=1.5), 0.01).passed


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=40), st.lists(st.floats(-5, 5), min_size=1, max_size=40))
def test_two_sample_symmetric(a, b):
    assert ks_two_sample_statistic(a, b) == ks_two_sample_statistic(b, a)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-4, 4), min_size=1, max_size=60))
def test_ks_statistic_range_and_transform_invariance(xs):
    d = ks_statistic(xs, PHI)
    assert 0.0 <= d <= 1.0
    # strictly increasing map applied to samples and to the cdf argument
    transformed = ks_statistic([math.exp(x) for x in xs], lambda y: PHI(math.log(y)))
    assert transformed == pytest.approx(d, abs=1e-12)


def test_chi_square_exact_fit():
    r = chi_square_gof([10, 20, 30], [10.0, 20.0, 30.0], 0.01)
    assert r.statistic == 0.0 and r.passed and r.p_value == pytest.approx(1.0)


def test_chi_square_against_scipy():
    counts = np.array([48, 55, 61, 36])
    expected = np.array([50.0, 50.0, 50.0, 50.0])
    r = chi_square_gof(counts, expected, 0.05)
    ref = sps.chisquare(counts, expected)
    assert r.statistic == pytest.approx(ref.statistic)
    assert r.p_value == pytest.approx(ref.pvalue, abs=1e-10)
    assert r.critical_value == pytest.approx(sps.chi2.ppf(0.95, 3), rel=1e-9)


def test_chi_square_null_multinomial():
    p = np.full(20, 1 / 20)
    counts = rng.stream_for(11, 0, rng.NS_AUX).multinomial(10**4, p)
    assert chi_square_gof(counts, p * 10**4, 0.01).passed


def test_chi_square_power_uniform_vs_arcsine():
    edges = np.linspace(0, 1, 21)
    probs = np.diff([beta_cdf(ARCSINE, e) for e in edges])
    counts = np.full(20, 500)
    assert not chi_square_gof(counts, probs * 10**4, 0.01).passed


def test_chi_square_validation():
    with pytest.raises(ValueError):
        chi_square_gof([1, 2], [1.5, 1.5], 0.01)
    with pytest.raises(ValueError):
        chi_square_gof([10, 10], [5.0, 30.0], 0.01)


def test_chi_square_quantile():
    for dof in (1, 5, 19):
        assert chi_square_quantile(0.99, dof) == pytest.approx(sps.chi2.ppf(0.99, dof), rel=1e-9)


def test_moment_test():
    r = moment_z_test(np.full(50, 0.3), 0.3, 0.01)
    assert r.statistic == 0.0 and r.passed
    assert moment_z_test(normals(12, 10**4, loc=2.0), 2.0, 0.01).passed
    assert not moment_z_test(normals(13, 10**4, loc=2.1), 2.0, 0.01).passed
    with pytest.raises(ValueError):
        moment_z_test(np.ones(29), 1.0, 0.01)


def test_normal_quantiles():
    assert two_sided_normal_quantile(0.01) == pytest.approx(2.5758293, abs=1e-6)
    assert two_sided_normal_quantile(alpha_for_sigma(3.0)) == pytest.approx(3.0, abs=1e-9)


def test_report_shape():
    r = ks_one_sample(normals(14, 2000), PHI, 0.01, name="x")
    assert isinstance(r, TestReport)
    assert r.passed == (r.statistic < r.critical_value)
    assert 0 <= r.p_value <= 1
    d = r.to_dict()
    assert set(d) == {"name", "statistic", "critical_value", "p_value", "sample_size", "passed"}
    assert "PASS" in r.line()
