"""Goodness-of-fit and moment tests with asymptotic critical values."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from statistics import NormalDist
from typing import Callable

import numpy as np

from .special import gammaincc, kolmogorov_sf

_NORMAL = NormalDist()


@dataclass(frozen=True)
class TestReport:
    name: str
    statistic: float
    critical_value: float
    p_value: float
    sample_size: int
    passed: bool

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        return {k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in asdict(self).items()}

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{verdict} {self.name}: statistic={self.statistic:.6g} "
            f"critical={self.critical_value:.6g} p={self.p_value:.4g} N={self.sample_size}"
        )


def _report(name, statistic, critical, p_value, size) -> TestReport:
    statistic = float(statistic)
    critical = float(critical)
    return TestReport(name, statistic, critical, min(1.0, max(0.0, float(p_value))), int(size), statistic < critical)


def kolmogorov_critical(alpha: float) -> float:
    """c(alpha) = sqrt(-ln(alpha / 2) / 2)."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return math.sqrt(-math.log(alpha / 2.0) / 2.0)


def normal_cdf(x: float) -> float:
    return _NORMAL.cdf(x)


def two_sided_normal_quantile(alpha: float) -> float:
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return _NORMAL.inv_cdf(1.0 - alpha / 2.0)


def ks_statistic(samples, cdf: Callable[[float], float]) -> float:
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("samples must be nonempty")
    f = np.array([cdf(float(v)) for v in x])
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def ks_one_sample(samples, cdf: Callable[[float], float], alpha: float, name: str = "ks_one_sample") -> TestReport:
    n = len(samples)
    if n == 0:
        raise ValueError("samples must be nonempty")
    d = ks_statistic(samples, cdf)
    critical = kolmogorov_critical(alpha) / math.sqrt(n)
    return _report(name, d, critical, kolmogorov_sf(math.sqrt(n) * d), n)


def ks_two_sample_statistic(a, b) -> float:
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    pooled = np.concatenate([a, b])
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_two_sample(a, b, alpha: float, name: str = "ks_two_sample") -> TestReport:
    d = ks_two_sample_statistic(a, b)
    na, nb = len(a), len(b)
    scale = math.sqrt((na + nb) / (na * nb))
    critical = kolmogorov_critical(alpha) * scale
    return _report(name, d, critical, kolmogorov_sf(d / scale), na + nb)


def chi_square_gof(counts, expected, alpha: float, name: str = "chi_square_gof") -> TestReport:
    counts = np.asarray(counts, dtype=float)
    expected = np.asarray(expected, dtype=float)
    if counts.shape != expected.shape or counts.ndim != 1 or counts.size < 2:
        raise ValueError("counts and expected must be matching vectors with at least two bins")
    if np.any(expected < 5):
        raise ValueError("every expected count must be at least 5")
    if np.any(counts < 0):
        raise ValueError("counts must be nonnegative")
    if round(counts.sum()) != round(expected.sum()):
        raise ValueError("counts and expected must have the same total")
    statistic = float(np.sum((counts - expected) ** 2 / expected))
    dof = counts.size - 1
    critical = chi_square_quantile(1.0 - alpha, dof)
    return _report(name, statistic, critical, gammaincc(dof / 2.0, statistic / 2.0), int(counts.sum()))


def chi_square_quantile(q: float, dof: int) -> float:
    """Inverse of the chi-square CDF by bisection on the incomplete gamma."""
    lo, hi = 0.0, max(10.0, 10.0 * dof)
    while gammaincc(dof / 2.0, hi / 2.0) > 1.0 - q:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gammaincc(dof / 2.0, mid / 2.0) > 1.0 - q:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12 * hi:
            break
    return 0.5 * (lo + hi)


def moment_z_test(samples, target_mean: float, alpha: float, name: str = "moment_z_test") -> TestReport:
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n < 30:
        raise ValueError(f"moment test needs at least 30 samples, got {n}")
    if np.ptp(x) == 0.0:
        # constant samples: rounding in the mean must not masquerade as a deviation
        diff, se = abs(float(x[0]) - target_mean), 0.0
    else:
        diff = abs(float(x.mean()) - target_mean)
        se = float(x.std(ddof=1)) / math.sqrt(n)
    if se == 0.0:
        z = 0.0 if diff == 0.0 else math.inf
    else:
        z = diff / se
    p = 2.0 * (1.0 - normal_cdf(z)) if math.isfinite(z) else 0.0
    return _report(name, z, two_sided_normal_quantile(alpha), p, n)


def alpha_for_sigma(k: float) -> float:
    """Two-sided level whose normal critical value is ``k`` standard errors."""
    return 2.0 * (1.0 - normal_cdf(k))


def reports_passed(reports) -> bool:
    return all(r.passed for r in reports)
