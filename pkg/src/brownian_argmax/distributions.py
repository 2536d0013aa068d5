"""Beta and Dirichlet laws of the maximizing partition: densities, CDFs, samplers."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import RandomStream, open_uniform, standard_normal
from .special import betainc, lgamma


@dataclass(frozen=True)
class BetaSpec:
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"Beta parameters must be positive, got a={self.a}, b={self.b}")


@dataclass(frozen=True)
class DirichletSpec:
    alphas: tuple[float, ...]

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        if len(alphas) < 1 or not all(a > 0 for a in alphas):
            raise ValueError(f"Dirichlet parameters must be positive, got {alphas}")
        object.__setattr__(self, "alphas", alphas)

    @classmethod
    def symmetric(cls, k: int, alpha: float = 0.5) -> "DirichletSpec":
        return cls((alpha,) * k)

    @property
    def k(self) -> int:
        return len(self.alphas)


ARCSINE = BetaSpec(0.5, 0.5)


def f_m_density(theta) -> float:
    """Joint density of the interior maximizers for m = len(theta) + 1.

    Requires 0 < theta_1 < ... < theta_{m-1} < 1; the density is infinite on the
    boundary of the chamber, so boundary points are rejected.
    """
    theta = [float(t) for t in np.atleast_1d(theta)]
    if not theta:
        raise ValueError("need at least one interior point (m >= 2)")
    edges = [0.0] + theta + [1.0]
    gaps = [b - a for a, b in zip(edges[:-1], edges[1:])]
    if any(g <= 0.0 for g in gaps):
        raise ValueError("theta must be strictly increasing inside (0, 1)")
    return gap_density(gaps)


def gap_density(gaps) -> float:
    """The same density written in the gap coordinates (positive, summing to one).

    Useful when gaps are far below the resolution of the partition points.
    """
    gaps = [float(g) for g in gaps]
    if len(gaps) < 2 or any(g <= 0.0 for g in gaps):
        raise ValueError("need at least two positive gaps")
    m = len(gaps)
    log_density = lgamma(m / 2.0) - (m / 2.0) * math.log(math.pi) - 0.5 * sum(math.log(g) for g in gaps)
    return math.exp(log_density)


def beta_density(spec: BetaSpec, x: float) -> float:
    if not 0.0 < x < 1.0:
        raise ValueError(f"x must lie in (0, 1), got {x}")
    a, b = spec.a, spec.b
    log_norm = lgamma(a + b) - lgamma(a) - lgamma(b)
    return math.exp(log_norm + (a - 1.0) * math.log(x) + (b - 1.0) * math.log1p(-x))


def beta_cdf(spec: BetaSpec, x: float) -> float:
    return betainc(spec.a, spec.b, x)


def beta_cdf_array(spec: BetaSpec, xs) -> np.ndarray:
    xs = np.clip(np.asarray(xs, dtype=float), 0.0, 1.0)
    return np.array([betainc(spec.a, spec.b, float(x)) for x in xs.ravel()]).reshape(xs.shape)


def arcsine_cdf(x: float) -> float:
    return 2.0 / math.pi * math.asin(math.sqrt(x))


def arcsine_quartiles() -> tuple[float, float, float]:
    r = math.sqrt(2.0)
    return ((2.0 - r) / 4.0, 0.5, (2.0 + r) / 4.0)


def dirichlet_marginal(spec: DirichletSpec, i: int) -> BetaSpec:
    """Beta law of component ``i`` (0-based)."""
    a = spec.alphas[i]
    return BetaSpec(a, sum(spec.alphas) - a)


def partial_sum_marginal(m: int, i: int) -> BetaSpec:
    """Beta law of theta_i = gap_1 + ... + gap_i under Dirichlet(1/2, ..., 1/2) on m gaps."""
    return BetaSpec(i / 2.0, (m - i) / 2.0)


def _marsaglia_tsang(shape: float, stream: RandomStream, size: int) -> np.ndarray:
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(size)
    todo = np.arange(size)
    while todo.size:
        z = standard_normal(stream, todo.size)
        u = open_uniform(stream, todo.size)
        v = (1.0 + c * z) ** 3
        ok = v > 0
        with np.errstate(invalid="ignore", divide="ignore"):
            ok &= np.log(u) < 0.5 * z * z + d - d * v + d * np.log(np.where(ok, v, 1.0))
        out[todo[ok]] = d * v[ok]
        todo = todo[~ok]
    return out


def sample_gamma(shape: float, stream: RandomStream, size: int | None = None):
    """Gamma(shape, scale=1) variates.

    Shapes below one draw Gamma(shape + 1) and multiply by U**(1/shape).
    """
    if not shape > 0:
        raise ValueError(f"shape must be positive, got {shape}")
    count = 1 if size is None else int(size)
    if shape < 1.0:
        g = _marsaglia_tsang(shape + 1.0, stream, count)
        g *= open_uniform(stream, count) ** (1.0 / shape)
    else:
        g = _marsaglia_tsang(shape, stream, count)
    return float(g[0]) if size is None else g


def sample_dirichlet(spec: DirichletSpec, stream: RandomStream, size: int | None = None):
    """Normalized independent gammas; one row per draw when ``size`` is given."""
    count = 1 if size is None else int(size)
    g = np.column_stack([sample_gamma(a, stream, count) for a in spec.alphas])
    x = g / g.sum(axis=1, keepdims=True)
    return x[0] if size is None else x


def gaps_to_theta(gaps) -> np.ndarray:
    """Interior partition points (partial sums of all but the last gap), clipped to [0, 1]."""
    gaps = np.asarray(gaps, dtype=float)
    return np.clip(np.cumsum(gaps[..., :-1], axis=-1), 0.0, 1.0)
