"""Monte Carlo campaigns that check the maximizer law against its closed forms."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import rng
from .brownian import BrownianGrid, simulate, time_reverse_exchange
from .distributions import (
    ARCSINE,
    BetaSpec,
    DirichletSpec,
    arcsine_quartiles,
    beta_cdf,
    f_m_density,
    gap_density,
    gaps_to_theta,
    partial_sum_marginal,
    sample_dirichlet,
)
from .gue import sample_lambda_max
from .maximizer import evaluate_partitions, maximize
from .special import kolmogorov_sf
from .stats import (
    TestReport,
    alpha_for_sigma,
    chi_square_gof,
    ks_one_sample,
    ks_statistic,
    ks_two_sample,
    moment_z_test,
    normal_cdf,
)

GRID_BIAS_ALLOWANCE = 0.02
CHUNK = 64


@dataclass(frozen=True)
class CampaignConfig:
    m: int
    n_grid: int = 4096
    n_replicas: int = 2000
    alpha: float = 0.01
    master_seed: int = 0

    def validate(self, statistical: bool = True) -> "CampaignConfig":
        if self.m < 2:
            raise ValueError(f"m must be at least 2, got {self.m}")
        if self.n_grid < 1 or self.n_replicas < 1:
            raise ValueError("n_grid and n_replicas must be positive")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0 <= self.master_seed <= rng.U64_MAX:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        if statistical and (self.n_grid < 64 or self.n_replicas < 1000):
            raise ValueError("statistical campaigns need n_grid >= 64 and n_replicas >= 1000")
        return self

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ThetaSampleSet:
    m: int
    n_grid: int
    indices: np.ndarray  # replicas x (m-1) grid indices of the maximizers
    d_values: np.ndarray

    @property
    def n_replicas(self) -> int:
        return self.d_values.size

    @property
    def thetas(self) -> np.ndarray:
        return self.indices / self.n_grid

    @property
    def gaps(self) -> np.ndarray:
        edges = np.hstack(
            [np.zeros((self.n_replicas, 1), np.int64), self.indices, np.full((self.n_replicas, 1), self.n_grid)]
        )
        return np.diff(edges, axis=1) / self.n_grid


@dataclass(frozen=True)
class EmpiricalMaxResult:
    d_n_m: float
    d_m: float
    sample_count: int
    prefix_max: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class JointObservables:
    theta: tuple[float, ...]
    d_value: float
    terminal_values: tuple[float, ...]


# -- replica execution -------------------------------------------------------


def _replica_chunk(m, n_grid, master_seed, namespace, replicas, reverse):
    indices = np.empty((len(replicas), m - 1), np.int64)
    values = np.empty(len(replicas))
    for row, r in enumerate(replicas):
        grid = simulate(m, n_grid, rng.stream_for(master_seed, r, namespace))
        if reverse:
            grid = time_reverse_exchange(grid)
        res = maximize(grid)
        indices[row] = res.indices
        values[row] = res.value
    return indices, values


def _run_replicas(m, n_grid, n_replicas, master_seed, namespace, workers, reverse=False):
    chunks = [range(s, min(s + CHUNK, n_replicas)) for s in range(0, n_replicas, CHUNK)]
    args = [(m, n_grid, master_seed, namespace, c, reverse) for c in chunks]
    if workers <= 1 or len(chunks) == 1:
        parts = [_replica_chunk(*a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_replica_chunk, *zip(*args)))
    # pool.map preserves submission order, so rows stay sorted by replica index
    return np.vstack([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def run_theta_campaign(
    config: CampaignConfig, workers: int = 1, namespace: int = rng.NS_THETA, statistical: bool = True
) -> ThetaSampleSet:
    """Simulate, maximize and record every replica; replica r uses stream r."""
    config.validate(statistical)
    indices, values = _run_replicas(
        config.m, config.n_grid, config.n_replicas, config.master_seed, namespace, workers
    )
    return ThetaSampleSet(config.m, config.n_grid, indices, values)


def sample_d_values(m, n_grid, n_replicas, master_seed, namespace=rng.NS_THETA, workers=1) -> np.ndarray:
    """D_m on independent grids; unlike campaigns this allows m = 1."""
    if m == 1:
        return np.array(
            [simulate(1, n_grid, rng.stream_for(master_seed, r, namespace)).values[0, -1] for r in range(n_replicas)]
        )
    return _run_replicas(m, n_grid, n_replicas, master_seed, namespace, workers)[1]


# -- marginal laws -----------------------------------------------------------


def _beta_cdf_fn(spec: BetaSpec):
    return lambda x: beta_cdf(spec, min(1.0, max(0.0, x)))


def gap_marginal(m: int) -> BetaSpec:
    return BetaSpec(0.5, (m - 1) / 2.0)


def theta_marginal_reports(samples: ThetaSampleSet, alpha: float) -> list[TestReport]:
    """KS of every theta_i against Beta(i/2, (m-i)/2), the last one being Beta((m-1)/2, 1/2)."""
    m = samples.m
    return [
        ks_one_sample(
            samples.thetas[:, i - 1],
            _beta_cdf_fn(partial_sum_marginal(m, i)),
            alpha,
            name=f"ks theta_{i} ~ Beta({i}/2, {m - i}/2)",
        )
        for i in range(1, m)
    ]


def gap_marginal_reports(samples: ThetaSampleSet, alpha: float) -> list[TestReport]:
    m = samples.m
    spec = gap_marginal(m)
    return [
        ks_one_sample(samples.gaps[:, i], _beta_cdf_fn(spec), alpha, name=f"ks gap_{i + 1} ~ Beta(1/2, {m - 1}/2)")
        for i in range(m)
    ]


def mean_spacing_reports(samples: ThetaSampleSet, alpha: float) -> list[TestReport]:
    m = samples.m
    return [
        moment_z_test(samples.thetas[:, i - 1], i / m, alpha, name=f"mean theta_{i} = {i}/{m}")
        for i in range(1, m)
    ]


def fraction_report(flags, p: float, k_sigma: float, name: str) -> TestReport:
    """|fraction - p| in units of the null binomial standard error, compared to ``k_sigma``."""
    flags = np.asarray(flags, dtype=bool)
    n = flags.size
    se = math.sqrt(p * (1.0 - p) / n)
    z = abs(flags.mean() - p) / se
    return TestReport(name, float(z), float(k_sigma), 2.0 * (1.0 - normal_cdf(z)), n, bool(z < k_sigma))


def quartile_reports(samples: ThetaSampleSet, k_sigma: float = 3.0) -> list[TestReport]:
    """Arcsine bimodality: a quarter of theta_1 below (2 - sqrt 2)/4 and a quarter above (2 + sqrt 2)/4."""
    if samples.m != 2:
        raise ValueError("quartile check applies to m = 2")
    q1, _, q3 = arcsine_quartiles()
    t = samples.thetas[:, 0]
    return [
        fraction_report(t < q1, 0.25, k_sigma, "fraction theta_1 < (2-sqrt2)/4 = 1/4"),
        fraction_report(t > q3, 0.25, k_sigma, "fraction theta_1 > (2+sqrt2)/4 = 1/4"),
    ]


def pooled_uniform_report(samples: ThetaSampleSet, band: float = 0.05) -> TestReport:
    """KS distance of all theta_i pooled together from the uniform CDF, against a fixed band."""
    pooled = samples.thetas.ravel()
    d = ks_statistic(pooled, lambda x: min(1.0, max(0.0, x)))
    # pooled coordinates are dependent, so the p-value is indicative only
    p = kolmogorov_sf(math.sqrt(pooled.size) * d)
    return TestReport("pooled thetas near uniform", d, band, p, pooled.size, bool(d < band))


# -- simplex binning for m = 3 ----------------------------------------------

# Stick-breaking coordinates u = gap_1, v = gap_2 / (1 - gap_1). Under the
# Dirichlet(1/2, 1/2, 1/2) law u has CDF sqrt(u) and v is arcsine, so these
# edges give 20 bins of equal probability.
U_EDGES = np.array([(k / 5.0) ** 2 for k in range(6)])
V_EDGES = np.array([math.sin(math.pi * k / 8.0) ** 2 for k in range(5)])


def stick_breaking_coordinates(gaps) -> tuple[np.ndarray, np.ndarray]:
    gaps = np.asarray(gaps, dtype=float)
    u = gaps[:, 0]
    rest = 1.0 - u
    with np.errstate(invalid="ignore", divide="ignore"):
        v = np.where(rest > 0, gaps[:, 1] / np.where(rest > 0, rest, 1.0), 0.0)
    return u, np.clip(v, 0.0, 1.0)


def simplex_bin_counts(gaps, u_edges=U_EDGES, v_edges=V_EDGES) -> np.ndarray:
    u, v = stick_breaking_coordinates(gaps)
    iu = np.clip(np.searchsorted(u_edges, u, side="right") - 1, 0, len(u_edges) - 2)
    iv = np.clip(np.searchsorted(v_edges, v, side="right") - 1, 0, len(v_edges) - 2)
    nv = len(v_edges) - 1
    return np.bincount(iu * nv + iv, minlength=(len(u_edges) - 1) * nv)


def simplex_bin_probabilities(u_edges=U_EDGES, v_edges=V_EDGES, nodes: int = 24) -> np.ndarray:
    """Integrate the m = 3 maximizer density over each stick-breaking bin.

    Gauss-Legendre in (s, phi) with u = s^2 and v = sin^2 phi; the substitution
    cancels the inverse square-root singularities so the integrand is smooth.
    """
    x, w = np.polynomial.legendre.leggauss(nodes)
    probs = []
    for u0, u1 in zip(u_edges[:-1], u_edges[1:]):
        s0, s1 = math.sqrt(u0), math.sqrt(u1)
        for v0, v1 in zip(v_edges[:-1], v_edges[1:]):
            p0, p1 = math.asin(math.sqrt(v0)), math.asin(math.sqrt(v1))
            total = 0.0
            for xs, ws in zip(x, w):
                s = 0.5 * (s1 - s0) * xs + 0.5 * (s0 + s1)
                u = s * s
                for xp, wp in zip(x, w):
                    phi = 0.5 * (p1 - p0) * xp + 0.5 * (p0 + p1)
                    v = math.sin(phi) ** 2
                    theta = (u, u + v * (1.0 - u))
                    jac = (1.0 - u) * 2.0 * s * 2.0 * math.sin(phi) * math.cos(phi)
                    total += ws * wp * f_m_density(theta) * jac
            probs.append(total * 0.25 * (s1 - s0) * (p1 - p0))
    return np.array(probs)


def simplex_chi_square(gaps, alpha: float, name: str = "chi-square gaps vs f_3 on 20 simplex bins") -> TestReport:
    gaps = np.asarray(gaps, dtype=float)
    if gaps.ndim != 2 or gaps.shape[1] != 3:
        raise ValueError("simplex binning is defined for m = 3 gap vectors")
    counts = simplex_bin_counts(gaps)
    expected = simplex_bin_probabilities() * gaps.shape[0]
    # scale so totals match exactly despite quadrature rounding
    expected *= gaps.shape[0] / expected.sum()
    return chi_square_gof(counts, expected, alpha, name=name)


def f3_mass_monte_carlo(count: int, stream: rng.RandomStream) -> tuple[float, float]:
    """Total mass of the m = 3 density by importance sampling on the simplex.

    Proposal is Dirichlet(1/4, 1/4, 1/4), heavier at the faces than the target,
    which keeps the weights square integrable.
    """
    proposal = DirichletSpec.symmetric(3, 0.25)
    gaps = sample_dirichlet(proposal, stream, count)
    log_q_norm = math.lgamma(0.75) - 3.0 * math.lgamma(0.25)
    weights = np.empty(count)
    for row, g in enumerate(gaps):
        q = math.exp(log_q_norm - 0.75 * float(np.log(g).sum()))
        weights[row] = gap_density(g) / q
    return float(weights.mean()), float(weights.std(ddof=1) / math.sqrt(count))


# -- time reversal -----------------------------------------------------------


def test_time_reversal(set_a: ThetaSampleSet, set_b: ThetaSampleSet, alpha: float) -> list[TestReport]:
    """theta_i from one campaign against 1 - theta_{m-i} from an independent one."""
    if (set_a.m, set_a.n_grid, set_a.n_replicas) != (set_b.m, set_b.n_grid, set_b.n_replicas):
        raise ValueError("time-reversal comparison needs campaigns with identical configurations")
    m = set_a.m
    return [
        ks_two_sample(
            set_a.thetas[:, i - 1],
            1.0 - set_b.thetas[:, m - i - 1],
            alpha,
            name=f"time reversal theta_{i} vs 1 - theta_{m - i}",
        )
        for i in range(1, m)
    ]


test_time_reversal.__test__ = False


def pathwise_reversal(m: int, n_grid: int, n_replicas: int, master_seed: int, workers: int = 1):
    """Maximize each grid and its time-reversed exchange; count replicas where they disagree.

    Returns (mismatches, largest value difference).
    """
    idx_a, val_a = _run_replicas(m, n_grid, n_replicas, master_seed, rng.NS_THETA, workers)
    idx_b, val_b = _run_replicas(m, n_grid, n_replicas, master_seed, rng.NS_THETA, workers, reverse=True)
    mapped = n_grid - idx_a[:, ::-1]
    mismatches = int(np.any(mapped != idx_b, axis=1).sum()) + int(np.sum(np.abs(val_a - val_b) > 1e-12))
    return mismatches, float(np.max(np.abs(val_a - val_b)))


def pathwise_reversal_report(m, n_grid, n_replicas, master_seed, workers=1) -> TestReport:
    mismatches, _ = pathwise_reversal(m, n_grid, n_replicas, master_seed, workers)
    return TestReport(
        "pathwise time reversal mismatches", float(mismatches), 1.0, 1.0 if mismatches == 0 else 0.0,
        n_replicas, mismatches == 0,
    )


# -- GUE identity ------------------------------------------------------------


def gue_identity_reports(d_values, lambda_values, alpha: float, m: int, allowance=GRID_BIAS_ALLOWANCE):
    d = np.asarray(d_values, dtype=float)
    lam = np.asarray(lambda_values, dtype=float)
    ks = ks_two_sample(d, lam, alpha, name=f"D_{m} vs GUE lambda_max two-sample KS")
    diff = float(d.mean() - lam.mean())
    se = math.sqrt(d.var(ddof=1) / d.size + lam.var(ddof=1) / lam.size)
    mean_report = TestReport(
        f"|mean D_{m} - mean lambda_max| <= 3 SE + {allowance}",
        abs(diff), 3.0 * se + allowance, 2.0 * (1.0 - normal_cdf(abs(diff) / se)), d.size + lam.size,
        abs(diff) < 3.0 * se + allowance,
    )
    z = diff / se
    sign_report = TestReport(
        f"mean D_{m} not above mean lambda_max (grid bias sign)",
        z, 3.0, 1.0 - normal_cdf(z), d.size + lam.size, z < 3.0,
    )
    return [ks, mean_report, sign_report]


def test_gue_identity(m: int, n_grid: int, n_replicas: int, alpha: float, seed: int, workers: int = 1,
                      d_values=None) -> list[TestReport]:
    """Compare D_m on grids with the largest eigenvalue of the m x m GUE."""
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    if d_values is None:
        d_values = sample_d_values(m, n_grid, n_replicas, seed, workers=workers)
    lam = sample_lambda_max(m, n_replicas, rng.stream_for(seed, 0, rng.NS_GUE))
    return gue_identity_reports(d_values, lam, alpha, m)


test_gue_identity.__test__ = False


# -- empirical maximum over sampled partitions -------------------------------


def empirical_dn(grid: BrownianGrid, sample_count: int, stream: rng.RandomStream) -> EmpiricalMaxResult:
    """Best partition sum over ``sample_count`` Dirichlet(1/2, ..., 1/2) point sets."""
    if sample_count < 1:
        raise ValueError("sample_count must be positive")
    gaps = sample_dirichlet(DirichletSpec.symmetric(grid.m), stream, sample_count)
    sums = evaluate_partitions(grid, gaps_to_theta(gaps))
    prefix = np.maximum.accumulate(sums)
    return EmpiricalMaxResult(float(prefix[-1]), maximize(grid).value, sample_count, prefix)


def empirical_dn_table(m: int, n_grid: int, n_grids: int, sample_counts, master_seed: int):
    """Mean of D_m - D^n_m over independent grids for each sample count.

    One batch of max(sample_counts) point sets is drawn per grid and the smaller
    counts use its prefixes, so each grid's gap is nonincreasing in the count.
    Returns (table rows, per-grid violations of d_n_m <= d_m).
    """
    sample_counts = sorted(int(c) for c in sample_counts)
    largest = sample_counts[-1]
    gaps = np.empty((n_grids, len(sample_counts)))
    d_m = np.empty(n_grids)
    violations = 0
    for g in range(n_grids):
        grid = simulate(m, n_grid, rng.stream_for(master_seed, g, rng.NS_THETA))
        res = empirical_dn(grid, largest, rng.stream_for(master_seed, g, rng.NS_DIRICHLET))
        d_m[g] = res.d_m
        picks = res.prefix_max[np.array(sample_counts) - 1]
        violations += int(np.sum(picks > res.d_m))
        gaps[g] = res.d_m - picks
    rows = [
        {
            "sample_count": c,
            "mean_d_m": float(d_m.mean()),
            "mean_d_n_m": float((d_m - gaps[:, j]).mean()),
            "mean_gap": float(gaps[:, j].mean()),
            "se_gap": float(gaps[:, j].std(ddof=1) / math.sqrt(n_grids)) if n_grids > 1 else float("nan"),
        }
        for j, c in enumerate(sample_counts)
    ]
    return rows, violations


# -- joint observables -------------------------------------------------------


def record_joint_observables(grid: BrownianGrid) -> JointObservables:
    res = maximize(grid)
    return JointObservables(res.theta, res.value, tuple(float(v) for v in grid.terminal_values))


def joint_campaign(m: int, n_grid: int, n_replicas: int, master_seed: int) -> list[JointObservables]:
    return [
        record_joint_observables(simulate(m, n_grid, rng.stream_for(master_seed, r, rng.NS_THETA)))
        for r in range(n_replicas)
    ]


# -- full verification -------------------------------------------------------


def verification_reports(
    config: CampaignConfig,
    primary: ThetaSampleSet,
    workers: int = 1,
    refine: bool = False,
    pathwise_replicas: int = 1000,
) -> list[TestReport]:
    """Every check that applies to ``config.m``, computed from a finished campaign."""
    m, alpha = config.m, config.alpha
    reports = theta_marginal_reports(primary, alpha)
    reports += gap_marginal_reports(primary, alpha)
    reports += mean_spacing_reports(primary, alpha)
    if m == 2:
        reports += quartile_reports(primary)
    if m == 3:
        reports.append(simplex_chi_square(primary.gaps, alpha, name="chi-square maximizer gaps vs f_3 on 20 bins"))
    if m >= 20:
        reports.append(pooled_uniform_report(primary))

    reversed_set = run_theta_campaign(config, workers=workers, namespace=rng.NS_REVERSAL)
    reports += test_time_reversal(primary, reversed_set, alpha)
    reports.append(
        pathwise_reversal_report(m, config.n_grid, min(pathwise_replicas, config.n_replicas), config.master_seed,
                                 workers)
    )
    reports += test_gue_identity(m, config.n_grid, config.n_replicas, alpha, config.master_seed,
                                 d_values=primary.d_values)

    if refine:
        fine = CampaignConfig(m, 2 * config.n_grid, config.n_replicas, alpha, config.master_seed)
        fine_set = run_theta_campaign(fine, workers=workers)
        for r in theta_marginal_reports(fine_set, alpha):
            reports.append(TestReport(f"{r.name} @ n_grid={fine.n_grid}", r.statistic, r.critical_value,
                                      r.p_value, r.sample_size, r.passed))
    return reports


def arcsine_report(samples: ThetaSampleSet, alpha: float) -> TestReport:
    return ks_one_sample(samples.thetas[:, 0], _beta_cdf_fn(ARCSINE), alpha, name="ks theta_1 ~ arcsine")


SIGMA3_ALPHA = alpha_for_sigma(3.0)
