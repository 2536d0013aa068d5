"""Maximal partition sum over ordered time points.

For a grid of m paths the functional is

    D_m = max over 0 = k_0 <= k_1 <= ... <= k_m = n of
          sum_i values[i, k_i] - values[i, k_{i-1}]

and is computed with the last-passage recursion

    best_1(k)     = values[0, k]
    best_{i+1}(k) = values[i, k] + max_{j <= k} (best_i(j) - values[i, j])

in O(m n) time. Ties in the running maximum keep the earliest index, so the
traceback returns, among all optimal tuples, the one with the smallest k_{m-1},
then the smallest k_{m-2} given that, and so on. ``brute_force`` applies the
same rule by enumeration.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .brownian import BrownianGrid

ENUMERATION_LIMIT = 10**7


@dataclass(frozen=True)
class MaximizerResult:
    value: float
    indices: tuple[int, ...]
    n: int

    @property
    def m(self) -> int:
        return len(self.indices) + 1

    @property
    def theta(self) -> tuple[float, ...]:
        return tuple(k / self.n for k in self.indices)

    @property
    def gaps(self) -> tuple[float, ...]:
        edges = (0,) + self.indices + (self.n,)
        return tuple((b - a) / self.n for a, b in zip(edges[:-1], edges[1:]))


def _prefix_argmax(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Running maximum of ``a`` and the earliest index attaining it."""
    running = np.maximum.accumulate(a)
    record = np.empty(a.shape, dtype=bool)
    record[0] = True
    np.greater(a[1:], running[:-1], out=record[1:])
    positions = np.where(record, np.arange(a.size), 0)
    return running, np.maximum.accumulate(positions)


def maximize(grid: BrownianGrid) -> MaximizerResult:
    values = grid.values
    m, n = grid.m, grid.n
    best = values[0]
    choice = np.empty((m - 1, n + 1), dtype=np.int64)
    for i in range(1, m):
        running, arg = _prefix_argmax(best - values[i])
        choice[i - 1] = arg
        best = values[i] + running

    indices = []
    k = n
    for i in range(m - 1, 0, -1):
        k = int(choice[i - 1, k])
        indices.append(k)
    return MaximizerResult(float(best[n]), tuple(reversed(indices)), n)


def _partition_sum(values: np.ndarray, ks: tuple[int, ...]) -> float:
    n = values.shape[1] - 1
    edges = (0,) + tuple(ks) + (n,)
    total = 0.0
    for i in range(values.shape[0]):
        total += values[i, edges[i + 1]] - values[i, edges[i]]
    return total


def enumeration_size(m: int, n: int) -> int:
    return math.comb(n + m - 1, m - 1)


def brute_force(grid: BrownianGrid) -> MaximizerResult:
    m, n = grid.m, grid.n
    size = enumeration_size(m, n)
    if size > ENUMERATION_LIMIT:
        raise ValueError(f"{size} monotone tuples exceeds the enumeration limit {ENUMERATION_LIMIT}")

    best_value = -math.inf
    best_ks: tuple[int, ...] = ()
    for ks in itertools.combinations_with_replacement(range(n + 1), m - 1):
        total = _partition_sum(grid.values, ks)
        if total > best_value or (total == best_value and ks[::-1] < best_ks[::-1]):
            best_value, best_ks = total, ks
    return MaximizerResult(best_value, best_ks, n)


def snap_to_grid(theta, n: int) -> np.ndarray:
    """Nearest grid index for each entry, halves rounded up."""
    return np.floor(np.asarray(theta, dtype=float) * n + 0.5).astype(np.int64)


def _check_theta(theta: np.ndarray, m: int) -> None:
    if theta.shape[-1] != m - 1:
        raise ValueError(f"theta needs {m - 1} entries, got {theta.shape[-1]}")
    if np.any(theta < 0.0) or np.any(theta > 1.0) or np.any(np.isnan(theta)):
        raise ValueError("theta entries must lie in [0, 1]")
    if np.any(np.diff(theta, axis=-1) < 0.0):
        raise ValueError("theta must be nondecreasing")


def evaluate_partition(grid: BrownianGrid, theta) -> float:
    theta = np.asarray(theta, dtype=float).reshape(-1)
    _check_theta(theta, grid.m)
    return _partition_sum(grid.values, tuple(int(k) for k in snap_to_grid(theta, grid.n)))


def evaluate_partitions(grid: BrownianGrid, thetas) -> np.ndarray:
    """Vectorized :func:`evaluate_partition` over the rows of ``thetas``."""
    thetas = np.asarray(thetas, dtype=float)
    if thetas.ndim != 2:
        raise ValueError("thetas must be a 2-d array")
    _check_theta(thetas, grid.m)
    m, n = grid.m, grid.n
    ks = snap_to_grid(thetas, n)
    count = ks.shape[0]
    edges = np.hstack([np.zeros((count, 1), np.int64), ks, np.full((count, 1), n, np.int64)])
    total = np.zeros(count)
    for i in range(m):
        total += grid.values[i, edges[:, i + 1]] - grid.values[i, edges[:, i]]
    return total
