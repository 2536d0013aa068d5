"""Discretized m-dimensional standard Brownian motion on [0, 1]."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .rng import RandomStream, standard_normal

# Increments are rounded to multiples of 2**-40. Partial sums of such values stay
# exact in double precision while |B| < 2**12, so the maximizer recursion, the
# time-reversal map and every partition sum are free of rounding error.
QUANTUM = 2.0**-40


@dataclass(frozen=True)
class BrownianGrid:
    """``values[i, k]`` is coordinate ``i`` of the path at time ``k / n``."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 2:
            raise ValueError("values must be an m x (n+1) array with m >= 1 and n >= 1")
        if np.any(values[:, 0] != 0.0):
            raise ValueError("every path must start at 0")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1] - 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n + 1) / self.n

    @property
    def terminal_values(self) -> np.ndarray:
        return self.values[:, -1].copy()


def simulate(m: int, n: int, stream: RandomStream) -> BrownianGrid:
    """Cumulative sums of i.i.d. N(0, 1/n) increments, one row per coordinate."""
    if m < 1 or n < 1:
        raise ValueError(f"need m >= 1 and n >= 1, got m={m}, n={n}")
    increments = standard_normal(stream, (m, n)) * np.sqrt(1.0 / n)
    increments = np.round(increments / QUANTUM) * QUANTUM
    values = np.zeros((m, n + 1))
    np.cumsum(increments, axis=1, out=values[:, 1:])
    return BrownianGrid(values)


def time_reverse_exchange(grid: BrownianGrid) -> BrownianGrid:
    """Map coordinate i to ``C^i(t) = B^{m-i+1}(1) - B^{m-i+1}(1 - t)``.

    On the grid this is ``out[i, k] = values[m-1-i, n] - values[m-1-i, n-k]``.
    Applying it twice returns the original grid bit for bit.
    """
    flipped = grid.values[::-1, ::-1]
    return BrownianGrid(flipped[:, :1] - flipped)


def dump_csv(grid: BrownianGrid, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"B{i + 1}" for i in range(grid.m)])
        for k, t in enumerate(grid.times):
            writer.writerow([format(t, ".17g")] + [format(v, ".17g") for v in grid.values[:, k]])
