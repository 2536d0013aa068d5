"""Largest GUE eigenvalue through the beta = 2 Hermite tridiagonal model.

The symmetric tridiagonal matrix with N(0, 1) diagonal and off-diagonal entries
chi_{2(m-k)} / sqrt(2) has eigenvalue density proportional to
prod |l_i - l_j|^2 exp(-sum l_k^2 / 2). With this scaling the 1 x 1 case is a
standard normal, the same law as B(1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import sample_gamma
from .rng import RandomStream, standard_normal

BISECTION_TOL = 1e-10


@dataclass(frozen=True)
class HermiteTridiagonal:
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        diag = np.atleast_1d(np.asarray(self.diag, dtype=float))
        offdiag = np.atleast_1d(np.asarray(self.offdiag, dtype=float))
        if diag.ndim != 1 or offdiag.ndim != 1 or offdiag.size != diag.size - 1:
            raise ValueError("need m diagonal and m - 1 off-diagonal entries")
        if np.any(offdiag < 0):
            raise ValueError("off-diagonal entries must be nonnegative")
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offdiag", offdiag)

    @property
    def m(self) -> int:
        return self.diag.size

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


@dataclass(frozen=True)
class EigenSample:
    eigenvalues: np.ndarray

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])


def _offdiag_draws(m: int, stream: RandomStream, count: int) -> np.ndarray:
    # chi^2_{2j} / 2 is Gamma(j), so chi_{2j} / sqrt(2) = sqrt(Gamma(j)).
    cols = [np.sqrt(sample_gamma(float(m - k), stream, count)) for k in range(1, m)]
    return np.column_stack(cols) if cols else np.empty((count, 0))


def sample_tridiagonal(m: int, stream: RandomStream) -> HermiteTridiagonal:
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    diag = standard_normal(stream, m)
    return HermiteTridiagonal(diag, _offdiag_draws(m, stream, 1)[0])


def sturm_count(diag: np.ndarray, offdiag: np.ndarray, x) -> np.ndarray:
    """Number of eigenvalues strictly below ``x``.

    Works on batches: ``diag`` is (..., m), ``offdiag`` is (..., m-1) and ``x``
    broadcasts against the leading axes.
    """
    diag = np.asarray(diag, dtype=float)
    offdiag = np.asarray(offdiag, dtype=float)
    x = np.asarray(x, dtype=float)
    q = diag[..., 0] - x
    count = (q < 0).astype(np.int64)
    for k in range(1, diag.shape[-1]):
        q = np.where(q == 0.0, np.finfo(float).tiny, q)
        q = diag[..., k] - x - offdiag[..., k - 1] ** 2 / q
        count += q < 0
    return count


def gershgorin_bounds(diag: np.ndarray, offdiag: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    diag = np.asarray(diag, dtype=float)
    offdiag = np.abs(np.asarray(offdiag, dtype=float))
    radius = np.zeros(diag.shape)
    radius[..., :-1] += offdiag
    radius[..., 1:] += offdiag
    return (diag - radius).min(axis=-1), (diag + radius).max(axis=-1)


def _bisect(diag, offdiag, index, tol):
    """Eigenvalue number ``index`` (0-based, ascending) for every matrix in the batch."""
    lo, hi = gershgorin_bounds(diag, offdiag)
    lo = lo - tol
    hi = hi + tol
    while np.any(hi - lo > tol):
        mid = 0.5 * (lo + hi)
        below = sturm_count(diag, offdiag, mid) > index
        hi = np.where(below, mid, hi)
        lo = np.where(below, lo, mid)
    return 0.5 * (lo + hi)


def eigenvalues(t: HermiteTridiagonal, tol: float = BISECTION_TOL) -> EigenSample:
    vals = np.array([float(_bisect(t.diag, t.offdiag, i, tol)) for i in range(t.m)])
    return EigenSample(np.sort(vals))


def largest_eigenvalue(t: HermiteTridiagonal, tol: float = BISECTION_TOL) -> float:
    return float(_bisect(t.diag, t.offdiag, t.m - 1, tol))


def sample_lambda_max(m: int, count: int, stream: RandomStream, tol: float = BISECTION_TOL) -> np.ndarray:
    """``count`` independent draws of the largest eigenvalue of the m x m model."""
    if m < 1 or count < 1:
        raise ValueError(f"need m >= 1 and count >= 1, got m={m}, count={count}")
    diag = standard_normal(stream, (count, m))
    offdiag = _offdiag_draws(m, stream, count)
    if m == 1:
        return diag[:, 0].copy()
    return _bisect(diag, offdiag, m - 1, tol)
