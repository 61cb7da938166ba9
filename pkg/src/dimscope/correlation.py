"""Empirical correlation integral (density of neighbours)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dimscope.data import RngHandle, as_rng
from dimscope.errors import InvalidInputError

DEFAULT_MAX_POINTS = 1000


@dataclass(frozen=True)
class EcdfCurve:
    """Sorted ``(r, rho)`` pairs of an empirical correlation integral.

    The k-th smallest of ``n_pairs`` distances carries ``rho = (k-1)/n_pairs``.
    Subsampled curves keep ``n_pairs`` of the curve they came from, which is
    what :meth:`evaluate` needs to recover the step height.
    """

    r: np.ndarray
    rho: np.ndarray
    n_pairs: int

    def __post_init__(self):
        r = np.asarray(self.r, dtype=np.float64)
        rho = np.asarray(self.rho, dtype=np.float64)
        if r.shape != rho.shape or r.ndim != 1:
            raise InvalidInputError("r and rho must be 1-D arrays of equal length")
        r.setflags(write=False)
        rho.setflags(write=False)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "rho", rho)

    def __len__(self) -> int:
        return self.r.size

    def evaluate(self, radius):
        """Fraction of pairs at distance <= radius (exact on a full curve)."""
        q = np.asarray(radius, dtype=np.float64)
        pos = np.searchsorted(self.r, q, side="right") - 1
        vals = np.where(pos >= 0, self.rho[np.maximum(pos, 0)] + 1.0 / self.n_pairs, 0.0)
        vals = np.minimum(vals, 1.0)
        return float(vals) if vals.ndim == 0 else vals


def empirical_correlation_integral(dists) -> EcdfCurve:
    d = np.asarray(dists, dtype=np.float64)
    if d.ndim != 1 or d.size == 0:
        raise InvalidInputError("distance list must be a non-empty 1-D array")
    if np.any(d[1:] < d[:-1]):
        d = np.sort(d, kind="stable")
    m = d.size
    return EcdfCurve(d, np.arange(m, dtype=np.float64) / m, m)


def subsample_curve(
    curve: EcdfCurve, max_points: int = DEFAULT_MAX_POINTS, rng: RngHandle | int | None = None
) -> EcdfCurve:
    """Uniform random subset of ``min(max_points, len(curve))`` points, kept in r order."""
    if max_points < 2:
        raise InvalidInputError(f"max_points must be >= 2, got {max_points}")
    m = len(curve)
    if m <= max_points:
        return curve
    idx = as_rng(rng).generator().choice(m, size=max_points, replace=False)
    idx.sort()
    return EcdfCurve(curve.r[idx], curve.rho[idx], curve.n_pairs)
