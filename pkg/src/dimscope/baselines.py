"""Reference estimators: correlation dimension and (multiscale) PCA."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from dimscope.data import as_dataset, centered_gram, pairwise_distances
from dimscope.errors import InvalidInputError, UnfittableCurveError

DEFAULT_BAND = (0.0005, 0.05)
MASS_THRESHOLD = 0.95
RATIO_FLOOR = 1e-300
MIN_BALL = 5


@dataclass(frozen=True)
class CorrDimFit:
    d_est: float
    fit_band: tuple[float, float]
    n_points_used: int
    r_squared: float


def corrdim_estimate(data, band: tuple[float, float] = DEFAULT_BAND) -> CorrDimFit:
    """Slope of log rho against log r over a band of small distances.

    ``band`` holds quantiles of the pair distances; every curve point whose
    radius falls inside enters an ordinary least-squares line fit.
    """
    data = as_dataset(data)
    q_lo, q_hi = map(float, band)
    if not 0.0 <= q_lo < q_hi <= 1.0:
        raise InvalidInputError(f"band must satisfy 0 <= q_lo < q_hi <= 1, got {band}")
    if data.n_samples < 10:
        raise InvalidInputError(f"corrdim needs at least 10 samples, got {data.n_samples}")
    dists = pairwise_distances(data)
    m = dists.size
    rho = np.searchsorted(dists, dists, side="right") / m  # pairs within r, ties included
    r_lo, r_hi = np.quantile(dists, [q_lo, q_hi])
    use = (dists >= r_lo) & (dists <= r_hi) & (dists > 0)
    if use.sum() < 5:
        raise UnfittableCurveError(f"only {int(use.sum())} curve points inside the band; need 5")
    x, y = np.log(dists[use]), np.log(rho[use])
    if np.ptp(x) == 0:
        raise UnfittableCurveError("all distances in the band are equal")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return CorrDimFit(float(slope), (q_lo, q_hi), int(use.sum()), float(r2))


@dataclass(frozen=True)
class PcaSpectrum:
    """Covariance eigenvalues, descending, numerically-null ones set to zero."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=np.float64)
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)

    def __len__(self) -> int:
        return self.eigenvalues.size


def _clean_spectrum(ev: np.ndarray, dim: int, n: int) -> np.ndarray:
    ev = np.sort(np.clip(ev, 0.0, None))[::-1]
    full = np.zeros(dim)
    full[: min(dim, ev.size)] = ev[:dim]
    if full[0] > 0:
        # Same cutoff numpy's matrix_rank uses.
        full[full <= full[0] * max(n, dim) * np.finfo(float).eps] = 0.0
    return full


def _spectrum_from_gram(gram: np.ndarray, dim: int) -> np.ndarray:
    """Covariance spectrum of a point set given its (uncentered) Gram matrix."""
    n = gram.shape[0]
    row_mean = gram.mean(axis=1)
    g = gram - row_mean[:, None] - row_mean[None, :] + row_mean.mean()
    return _clean_spectrum(np.linalg.eigvalsh(g / n), dim, n)


def _spectrum_from_points(points: np.ndarray) -> np.ndarray:
    n, dim = points.shape
    x = points - points.mean(axis=0)
    if dim <= n:
        ev = np.linalg.eigvalsh(x.T @ x / n)
    else:
        ev = np.linalg.eigvalsh(x @ x.T / n)  # shares the nonzero spectrum
    return _clean_spectrum(ev, dim, n)


def pca_spectrum(data) -> PcaSpectrum:
    """Eigenvalues of the covariance of the mean-centered data."""
    data = as_dataset(data)
    if data.n_samples < 2:
        raise InvalidInputError("PCA needs at least 2 samples")
    return PcaSpectrum(_spectrum_from_points(data.points))


def gap_ratios(spectrum: PcaSpectrum) -> np.ndarray:
    """lambda_i / lambda_{i+1} for i = 1..D, with lambda_{D+1} = 0.

    Denominators are floored at 1e-300, so the drop onto the null space is
    always a candidate jump; a full-rank spectrum thus has its last jump at D.
    """
    ev = np.asarray(spectrum.eigenvalues, dtype=np.float64)
    nxt = np.append(ev[1:], 0.0)
    with np.errstate(over="ignore"):  # a drop onto exact zero may give inf
        return ev / np.maximum(nxt, RATIO_FLOOR)


def gap_ranking(spectrum: PcaSpectrum) -> np.ndarray:
    """1-based positions of the eigenvalue jumps, largest ratio first."""
    return np.argsort(-gap_ratios(spectrum), kind="stable") + 1


def mass_dimension(eigenvalues, threshold: float = MASS_THRESHOLD) -> int:
    ev = np.asarray(eigenvalues, dtype=np.float64)
    total = ev.sum()
    frac = np.cumsum(ev) / total
    return int(np.searchsorted(frac, threshold - 1e-12) + 1)


def gpca_estimate(spectrum: PcaSpectrum, criterion: str = "gap", threshold: float = MASS_THRESHOLD) -> int:
    """Global PCA dimension: largest eigenvalue gap, or 95% variance mass."""
    ev = np.asarray(spectrum.eigenvalues)
    if ev.size == 0:
        raise InvalidInputError("empty spectrum")
    if not np.any(ev > 0):
        raise InvalidInputError("spectrum is identically zero")
    if criterion == "gap":
        return int(np.argmax(gap_ratios(spectrum)) + 1)
    if criterion == "mass":
        return mass_dimension(ev, threshold)
    raise InvalidInputError(f"criterion must be 'gap' or 'mass', got {criterion!r}")


@dataclass(frozen=True)
class MpcaProfile:
    """Averaged local spectra per radius and their mass-criterion estimates."""

    radii: list[float]
    avg_spectra: np.ndarray  # (n_radii, D); rows of NaN where no ball qualified
    n_balls: list[int]
    mass_estimates: list[int | None]
    bound: tuple[int, int] | None

    def rows(self, max_index: int | None = None):
        """Rows of the mPCA CSV: radius, 1-based eigenvalue index, average."""
        top = self.avg_spectra.shape[1] if max_index is None else max_index
        for radius, spec, count in zip(self.radii, self.avg_spectra, self.n_balls):
            if count == 0:
                continue
            for i in range(top):
                yield (radius, i + 1, spec[i])


def mpca_profile(
    data, centers: Sequence[int], radius_scales: Sequence[float], threshold: float = MASS_THRESHOLD
) -> MpcaProfile:
    """Local PCA spectra averaged over balls of each radius around ``centers``.

    Balls with fewer than 5 samples are skipped; the mass criterion is applied
    to each averaged spectrum and summarized as a [min, max] bound.
    """
    data = as_dataset(data)
    n, dim = data.points.shape
    centers = [int(c) for c in centers]
    if not centers or any(not 0 <= c < n for c in centers):
        raise InvalidInputError("centers must be valid, non-empty sample indices")
    radii = sorted(float(r) for r in radius_scales)
    gram = centered_gram(data.points) if dim > n else None
    center_dists = [np.linalg.norm(data.points - data.points[c], axis=1) for c in centers]

    spectra = np.full((len(radii), dim), np.nan)
    counts, estimates = [], []
    for k, radius in enumerate(radii):
        acc = np.zeros(dim)
        used = 0
        for dist in center_dists:
            idx = np.flatnonzero(dist < radius)
            if idx.size < MIN_BALL:
                continue
            if gram is not None and dim > idx.size:
                acc += _spectrum_from_gram(gram[np.ix_(idx, idx)], dim)
            else:
                acc += _spectrum_from_points(data.points[idx])
            used += 1
        counts.append(used)
        if used and acc.sum() > 0:
            spectra[k] = acc / used
            estimates.append(mass_dimension(spectra[k], threshold))
        else:
            estimates.append(None)
    valid = [e for e in estimates if e is not None]
    bound = (min(valid), max(valid)) if valid else None
    return MpcaProfile(radii, spectra, counts, estimates, bound)


def default_mpca_radii(data, quantiles: Sequence[float] = tuple(0.05 * k for k in range(1, 21))) -> list[float]:
    """Radii at quantiles of all pair distances, nudged so balls are closed."""
    qs = np.quantile(pairwise_distances(data), quantiles)
    return sorted({float(np.nextafter(q, np.inf)) for q in qs if q > 0})
