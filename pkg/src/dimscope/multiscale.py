"""Multiscale FCI: local estimates on growing neighbourhoods of chosen centers.

Summary statistic: the minimum reliable local estimate per center, then the
minimum over centers. The per-center minima are kept so that datasets made
of pieces with different dimension show up as several clusters.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from dimscope.data import (
    DataSet,
    as_dataset,
    as_rng,
    centered_gram,
    projected_distances_from_gram,
)
from dimscope.errors import (
    DegenerateSampleError,
    InvalidInputError,
    NoReliableScaleError,
    UnfittableCurveError,
)
from dimscope.estimator import EstimatorConfig, estimate_from_distances

N_RELIABLE = 20
MIN_FIT_SIZE = 5
KNN_START = 20
KNN_RATIO = math.sqrt(2.0)
RADIUS_QUANTILES = tuple(round(0.05 * k, 2) for k in range(1, 21))

_CENTERS_STREAM = 0
_FITS_STREAM = 1


@dataclass(frozen=True)
class Scale:
    kind: str
    value: float

    def __post_init__(self):
        if self.kind == "knn":
            if int(self.value) != self.value or self.value < 2:
                raise InvalidInputError(f"knn scale needs an integer >= 2, got {self.value}")
            object.__setattr__(self, "value", int(self.value))
        elif self.kind == "radius":
            if not self.value > 0:
                raise InvalidInputError(f"radius scale must be positive, got {self.value}")
            object.__setattr__(self, "value", float(self.value))
        else:
            raise InvalidInputError(f"scale kind must be 'knn' or 'radius', got {self.kind!r}")

    @classmethod
    def knn(cls, n: int) -> Scale:
        return cls("knn", n)

    @classmethod
    def radius(cls, r: float) -> Scale:
        return cls("radius", r)


@dataclass(frozen=True)
class ProfileEntry:
    scale: Scale
    n_neighbors: int
    d_est: float | None
    reliable: bool


@dataclass(frozen=True)
class ScaleProfile:
    center_index: int
    entries: list[ProfileEntry]

    def minimum(self) -> float | None:
        """Smallest reliable local estimate, or None."""
        vals = [e.d_est for e in self.entries if e.reliable]
        return min(vals) if vals else None


@dataclass(frozen=True)
class MultiscaleResult:
    profiles: list[ScaleProfile]
    d_summary: float
    per_center_minima: list[tuple[int, float]]

    def rows(self):
        """Rows of the profile CSV, sorted by center then scale."""
        for prof in self.profiles:
            for e in prof.entries:
                yield (prof.center_index, e.scale.kind, e.scale.value, e.n_neighbors, e.d_est, e.reliable)


class LocalEstimate(NamedTuple):
    d_est: float | None
    n_neighbors: int
    reliable: bool


def default_knn_grid(n_samples: int, start: int = KNN_START, ratio: float = KNN_RATIO) -> list[int]:
    """Geometric neighbour counts 20, 28, 40, ... capped by N - 1 (always included)."""
    top = n_samples - 1
    if top < 2:
        raise InvalidInputError(f"need at least 3 samples for a knn grid, got {n_samples}")
    grid = []
    k = 0
    while True:
        n = int(round(start * ratio**k))
        if n >= top:
            break
        if not grid or n > grid[-1]:
            grid.append(n)
        k += 1
    grid.append(top)
    return grid


def radius_grid(dist_to_center: np.ndarray, quantiles=RADIUS_QUANTILES) -> list[float]:
    """Quantiles of the distances to a center, nudged up so each ball is closed."""
    qs = np.quantile(dist_to_center, quantiles)
    out = []
    for q in qs:
        r = float(np.nextafter(q, np.inf))
        if r > 0 and (not out or r > out[-1]):
            out.append(r)
    return out


def _thread_count() -> int:
    raw = os.environ.get("DIMSCOPE_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def _neighbor_indices(dist: np.ndarray, center: int, scale: Scale) -> np.ndarray:
    n = dist.size
    if scale.kind == "radius":
        idx = np.flatnonzero(dist < scale.value)
        if center not in idx:
            idx = np.union1d(idx, [center])
        return idx
    if scale.value > n - 1:
        raise InvalidInputError(f"knn scale {scale.value} exceeds N - 1 = {n - 1}")
    # lexsort: primary key distance, ties by sample index; the center has
    # distance 0 but is forced first in case of duplicates.
    key = dist.copy()
    key[center] = -1.0
    order = np.lexsort((np.arange(n), key))
    return np.sort(order[: scale.value + 1])


def _check_center(data: DataSet, center: int) -> int:
    if not 0 <= int(center) < data.n_samples:
        raise InvalidInputError(f"center {center} out of range for N={data.n_samples}")
    return int(center)


def neighborhood(data, center: int, scale: Scale) -> DataSet:
    """The center and its neighbours at the given scale, in original row order."""
    data = as_dataset(data)
    center = _check_center(data, center)
    dist = np.linalg.norm(data.points - data.points[center], axis=1)
    return data.subset(_neighbor_indices(dist, center, scale))


class _LocalEngine:
    """Shared state for many local fits on one dataset.

    Distances between projected samples of any subset are derived from one
    Gram matrix, so the ambient dimension enters only once.
    """

    def __init__(self, data: DataSet, cfg: EstimatorConfig, n_reliable: int):
        self.data = data
        self.cfg = cfg
        self.n_reliable = n_reliable
        self.min_size = max(cfg.min_samples, MIN_FIT_SIZE)
        self.gram = centered_gram(data.points)

    def distances_to(self, center: int) -> np.ndarray:
        return np.linalg.norm(self.data.points - self.data.points[center], axis=1)

    def estimate(self, idx: np.ndarray, rng) -> LocalEstimate:
        n_neighbors = idx.size - 1
        if idx.size < self.min_size:
            return LocalEstimate(None, n_neighbors, False)
        try:
            dists = projected_distances_from_gram(self.gram[np.ix_(idx, idx)])
            est = estimate_from_distances(
                dists, self.cfg, ambient_dim=self.data.ambient_dim, n_samples=idx.size, rng=rng
            )
        except (UnfittableCurveError, DegenerateSampleError):
            return LocalEstimate(None, n_neighbors, False)
        reliable = n_neighbors >= self.n_reliable and est.fit.converged
        return LocalEstimate(est.d_est, n_neighbors, reliable)

    def profile(self, center: int, scales: Sequence[Scale], rng) -> ScaleProfile:
        dist = self.distances_to(center)
        entries = []
        for k, scale in enumerate(scales):
            idx = _neighbor_indices(dist, center, scale)
            local = self.estimate(idx, rng.substream(k))
            entries.append(ProfileEntry(scale, local.n_neighbors, local.d_est, local.reliable))
        return ScaleProfile(center, entries)


def local_id(
    data, center: int, scale: Scale, cfg: EstimatorConfig | None = None, *, n_reliable: int = N_RELIABLE, rng=None
) -> LocalEstimate:
    """Global FCI estimate restricted to one neighbourhood.

    Never raises for fit problems: a failed or undersized fit comes back with
    ``d_est=None``.
    """
    data = as_dataset(data)
    cfg = cfg or EstimatorConfig()
    center = _check_center(data, center)
    engine = _LocalEngine(data, cfg, n_reliable)
    idx = _neighbor_indices(engine.distances_to(center), center, scale)
    return engine.estimate(idx, as_rng(cfg.seed if rng is None else rng))


def _check_scales(scales: Sequence[Scale]) -> list[Scale]:
    scales = list(scales)
    if not scales:
        raise InvalidInputError("need at least one scale")
    if len({s.kind for s in scales}) != 1:
        raise InvalidInputError("scales must all be of the same kind")
    values = [s.value for s in scales]
    if any(b < a for a, b in zip(values, values[1:])):
        raise InvalidInputError("scales must be sorted ascending")
    return scales


def scale_profile(
    data,
    center: int,
    scales: Sequence[Scale],
    cfg: EstimatorConfig | None = None,
    *,
    n_reliable: int = N_RELIABLE,
    rng=None,
) -> ScaleProfile:
    data = as_dataset(data)
    cfg = cfg or EstimatorConfig()
    center = _check_center(data, center)
    engine = _LocalEngine(data, cfg, n_reliable)
    return engine.profile(center, _check_scales(scales), as_rng(cfg.seed if rng is None else rng))


def multiscale_estimate(
    data,
    n_centers: int = 20,
    scales: Sequence[Scale] | None = None,
    rng=None,
    cfg: EstimatorConfig | None = None,
    *,
    kind: str = "knn",
    n_reliable: int = N_RELIABLE,
    workers: int | None = None,
) -> MultiscaleResult:
    """Profiles around ``n_centers`` random samples and the min-plateau summary.

    With ``scales=None`` the grid is automatic: :func:`default_knn_grid` for
    ``kind="knn"``, or per-center distance quantiles for ``kind="radius"``.
    ``workers`` defaults to ``$DIMSCOPE_THREADS`` (0 or unset: all cores);
    results do not depend on it.
    """
    data = as_dataset(data)
    cfg = cfg or EstimatorConfig()
    rng = as_rng(rng)
    n = data.n_samples
    if not 1 <= n_centers <= n:
        raise InvalidInputError(f"n_centers must be in [1, {n}], got {n_centers}")
    if scales is not None:
        scales = _check_scales(scales)
    elif kind == "knn":
        scales = [Scale.knn(v) for v in default_knn_grid(n)]
    elif kind != "radius":
        raise InvalidInputError(f"scale kind must be 'knn' or 'radius', got {kind!r}")

    centers = rng.substream(_CENTERS_STREAM).generator().choice(n, size=n_centers, replace=False)
    centers = sorted(int(c) for c in centers)
    engine = _LocalEngine(data, cfg, n_reliable)

    def run(center: int) -> ScaleProfile:
        own = scales
        if own is None:
            own = [Scale.radius(r) for r in radius_grid(engine.distances_to(center))]
        return engine.profile(center, own, rng.substream(_FITS_STREAM, center))

    workers = workers or _thread_count()
    if workers > 1 and len(centers) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            profiles = list(pool.map(run, centers))
    else:
        profiles = [run(c) for c in centers]

    minima = [(p.center_index, p.minimum()) for p in profiles]
    minima = [(c, m) for c, m in minima if m is not None]
    if not minima:
        raise NoReliableScaleError("no reliable local estimate at any center and scale")
    return MultiscaleResult(profiles, min(m for _, m in minima), minima)
