"""Dataset container, seeded random streams and pairwise distances."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np
from scipy.spatial.distance import pdist

from dimscope.errors import DegenerateSampleError, InvalidInputError

# Rows whose centered norm falls below this fraction of the largest centered
# norm are treated as sitting on the barycenter.
NORM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class DataSet:
    """Immutable N x D sample matrix.

    ``points`` is stored as a read-only float64 copy, so a DataSet can be
    handed to several estimators (or threads) without defensive copying.
    """

    points: np.ndarray
    labels: np.ndarray | None = None
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64, copy=True)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise InvalidInputError(f"points must be a 2-D array, got shape {pts.shape}")
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise InvalidInputError(f"points must be non-empty, got shape {pts.shape}")
        bad = ~np.isfinite(pts).all(axis=1)
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise InvalidInputError(f"non-finite entry in row {row}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            labels = np.array(self.labels, copy=True)
            if labels.shape[0] != pts.shape[0]:
                raise InvalidInputError("labels must have one entry per sample")
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "meta", dict(self.meta))

    @property
    def n_samples(self) -> int:
        return self.points.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n_samples

    def subset(self, indices) -> DataSet:
        idx = np.asarray(indices, dtype=np.intp)
        labels = None if self.labels is None else self.labels[idx]
        return DataSet(self.points[idx], labels=labels, meta=self.meta)


def as_dataset(data) -> DataSet:
    if isinstance(data, DataSet):
        return data
    return DataSet(np.asarray(data, dtype=np.float64))


@dataclass(frozen=True)
class RngHandle:
    """Reproducible random stream identified by ``(seed, stream)``.

    Every call to :meth:`generator` restarts the same stream, so a handle
    behaves like a value rather than a stateful object. Independent streams
    are derived with :meth:`substream`, which makes draws independent of the
    order in which parallel tasks run.
    """

    seed: int = 0
    stream: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidInputError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "stream", tuple(int(k) for k in self.stream))

    def substream(self, *keys: int) -> RngHandle:
        return RngHandle(self.seed, self.stream + tuple(keys))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        return np.random.Generator(np.random.PCG64(seq))


def as_rng(rng) -> RngHandle:
    if rng is None:
        return RngHandle(0)
    if isinstance(rng, RngHandle):
        return rng
    return RngHandle(int(rng))


def pairwise_distances(data) -> np.ndarray:
    """All N(N-1)/2 Euclidean pair distances, sorted ascending."""
    data = as_dataset(data)
    if data.n_samples < 2:
        raise InvalidInputError(f"need at least 2 samples for pair distances, got {data.n_samples}")
    dists = pdist(data.points, metric="euclidean")
    dists.sort(kind="stable")
    return dists


def center_and_project(data) -> DataSet:
    """Subtract the barycenter and rescale every row to unit norm."""
    data = as_dataset(data)
    if data.n_samples < 2:
        raise InvalidInputError(f"need at least 2 samples to center, got {data.n_samples}")
    centered = data.points - data.points.mean(axis=0)
    norms = np.linalg.norm(centered, axis=1)
    tol = NORM_TOLERANCE * norms.max()
    small = norms <= tol
    if small.any():
        row = int(np.flatnonzero(small)[0])
        raise DegenerateSampleError(f"row {row} coincides with the center of mass", row=row)
    return DataSet(centered / norms[:, None], labels=data.labels, meta=data.meta)


def centered_gram(points: np.ndarray) -> np.ndarray:
    """Gram matrix of the globally centered points.

    Used by the neighbourhood sweeps: distances between projected samples of
    any subset follow from this matrix alone, without touching the ambient
    coordinates again.
    """
    x = points - points.mean(axis=0)
    return x @ x.T


def projected_distances_from_gram(gram: np.ndarray) -> np.ndarray:
    """Sorted pair distances of a subset after centering and unit projection.

    ``gram`` is the inner-product matrix of the subset (any common origin).
    Double centering moves the origin to the subset's barycenter.
    """
    n = gram.shape[0]
    if n < 2:
        raise InvalidInputError(f"need at least 2 samples for pair distances, got {n}")
    row_mean = gram.mean(axis=1)
    g = gram - row_mean[:, None] - row_mean[None, :] + row_mean.mean()
    sq = np.diag(g).copy()
    tol = (NORM_TOLERANCE * np.sqrt(max(sq.max(), 0.0))) ** 2
    small = sq <= tol
    if small.any():
        row = int(np.flatnonzero(small)[0])
        raise DegenerateSampleError(f"row {row} coincides with the center of mass", row=row)
    inv = 1.0 / np.sqrt(sq)
    iu = np.triu_indices(n, k=1)
    cos = g[iu] * inv[iu[0]] * inv[iu[1]]
    dists = np.sqrt(np.clip(2.0 - 2.0 * cos, 0.0, 4.0))
    dists.sort(kind="stable")
    return dists
