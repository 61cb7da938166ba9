"""Seeded generators for the benchmark families.

Every generator takes an :class:`RngHandle` and draws from fixed substreams
(0 for the samples, 1 for the embedding rotation), so the output depends on
``(parameters, seed)`` only.

Families: binary cube {0,1}^d, Gaussian, hypercube [0,1]^d (all linearly
embedded into R^D), the d-sphere, the curved C manifold in R^{2d}, the Swiss
roll and the blob bitmaps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from dimscope.data import DataSet, RngHandle, as_dataset, as_rng
from dimscope.errors import InvalidInputError, InvalidSpecError

FAMILIES = ("binary", "gaussian", "hypercube", "cmanifold", "swissroll", "sphere", "blobs", "cube-union")
BLOB_SIDE = 81

_SAMPLES = 0
_ROTATION = 1


def _positive_int(name: str, value) -> int:
    if int(value) != value or value < 1:
        raise InvalidSpecError(f"{name} must be a positive integer, got {value}")
    return int(value)


def random_rotation(dim: int, rng) -> np.ndarray:
    """Haar-distributed orthogonal matrix (QR of a Gaussian, signs fixed)."""
    dim = _positive_int("dimension", dim)
    gauss = as_rng(rng).generator().standard_normal((dim, dim))
    q, r = np.linalg.qr(gauss)
    return q * np.sign(np.diag(r))


def linear_embed(data, D: int, rng) -> DataSet:
    """Append zero coordinates up to D, then rotate by a random orthogonal map."""
    data = as_dataset(data)
    d = data.ambient_dim
    if D < d:
        raise InvalidSpecError(f"cannot embed dimension {d} into D={D}")
    padded = np.zeros((data.n_samples, D))
    padded[:, :d] = data.points
    rot = random_rotation(D, rng)
    return DataSet(padded @ rot.T, labels=data.labels, meta=data.meta)


def _check_embedding(d, D, N):
    d = _positive_int("d", d)
    D = _positive_int("D", D)
    N = _positive_int("N", N)
    if D < d:
        raise InvalidSpecError(f"family needs D >= d, got d={d}, D={D}")
    return d, D, N


def sample_hypercube(d: int, N: int, rng) -> np.ndarray:
    return as_rng(rng).generator().random((N, d))


def sample_binary(d: int, N: int, rng) -> np.ndarray:
    return as_rng(rng).generator().integers(0, 2, size=(N, d)).astype(np.float64)


def sample_gaussian(d: int, N: int, rng) -> np.ndarray:
    return as_rng(rng).generator().standard_normal((N, d))


def _embedded(sampler, d, D, N, rng) -> DataSet:
    d, D, N = _check_embedding(d, D, N)
    rng = as_rng(rng)
    raw = DataSet(sampler(d, N, rng.substream(_SAMPLES)))
    return linear_embed(raw, D, rng.substream(_ROTATION))


def gen_hypercube(d: int, D: int, N: int, rng) -> DataSet:
    """H_{d,D}: uniform on [0,1]^d, linearly embedded."""
    return _embedded(sample_hypercube, d, D, N, rng)


def gen_binary(d: int, D: int, N: int, rng) -> DataSet:
    """D_{d,D}: uniform on the vertices {0,1}^d, linearly embedded."""
    return _embedded(sample_binary, d, D, N, rng)


def gen_gaussian(d: int, D: int, N: int, rng) -> DataSet:
    """G_{d,D}: standard normal in R^d, linearly embedded."""
    return _embedded(sample_gaussian, d, D, N, rng)


def gen_sphere(d_sphere: int, N: int, r_s: float = 1.0, rng=None) -> DataSet:
    """Uniform points on the d-sphere of radius r_s in R^{d+1}."""
    d_sphere = _positive_int("d_sphere", d_sphere)
    N = _positive_int("N", N)
    if not r_s > 0:
        raise InvalidSpecError(f"sphere radius must be positive, got {r_s}")
    g = as_rng(rng).substream(_SAMPLES).generator().standard_normal((N, d_sphere + 1))
    return DataSet(r_s * g / np.linalg.norm(g, axis=1, keepdims=True))


def cmanifold_map(x: np.ndarray) -> np.ndarray:
    """(x_2 cos x_1, x_2 sin x_1, ..., x_1 cos x_d, x_1 sin x_d), cyclic successor."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    succ = np.roll(x, -1, axis=1)
    out = np.empty((x.shape[0], 2 * x.shape[1]))
    out[:, 0::2] = succ * np.cos(x)
    out[:, 1::2] = succ * np.sin(x)
    return out


def gen_cmanifold(d: int, N: int, rng) -> DataSet:
    """C_{d,2d}: uniform on [0, 2 pi]^d pushed through :func:`cmanifold_map`."""
    d = _positive_int("d", d)
    if d < 2:
        raise InvalidSpecError("cmanifold needs d >= 2")
    N = _positive_int("N", N)
    x = 2.0 * math.pi * as_rng(rng).substream(_SAMPLES).generator().random((N, d))
    return DataSet(cmanifold_map(x))


def swissroll_map(x, y) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return np.stack([x * np.cos(2 * np.pi * y), y, x * np.sin(2 * np.pi * y)], axis=-1)


def gen_swissroll(N: int, rng) -> DataSet:
    """SR_{2,3}: (x, y) uniform on the unit square, rolled into R^3."""
    N = _positive_int("N", N)
    xy = as_rng(rng).substream(_SAMPLES).generator().random((N, 2))
    return DataSet(swissroll_map(xy[:, 0], xy[:, 1]))


@dataclass(frozen=True)
class BlobParams:
    """One elongated blob; ranges are open intervals."""

    dx: float
    dy: float
    s: float
    e: float
    theta: float
    l: int = BLOB_SIDE

    RANGES = {
        "dx": (-20.0, 20.0),
        "dy": (-20.0, 20.0),
        "s": (1.0, 3.0),
        "e": (5.0, 10.0),
        "theta": (-math.pi / 2, math.pi / 2),
    }

    def __post_init__(self):
        for name, (lo, hi) in self.RANGES.items():
            value = getattr(self, name)
            if not lo < value < hi:
                raise InvalidSpecError(f"blob {name}={value} outside ({lo}, {hi})")
        if self.l < 1 or int(self.l) != self.l:
            raise InvalidSpecError(f"bitmap side must be a positive integer, got {self.l}")


def _pixel_grid(l: int) -> tuple[np.ndarray, np.ndarray]:
    # Centered indices -(l-1)/2 ... (l-1)/2, row i and column j.
    coords = np.arange(l, dtype=np.float64) - (l - 1) / 2.0
    i, j = np.meshgrid(coords, coords, indexing="ij")
    return i.ravel(), j.ravel()


def _blob_values(dx, dy, s, e, theta, l) -> np.ndarray:
    """Un-thresholded pixel values; parameters broadcast as column vectors."""
    i, j = _pixel_grid(l)
    ct, st = np.cos(theta)[:, None], np.sin(theta)[:, None]
    jj = j[None, :] - dx[:, None]
    ii = i[None, :] + dy[:, None]
    a = ct * jj + st * ii
    b = -st * jj + ct * ii
    e2 = (e * e)[:, None]
    return 1.0 - np.sqrt((a * a + e2 * b * b) / ((1.0 + e2) * (s * s)[:, None]))


def blob_values(params: BlobParams) -> np.ndarray:
    """Raw l x l values of one blob, before the contrast threshold."""
    vals = _blob_values(
        np.array([params.dx]),
        np.array([params.dy]),
        np.array([params.s]),
        np.array([params.e]),
        np.array([params.theta]),
        params.l,
    )
    return vals.reshape(params.l, params.l)


def blob_image(params: BlobParams) -> np.ndarray:
    vals = blob_values(params)
    return np.where(vals < 0.01, 0.0, vals)


def gen_blobs(n_blobs: int, N: int, rng, l: int = BLOB_SIDE, chunk: int = 64) -> DataSet:
    """B_{5n, l^2}: each image is the sum of n independent thresholded blobs."""
    n_blobs = _positive_int("n_blobs", n_blobs)
    N = _positive_int("N", N)
    g = as_rng(rng).substream(_SAMPLES).generator()
    shape = (N, n_blobs)
    r = BlobParams.RANGES
    dx = g.uniform(*r["dx"], size=shape)
    dy = g.uniform(*r["dy"], size=shape)
    s = g.uniform(*r["s"], size=shape)
    e = g.uniform(*r["e"], size=shape)
    theta = g.uniform(*r["theta"], size=shape)
    images = np.zeros((N, l * l))
    for start in range(0, N, chunk):
        stop = min(start + chunk, N)
        for k in range(n_blobs):
            vals = _blob_values(
                dx[start:stop, k], dy[start:stop, k], s[start:stop, k], e[start:stop, k], theta[start:stop, k], l
            )
            vals[vals < 0.01] = 0.0
            images[start:stop] += vals
    return DataSet(images)


def add_gaussian_noise(data, sigma: float, rng) -> DataSet:
    """Add i.i.d. N(0, sigma^2) to every ambient coordinate."""
    data = as_dataset(data)
    if sigma < 0:
        raise InvalidSpecError(f"noise sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return data
    noise = as_rng(rng).generator().standard_normal(data.points.shape)
    return DataSet(data.points + sigma * noise, labels=data.labels, meta=data.meta)


def union(data_a, data_b) -> DataSet:
    """Row concatenation; labels mark the source (0 for a, 1 for b)."""
    a = as_dataset(data_a)
    if data_b is None or (not isinstance(data_b, DataSet) and np.size(data_b) == 0):
        return a
    b = as_dataset(data_b)
    if a.ambient_dim != b.ambient_dim:
        raise InvalidInputError(f"dimension mismatch: {a.ambient_dim} vs {b.ambient_dim}")
    labels = np.concatenate([np.zeros(a.n_samples, dtype=int), np.ones(b.n_samples, dtype=int)])
    return DataSet(np.vstack([a.points, b.points]), labels=labels)


def gen_cube_union(
    d_a: int = 20,
    d_b: int = 30,
    D: int = 50,
    N_a: int = 1000,
    N_b: int = 1000,
    rng=None,
    offset_a: float = 0.0,
    offset_b: float = 0.0,
) -> DataSet:
    """H_{d_a,D} u H_{d_b,D}, each cube independently rotated about the origin.

    Both images contain the origin, so the cubes touch there. ``offset_*``
    shifts a cube along the all-ones direction of R^D before the union.
    """
    rng = as_rng(rng)
    a = gen_hypercube(d_a, D, N_a, rng.substream(0)).points + offset_a / math.sqrt(D)
    b = gen_hypercube(d_b, D, N_b, rng.substream(1)).points + offset_b / math.sqrt(D)
    return union(DataSet(a), DataSet(b))


@dataclass(frozen=True)
class SyntheticSpec:
    """Everything needed to regenerate a dataset bit for bit."""

    family: str
    d: int | None = None
    D: int | None = None
    N: int = 1000
    seed: int = 0
    extra: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidSpecError(f"unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")
        d, D = self.resolved_dims()
        if self.family in ("binary", "gaussian", "hypercube") and (d is None or D is None or D < d):
            raise InvalidSpecError(f"{self.family} needs D >= d, got d={d}, D={D}")
        if self.family == "cmanifold" and self.D is not None and self.D != 2 * d:
            raise InvalidSpecError(f"cmanifold requires D = 2d, got d={d}, D={self.D}")
        if self.family == "swissroll" and (self.d not in (None, 2) or self.D not in (None, 3)):
            raise InvalidSpecError("swissroll is fixed to d=2, D=3")
        if self.family == "sphere" and self.D is not None and self.D != d + 1:
            raise InvalidSpecError(f"a {d}-sphere lives in D = {d + 1}, got D={self.D}")
        if self.family == "blobs":
            l = int(self.extra.get("l", BLOB_SIDE))
            if self.D is not None and self.D != l * l:
                raise InvalidSpecError(f"blobs require D = l^2 = {l * l}, got {self.D}")
        if self.extra.get("noise", 0.0) < 0:
            raise InvalidSpecError("noise sigma must be >= 0")

    def resolved_dims(self) -> tuple[int | None, int | None]:
        f = self.family
        if f == "swissroll":
            return 2, 3
        if f == "cmanifold":
            return self.d, None if self.d is None else 2 * self.d
        if f == "sphere":
            return self.d, None if self.d is None else self.d + 1
        if f == "blobs":
            l = int(self.extra.get("l", BLOB_SIDE))
            return 5 * int(self.extra.get("blobs", 1)), l * l
        if f == "cube-union":
            dims = self.extra.get("dims", (20, 30))
            return max(dims), self.D or 50
        return self.d, self.D

    def generate(self) -> DataSet:
        rng = RngHandle(self.seed)
        base = rng.substream(0)
        f = self.family
        if f == "hypercube":
            data = gen_hypercube(self.d, self.D, self.N, base)
        elif f == "binary":
            data = gen_binary(self.d, self.D, self.N, base)
        elif f == "gaussian":
            data = gen_gaussian(self.d, self.D, self.N, base)
        elif f == "sphere":
            data = gen_sphere(self.d, self.N, float(self.extra.get("radius", 1.0)), base)
        elif f == "cmanifold":
            data = gen_cmanifold(self.d, self.N, base)
        elif f == "swissroll":
            data = gen_swissroll(self.N, base)
        elif f == "blobs":
            data = gen_blobs(int(self.extra.get("blobs", 1)), self.N, base, l=int(self.extra.get("l", BLOB_SIDE)))
        else:
            d_a, d_b = self.extra.get("dims", (20, 30))
            n_b = int(self.extra.get("n_b", self.N))
            data = gen_cube_union(d_a, d_b, self.resolved_dims()[1], self.N, n_b, base)
        sigma = float(self.extra.get("noise", 0.0))
        if sigma > 0:
            data = add_gaussian_noise(data, sigma, rng.substream(1))
        return data

    def to_meta(self) -> dict[str, Any]:
        d, D = self.resolved_dims()
        meta = {"family": self.family, "d": d, "D": D, "N": self.N, "seed": self.seed}
        for key in sorted(self.extra):
            value = self.extra[key]
            meta[key] = ",".join(str(v) for v in value) if isinstance(value, (tuple, list)) else value
        return meta
