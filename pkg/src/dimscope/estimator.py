"""Global full-correlation-integral (FCI) estimator.

Pipeline: center and project the samples onto the unit sphere, build the
empirical correlation integral, subsample it, fit the hypersphere model for
(d, r_s), and report d + 1 (projection removes one degree of freedom).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from dimscope.correlation import (
    DEFAULT_MAX_POINTS,
    EcdfCurve,
    empirical_correlation_integral,
    subsample_curve,
)
from dimscope.data import RngHandle, as_dataset, as_rng, center_and_project, pairwise_distances
from dimscope.errors import InvalidInputError, UnfittableCurveError
from dimscope.model import FciParams, _fci_kernel

D_MIN = 0.1
D_MAX_FLOOR = 2048
FTOL = 1e-10
GTOL = 1e-8
FD_STEP = 1e-5


@dataclass(frozen=True)
class EstimatorConfig:
    """Knobs of the global estimator.

    ``d_max`` defaults to ``max(2 D, 2048)``. With ``multistart=False`` the
    solver runs once, from the grid start with the smallest initial residual.
    """

    subsample: int = DEFAULT_MAX_POINTS
    min_samples: int = 5
    d_max: float | None = None
    multistart: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.subsample < 2:
            raise InvalidInputError("subsample must be >= 2")
        if self.min_samples < 2:
            raise InvalidInputError("min_samples must be >= 2")
        if self.d_max is not None and self.d_max <= D_MIN:
            raise InvalidInputError(f"d_max must exceed {D_MIN}")

    def resolved_d_max(self, ambient_dim: int) -> float:
        if self.d_max is not None:
            return float(self.d_max)
        return float(max(2 * ambient_dim, D_MAX_FLOOR))


@dataclass(frozen=True)
class FciFit:
    d_sphere: float
    r_s: float
    rss: float
    n_curve_points: int
    converged: bool
    multistart_log: list[tuple[float, float]] = field(default_factory=list)


@dataclass(frozen=True)
class IdEstimate:
    d_est: float
    fit: FciFit
    n_samples_used: int


def _model(r: np.ndarray, d: float, r_s: float) -> np.ndarray:
    out = np.empty_like(r)
    _fci_kernel(r / r_s, d, out)
    return out


def start_grid(d_max: float) -> list[float]:
    """Initial dimensions 1, 2, 4, ... up to the first power of two >= d_max."""
    top = math.ceil(math.log2(d_max))
    return [min(float(2**k), d_max) for k in range(top + 1)]


def _check_curve(curve: EcdfCurve) -> None:
    if len(curve) < 4:
        raise UnfittableCurveError(f"curve has {len(curve)} points; need at least 4")
    inner = curve.rho[(curve.rho > 0.0) & (curve.rho < 1.0)]
    if np.unique(inner).size < 3:
        raise UnfittableCurveError("curve needs at least 3 distinct rho values inside (0, 1)")
    if not curve.r[-1] > 0.0:
        raise UnfittableCurveError("all distances are zero")


def fit_fci(
    curve: EcdfCurve,
    init: FciParams | None = None,
    *,
    d_max: float = D_MAX_FLOOR,
    multistart: bool = True,
) -> FciFit:
    """Least-squares fit of the hypersphere model to an empirical curve.

    Minimizes the unweighted sum of squared residuals over
    d in [0.1, d_max] and r_s in [1e-6, 10] x (largest distance) with a
    bounded trust-region solver, restarted from a grid of initial d values.
    """
    _check_curve(curve)
    r, rho = curve.r, curve.rho
    r_top = float(r[-1])
    lower = np.array([D_MIN, 1e-6 * r_top])
    upper = np.array([float(d_max), 10.0 * r_top])

    def residuals(p):
        return _model(r, p[0], p[1]) - rho

    def jacobian(p):
        jac = np.empty((r.size, 2))
        for j in range(2):
            h = FD_STEP * max(1.0, abs(p[j]))
            hi = min(h, upper[j] - p[j])
            lo = min(h, p[j] - lower[j])
            pp, pm = p.copy(), p.copy()
            pp[j] += hi
            pm[j] -= lo
            jac[:, j] = (residuals(pp) - residuals(pm)) / (hi + lo)
        return jac

    r_s0 = float(np.clip(np.median(r) / math.sqrt(2.0), lower[1], upper[1]))
    starts = start_grid(d_max)
    if not multistart:
        costs = [np.sum(residuals(np.array([d0, r_s0])) ** 2) for d0 in starts]
        starts = [starts[int(np.argmin(costs))]]
    x0s = [np.array([d0, r_s0]) for d0 in starts]
    if init is not None:
        x0s.insert(0, np.array([init.d, init.r_s]))

    best = None
    log = []
    for x0 in x0s:
        x0 = np.clip(x0, lower, upper)
        sol = least_squares(
            residuals,
            x0,
            jac=jacobian,
            bounds=(lower, upper),
            method="trf",
            ftol=FTOL,
            gtol=GTOL,
            xtol=1e-15,
            x_scale="jac",
        )
        rss = float(2.0 * sol.cost)
        log.append((float(x0[0]), rss))
        if best is None or rss < 2.0 * best.cost:
            best = sol
    return FciFit(
        d_sphere=float(best.x[0]),
        r_s=float(best.x[1]),
        rss=float(2.0 * best.cost),
        n_curve_points=len(curve),
        converged=best.status in (1, 2, 4),
        multistart_log=log,
    )


def estimate_from_distances(
    dists: np.ndarray,
    cfg: EstimatorConfig,
    *,
    ambient_dim: int,
    n_samples: int,
    rng: RngHandle | int | None = None,
) -> IdEstimate:
    """Fit stage of the pipeline, given sorted distances of projected samples."""
    rng = as_rng(cfg.seed if rng is None else rng)
    curve = subsample_curve(empirical_correlation_integral(dists), cfg.subsample, rng)
    fit = fit_fci(curve, d_max=cfg.resolved_d_max(ambient_dim), multistart=cfg.multistart)
    return IdEstimate(d_est=fit.d_sphere + 1.0, fit=fit, n_samples_used=n_samples)


def estimate_id_global(data, cfg: EstimatorConfig | None = None, rng=None) -> IdEstimate:
    """Intrinsic dimension of ``data`` by the global FCI estimator.

    ``rng`` drives the curve subsampling and defaults to ``cfg.seed``.
    """
    cfg = cfg or EstimatorConfig()
    data = as_dataset(data)
    if data.n_samples < cfg.min_samples:
        raise InvalidInputError(
            f"need at least {cfg.min_samples} samples for an estimate, got {data.n_samples}"
        )
    dists = pairwise_distances(center_and_project(data))
    return estimate_from_distances(
        dists, cfg, ambient_dim=data.ambient_dim, n_samples=data.n_samples, rng=rng
    )
