"""Average correlation integral of a uniformly sampled hypersphere.

For a d-sphere of radius r_s, the fraction of pairs closer than r is

    rho(rbar) = (Omega_{d-1}/Omega_d) * int_0^theta sin^{d-1}(b) db,
    cos(theta) = 1 - rbar^2/2,  rbar = r/r_s.

With x = sin^2(theta) the integral is a regularized incomplete beta,
rho = I_x(d/2, 1/2)/2 below the equator (rbar <= sqrt 2) and 1 - I_x/2 above
it. That form holds for any real d > 0, which the fitter needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import integrate, special

from dimscope.errors import DomainError

_TINY = 1e-300
_CF_EPS = 1e-16
_CF_MAX_ITER = 100_000


@dataclass(frozen=True)
class FciParams:
    d: float
    r_s: float = 1.0

    def __post_init__(self):
        if not (self.d > 0 and math.isfinite(self.d)):
            raise DomainError(f"dimension must be positive and finite, got {self.d}")
        if not (self.r_s > 0 and math.isfinite(self.r_s)):
            raise DomainError(f"sphere radius must be positive and finite, got {self.r_s}")


@njit(cache=True, nogil=True)
def _beta_cf(a, b, x):
    # Modified Lentz evaluation of the incomplete-beta continued fraction.
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER):
        m2 = 2.0 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            break
    return h


@njit(cache=True, nogil=True)
def _betainc(a, b, x, y):
    """I_x(a, b) with y = 1 - x supplied separately to keep precision near 1."""
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    lbeta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    front = math.exp(a * math.log(x) + b * math.log(y) - lbeta)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, y) / b


@njit(cache=True, nogil=True)
def _fci_kernel(rbar, d, out):
    a = 0.5 * d
    for i in range(rbar.size):
        r = rbar[i]
        if r <= 0.0:
            out[i] = 0.0
        elif r >= 2.0:
            out[i] = 1.0
        else:
            r2 = r * r
            c = 1.0 - 0.5 * r2
            x = r2 * (1.0 - 0.25 * r2)  # sin^2(theta), cancellation-free
            half = 0.5 * _betainc(a, 0.5, x, c * c)
            out[i] = half if c >= 0.0 else 1.0 - half


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0, 0 <= x <= 1."""
    if not (a > 0 and b > 0):
        raise DomainError(f"betainc needs a, b > 0, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"betainc needs 0 <= x <= 1, got {x}")
    return float(_betainc(float(a), float(b), float(x), 1.0 - float(x)))


def _check_dim(d: float) -> float:
    d = float(d)
    if not (d > 0 and math.isfinite(d)):
        raise DomainError(f"dimension must be positive and finite, got {d}")
    return d


def solid_angle_ratio(d: float) -> float:
    """Omega_{d-1} / Omega_d = Gamma((d+1)/2) / (sqrt(pi) Gamma(d/2))."""
    d = _check_dim(d)
    return math.exp(math.lgamma(0.5 * (d + 1.0)) - math.lgamma(0.5 * d) - 0.5 * math.log(math.pi))


def fci_cdf(rbar, d: float):
    """Full correlation integral at adimensional radius ``rbar``.

    Vectorized over ``rbar``; values at or beyond 2 (the sphere diameter)
    are 1. Returns a float for scalar input.
    """
    d = _check_dim(d)
    arr = np.asarray(rbar, dtype=np.float64)
    flat = np.ascontiguousarray(arr.ravel())
    if flat.size and not (np.all(flat >= 0.0) and np.all(np.isfinite(flat))):
        raise DomainError("rbar must be finite and non-negative")
    out = np.empty_like(flat)
    _fci_kernel(flat, d, out)
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def fci_model_value(r, params: FciParams | None = None, *, d: float | None = None, r_s: float = 1.0):
    """Model value at distance ``r``: ``fci_cdf(r / r_s, d)``."""
    if params is None:
        if d is None:
            raise TypeError("pass either params or d")
        params = FciParams(d, r_s)
    r = np.asarray(r, dtype=np.float64)
    if np.any(r < 0):
        raise DomainError("distances must be non-negative")
    return fci_cdf(r / params.r_s, params.d)


def fci_slope(rbar, d: float):
    """d rho / d rbar, i.e. the density of pair distances on the unit sphere.

    Closed form ratio * sin^{d-2}(theta) * rbar; zero outside (0, 2).
    """
    d = _check_dim(d)
    r = np.asarray(rbar, dtype=np.float64)
    inside = (r > 0) & (r < 2)
    rr = np.where(inside, r, 1.0)
    sin2 = rr * rr * (1.0 - 0.25 * rr * rr)
    log_val = math.log(solid_angle_ratio(d)) + 0.5 * (d - 2.0) * np.log(sin2) + np.log(rr)
    out = np.where(inside, np.exp(log_val), 0.0)
    return float(out) if out.ndim == 0 else out


def fci_quadrature_oracle(rbar: float, d: float) -> float:
    """Reference value by adaptive quadrature of the spherical-cap integral.

    Deliberately independent of the incomplete-beta path; meant for tests.
    """
    d = _check_dim(d)
    rbar = float(rbar)
    if not 0.0 <= rbar <= 2.0:
        raise DomainError(f"quadrature oracle needs 0 <= rbar <= 2, got {rbar}")
    theta = math.acos(max(-1.0, min(1.0, 1.0 - 0.5 * rbar * rbar)))
    if theta == 0.0:
        return 0.0
    # Splitting at pi/2 keeps quad accurate when the integrand is a narrow
    # peak there (large d).
    breaks = [b for b in (0.5 * math.pi,) if b < theta]
    val, _ = integrate.quad(
        lambda b: math.sin(b) ** (d - 1.0),
        0.0,
        theta,
        points=breaks or None,
        epsabs=1e-13,
        epsrel=1e-13,
        limit=500,
    )
    return solid_angle_ratio(d) * val


def fci_hypergeometric(rbar: float, d: float) -> float:
    """Closed form via 2F1 with terminating series (even integer d only).

    rho = 1/2 + (ratio/2)(rbar^2 - 2) 2F1(1/2, 1 - d/2; 3/2; (rbar^2 - 2)^2 / 4).
    For d = 2m the series has m terms, sum_k C(m-1,k) (-z)^k / (2k + 1).
    """
    d = _check_dim(d)
    m = int(round(d / 2))
    if 2 * m != d:
        raise DomainError(f"terminating series needs an even integer d, got {d}")
    u = rbar * rbar - 2.0
    z = 0.25 * u * u
    series = sum(special.comb(m - 1, k, exact=True) * (-z) ** k / (2 * k + 1) for k in range(m))
    return 0.5 + 0.5 * solid_angle_ratio(d) * u * series
