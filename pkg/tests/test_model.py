import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from dimscope.errors import DomainError
from dimscope.model import (
    FciParams,
    betainc,
    fci_cdf,
    fci_hypergeometric,
    fci_model_value,
    fci_quadrature_oracle,
    fci_slope,
    solid_angle_ratio,
)

SQRT2 = math.sqrt(2.0)


def sphere_area(d):
    """Surface of the unit d-sphere in R^{d+1}, from the textbook formula."""
    return 2.0 * math.pi ** ((d + 1) / 2) / math.gamma((d + 1) / 2)


class TestSolidAngleRatio:
    def test_circle(self):
        # Omega_0 = 2 (two points), Omega_1 = 2 pi
        assert solid_angle_ratio(1) == pytest.approx(2.0 / (2.0 * math.pi), rel=1e-14)
        assert solid_angle_ratio(1) == pytest.approx(0.3183098862, abs=1e-10)

    def test_sphere(self):
        assert solid_angle_ratio(2) == pytest.approx(2.0 * math.pi / (4.0 * math.pi), rel=1e-14)

    @pytest.mark.parametrize("d", [3, 4, 7, 12, 30])
    def test_matches_area_formula(self, d):
        assert solid_angle_ratio(d) == pytest.approx(sphere_area(d - 1) / sphere_area(d), rel=1e-12)

    def test_large_d_no_overflow(self):
        val = solid_angle_ratio(300)
        ref = math.exp(special.gammaln(150.5) - special.gammaln(150.0)) / math.sqrt(math.pi)
        assert math.isfinite(val) and val > 0
        assert val == pytest.approx(ref, rel=1e-12)

    @pytest.mark.parametrize("d", [0, -1.5, float("nan")])
    def test_domain(self, d):
        with pytest.raises(DomainError):
            solid_angle_ratio(d)


class TestBetainc:
    @pytest.mark.parametrize("a", [0.05, 0.5, 1.0, 3.75, 50.0, 1024.0])
    @pytest.mark.parametrize("x", [0.0, 1e-8, 0.1, 0.5, 0.9, 1 - 1e-9, 1.0])
    def test_against_mpmath(self, a, x):
        with mpmath.workdps(40):
            ref = float(mpmath.betainc(a, 0.5, 0, mpmath.mpf(x), regularized=True))
        assert betainc(a, 0.5, x) == pytest.approx(ref, abs=1e-13)

    def test_domain(self):
        with pytest.raises(DomainError):
            betainc(-1.0, 0.5, 0.3)
        with pytest.raises(DomainError):
            betainc(1.0, 0.5, 1.2)


class TestFciCdf:
    @pytest.mark.parametrize("d", range(1, 51))
    def test_hemisphere_point(self, d):
        assert fci_cdf(SQRT2, d) == pytest.approx(0.5, abs=1e-10)

    @pytest.mark.parametrize("d", [0.5, 1, 3, 40])
    def test_endpoints(self, d):
        assert fci_cdf(0.0, d) == 0.0
        assert fci_cdf(2.0, d) == 1.0
        assert fci_cdf(3.5, d) == 1.0

    def test_circle_closed_form(self):
        # chord <= 1 on the unit circle <=> angle <= pi/3
        assert fci_cdf(1.0, 1) == pytest.approx(1.0 / 3.0, abs=1e-12)
        r = np.linspace(0.01, 1.99, 37)
        theta = np.arccos(1 - r**2 / 2)
        np.testing.assert_allclose(fci_cdf(r, 1), theta / np.pi, atol=1e-12)

    def test_sphere_closed_form(self):
        # spherical cap area fraction on S^2 is r^2 / 4
        assert fci_cdf(1.0, 2) == pytest.approx(0.25, abs=1e-12)
        r = np.linspace(0.0, 2.0, 41)
        np.testing.assert_allclose(fci_cdf(r, 2), r**2 / 4, atol=1e-12)

    def test_quadrature_grid_d6(self):
        grid = np.linspace(0.0, 2.0, 52)[1:-1]
        ours = fci_cdf(grid, 6)
        ref = np.array([fci_quadrature_oracle(r, 6) for r in grid])
        assert np.max(np.abs(ours - ref)) < 1e-8

    @pytest.mark.parametrize("d", [2, 4, 6, 8, 10])
    def test_terminating_series(self, d):
        grid = np.linspace(0.0, 2.0, 41)
        ref = np.array([fci_hypergeometric(r, d) for r in grid])
        np.testing.assert_allclose(fci_cdf(grid, d), ref, atol=1e-10)

    @pytest.mark.parametrize("d", [0.7, 3.3, 7.5, 21.25])
    def test_hypergeometric_noninteger(self, d):
        # 2F1 argument (rbar^2 - 2)^2 / 4 stays in [0, 1], where mpmath sums it directly
        for r in (0.3, 0.9, 1.4, 1.7, 1.95):
            u = r * r - 2
            f = float(mpmath.hyp2f1(0.5, 1 - d / 2, 1.5, u * u / 4))
            ref = 0.5 + 0.5 * solid_angle_ratio(d) * u * f
            assert fci_cdf(r, d) == pytest.approx(ref, abs=1e-10)

    @pytest.mark.parametrize("d", [0.5, 1, 2, 3, 7.5, 20, 100, 1000])
    def test_valid_cdf(self, d):
        grid = np.linspace(0.0, 2.0, 2001)
        vals = fci_cdf(grid, d)
        assert vals[0] == 0.0 and vals[-1] == 1.0
        assert np.all(np.diff(vals) >= -1e-15)
        assert np.all((vals >= 0) & (vals <= 1))

    def test_steeper_with_dimension(self):
        # slope at the hemisphere point, by the closed form and by differences
        ds = [2**k for k in range(1, 9)]
        slopes = [fci_slope(SQRT2, d) for d in ds]
        assert all(b > a for a, b in zip(slopes, slopes[1:]))
        h = 1e-6
        for d, s in zip(ds, slopes):
            fd = (fci_cdf(SQRT2 + h, d) - fci_cdf(SQRT2 - h, d)) / (2 * h)
            assert s == pytest.approx(fd, rel=1e-5)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            fci_cdf(0.5, 0.0)
        with pytest.raises(DomainError):
            fci_cdf(-0.1, 3)
        with pytest.raises(DomainError):
            fci_cdf(np.array([0.2, np.nan]), 3)

    def test_shape_preserved(self):
        grid = np.linspace(0, 2, 12).reshape(3, 4)
        assert fci_cdf(grid, 5).shape == (3, 4)
        assert isinstance(fci_cdf(1.0, 5), float)

    @settings(max_examples=60, deadline=None)
    @given(
        d=st.floats(0.2, 500.0),
        a=st.floats(0.0, 2.5),
        b=st.floats(0.0, 2.5),
    )
    def test_monotone_property(self, d, a, b):
        lo, hi = sorted((a, b))
        assert fci_cdf(lo, d) <= fci_cdf(hi, d) + 1e-15


class TestModelValue:
    @pytest.mark.parametrize("d", [1, 5, 33.3])
    @pytest.mark.parametrize("r_s", [0.3, 1.0, 4.0])
    def test_scaled_hemisphere(self, d, r_s):
        assert fci_model_value(SQRT2 * r_s, FciParams(d, r_s)) == pytest.approx(0.5, abs=1e-10)

    def test_clamp(self):
        assert fci_model_value(3.0, FciParams(4.0, 1.0)) == 1.0

    def test_d2(self):
        assert fci_model_value(1.0, d=2, r_s=1.0) == pytest.approx(0.25, abs=1e-12)

    def test_params_validation(self):
        with pytest.raises(DomainError):
            FciParams(0.0, 1.0)
        with pytest.raises(DomainError):
            FciParams(3.0, -1.0)


class TestQuadratureOracle:
    def test_normalization(self):
        assert fci_quadrature_oracle(2.0, 7) == pytest.approx(1.0, abs=1e-10)

    def test_symmetry(self):
        assert fci_quadrature_oracle(SQRT2, 13) == pytest.approx(0.5, abs=1e-10)

    def test_cross_check(self):
        assert fci_quadrature_oracle(0.8, 4) == pytest.approx(fci_cdf(0.8, 4), abs=1e-8)

    def test_domain(self):
        with pytest.raises(DomainError):
            fci_quadrature_oracle(2.5, 3)


def test_literal_series_argument_is_off_by_four():
    # The series taken at (rbar^2 - 2)^2 instead of a quarter of it does not
    # even reach 1 at the sphere diameter once d > 2.
    u = 2.0**2 - 2.0
    m = 2
    literal = 0.5 + 0.5 * solid_angle_ratio(4) * u * sum(
        special.comb(m - 1, k) * (-(u * u)) ** k / (2 * k + 1) for k in range(m)
    )
    assert literal == pytest.approx(0.25)
    assert fci_hypergeometric(2.0, 4) == pytest.approx(1.0, abs=1e-12)
