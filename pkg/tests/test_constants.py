import math

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import gamma

from gjms_mass.constants import (
    DimPair,
    gjms_constant,
    gjms_constant_exact,
    homogeneous_invertibility,
    radial_power_coefficient,
    vol_sphere,
)
from gjms_mass.errors import DimensionError

valid_dims = st.integers(1, 6).flatmap(
    lambda k: st.integers(2 * k + 1, 2 * k + 8).map(lambda n: DimPair(n, k))
)


@pytest.mark.parametrize("d,expected", [(1, 2 * math.pi), (2, 4 * math.pi), (4, 8 * math.pi**2 / 3)])
def test_vol_sphere_examples(d, expected):
    assert vol_sphere(d) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("d", range(0, 12))
def test_vol_sphere_matches_gamma_formula(d):
    assert vol_sphere(d) == pytest.approx(2 * math.pi ** ((d + 1) / 2) / gamma((d + 1) / 2), rel=1e-14)


@pytest.mark.parametrize(
    "n,k,expected,exact",
    [(3, 1, 4 * math.pi, "4*pi"), (5, 2, 16 * math.pi**2, "16*pi^2"), (5, 1, 8 * math.pi**2, "8*pi^2")],
)
def test_gjms_constant_examples(n, k, expected, exact):
    dims = DimPair(n, k)
    assert gjms_constant(dims) == pytest.approx(expected, rel=1e-15)
    assert gjms_constant_exact(dims) == exact


@pytest.mark.parametrize("n,k", [(4, 2), (2, 1), (3, 0), (6, 3)])
def test_dimpair_rejects(n, k):
    with pytest.raises(DimensionError):
        DimPair(n, k)


def test_mass_range_flag():
    assert DimPair(5, 2).mass_range and DimPair(7, 2).mass_range
    assert not DimPair(8, 2).mass_range and not DimPair(6, 1).mass_range


@pytest.mark.parametrize("n,k,alpha,expected", [(3, 1, -1, 0.0), (5, 2, -1, 0.0), (5, 1, 2, -10.0)])
def test_radial_power_examples(n, k, alpha, expected):
    assert radial_power_coefficient(DimPair(n, k), alpha) == expected


@pytest.mark.parametrize("alpha,expected", [(-0.5, True), (1, False), (-1, False), (-2.5, True), (0, False)])
def test_invertibility_examples(alpha, expected):
    assert homogeneous_invertibility(DimPair(5, 2), alpha) is expected


@given(valid_dims)
def test_constant_positive(dims):
    assert gjms_constant(dims) > 0


@given(valid_dims)
def test_kernel_power(dims):
    assert radial_power_coefficient(dims, 2 * dims.k - dims.n) == 0


@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 6), st.floats(-8, 8, allow_nan=False))
def test_radial_power_composes(k1, k2, extra, alpha):
    n = 2 * (k1 + k2) + 1 + extra
    whole = radial_power_coefficient(DimPair(n, k1 + k2), alpha)
    first = radial_power_coefficient(DimPair(n, k2), alpha)
    second = radial_power_coefficient(DimPair(n, k1), alpha - 2 * k2)
    assert whole == pytest.approx(first * second, rel=1e-12, abs=1e-9)


@given(valid_dims, st.integers(-20, 20))
def test_zero_coefficient_means_not_invertible(dims, alpha):
    if radial_power_coefficient(dims, alpha) == 0:
        assert not homogeneous_invertibility(dims, alpha)


def test_radial_power_against_finite_differences():
    import numpy as np

    from gjms_mass.numerics import laplacian0

    dims = DimPair(5, 1)
    alpha = 0.7
    x = np.array([[0.3, -0.4, 0.5, 0.2, 0.1]])
    f = lambda X: np.linalg.norm(X, axis=1) ** alpha
    r = np.linalg.norm(x)
    assert laplacian0(f, x, 1e-3)[0] == pytest.approx(radial_power_coefficient(dims, alpha) * r ** (alpha - 2), rel=1e-7)
