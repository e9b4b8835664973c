import math

import numpy as np
import pytest

from gjms_mass.asymptotic_mass import (
    adm_integral,
    blowup_profile,
    constant_profile,
    flatness_defect,
    mk_surface_integral,
    scal_decay,
    schwarzschild_profile,
    thm51_check,
)
from gjms_mass.checks import thm51_suite
from gjms_mass.constants import DimPair, gjms_constant, vol_sphere
from gjms_mass.errors import DimensionError, SingularityError
from gjms_mass.moebius import ChartFrame, SpherePoint
from gjms_mass.space_forms import lens_group, parse_space, space_form_kernel, trivial_group


def _profile(label, k, xi=None, **kw):
    g = parse_space(label)
    dims = DimPair(g.sphere_dim, k)
    xi = np.eye(g.ambient)[0] if xi is None else xi
    return blowup_profile(space_form_kernel(g, dims), ChartFrame(SpherePoint(xi)), dims, **kw)


def test_profile_basics():
    p = _profile("L(2;1,1)", 1)
    c = gjms_constant(DimPair(3, 1))
    assert p.v_inf == pytest.approx(1 / c)
    assert p.round_scale == pytest.approx(2 ** -0.5)
    Z = np.array([[1e4, 0.0, 0.0]])
    assert p(Z)[0] == pytest.approx(1 / c, rel=1e-3)
    with pytest.raises(SingularityError):
        p(np.array([[0.5, 0.0, 0.0]]))


def test_profile_rho_min_floor():
    g = lens_group(7, (1, 2))
    dims = DimPair(3, 1)
    frame = ChartFrame(SpherePoint(np.eye(4)[0]))
    p = blowup_profile(space_form_kernel(g, dims), frame)
    assert p.rho_min >= 1.0
    with pytest.raises(SingularityError):
        blowup_profile(space_form_kernel(g, dims), frame, rho_min=0.5 * p.rho_min)
    with pytest.raises(ValueError):
        blowup_profile(space_form_kernel(g, dims), frame, scale=-1.0)


@pytest.mark.parametrize("n,alpha", [(3, 0.5), (4, 1.0), (5, 2.0)])
def test_schwarzschild_flux(n, alpha):
    rep = adm_integral(schwarzschild_profile(n, alpha))
    expected = 4 * (n - 1) * alpha * vol_sphere(n - 1)
    assert rep.value == pytest.approx(expected, rel=5e-3)
    assert rep.method == "surface_integral"
    assert rep.details["adm_16pi"] == pytest.approx(rep.value / (16 * math.pi))


def test_flat_end_has_zero_mass():
    assert adm_integral(constant_profile(DimPair(3, 1))).value == 0.0
    assert abs(mk_surface_integral(constant_profile(DimPair(5, 2), 3.0)).value) < 1e-12


def test_rp3_barred_adm():
    rep = adm_integral(_profile("L(2;1,1)", 1))
    assert rep.details["barred"] == pytest.approx(16 * math.pi, rel=1e-4)
    assert rep.value == pytest.approx(1 / math.pi, rel=1e-4)


@pytest.mark.parametrize("c", [0.5, 2.0, 3.0])
def test_homothety_scaling(c):
    base = adm_integral(_profile("L(2;1,1)", 1)).value
    scaled = adm_integral(_profile("L(2;1,1)", 1, scale=c)).value
    # V -> c V multiplies the metric by c^4, and the n = 3 mass by c^2
    assert scaled == pytest.approx(c**2 * base, rel=1e-9)


def test_mk_rp5():
    rep = mk_surface_integral(_profile("L(2;1,1,1)", 2))
    assert rep.value == pytest.approx(1 / (2 * math.pi**2), rel=1e-3)


def test_mk_requires_dimension_five():
    with pytest.raises(DimensionError):
        mk_surface_integral(_profile("L(2;1,1)", 1))
    with pytest.raises(DimensionError):
        adm_integral(_profile("L(2;1,1,1)", 2))


def test_radii_validation():
    p = _profile("L(2;1,1)", 1)
    with pytest.raises(ValueError):
        adm_integral(p, radii=(40, 20))
    with pytest.raises(SingularityError):
        adm_integral(p, radii=(1.0, 2.0, 4.0))


@pytest.mark.parametrize("label,k,rate", [("L(2;1,1)", 1, 1), ("L(2;1,1,1)", 2, 1)])
def test_flatness_decays(label, k, rate):
    p = _profile(label, k)
    d = [flatness_defect(p, R) for R in (20, 40, 80)]
    assert d[0] > d[1] > d[2]
    slope = np.polyfit(np.log([20, 40, 80]), np.log(d), 1)[0]
    assert slope == pytest.approx(-rate, abs=0.1)


def test_scal_vanishes_for_harmonic_blowup():
    # k = 1: W = U is harmonic in the inverted chart
    peaks, _ = scal_decay(_profile("L(2;1,1)", 1))
    assert max(peaks) < 1e-8


def test_scal_integrable_for_k2():
    peaks, slope = scal_decay(_profile("L(2;1,1,1)", 2))
    # Scal = O(R^{-2-eps}) makes the volume integral of Delta Scal converge
    assert slope < -2.5
    assert peaks[0] > peaks[1] > peaks[2]


@pytest.mark.parametrize(
    "label,k,tol", [("L(2;1,1)", 1, 1e-2), ("L(3;1,1)", 1, 1e-2), ("L(2;1,1,1)", 2, 2e-2), ("L(3;1,1,1)", 2, 2e-2)]
)
def test_thm51(label, k, tol):
    g = parse_space(label)
    xi = np.random.default_rng(2).normal(size=g.ambient)
    res = thm51_check(g, DimPair(g.sphere_dim, k), xi=xi / np.linalg.norm(xi))
    assert res.residual < tol
    assert res.A > 0 and res.mk > 0
    assert res.coefficient == pytest.approx((g.sphere_dim - 2 * k) / (4 * (g.sphere_dim - 1)))


def test_thm51_trivial_group():
    res = thm51_check(trivial_group(5), DimPair(5, 2))
    assert res.A == 0.0 and res.residual < 1e-8


def test_thm51_rejects_outside_range():
    with pytest.raises(DimensionError):
        thm51_check(lens_group(2, (1, 1, 1, 1)), DimPair(7, 1))
    with pytest.raises(DimensionError):
        thm51_check(lens_group(2, (1, 1, 1, 1)), DimPair(7, 3))


def test_thm51_suite():
    assert all(c.passed for c in thm51_suite())
