import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gjms_mass.constants import DimPair
from gjms_mass.errors import DimensionError, GJMSError, MetricUndefinedError, NonFreeActionError
from gjms_mass.space_forms import (
    SpaceFormGroup,
    covering_mass_residual,
    generated_subgroup,
    hj_metric_factor,
    hj_scalar_curvature,
    lens_group,
    mass_closed_form,
    mass_field,
    mass_via_limit,
    parse_space,
    random_sphere_points,
    trivial_group,
    validate_group,
)

K1 = DimPair(3, 1)


def quaternion_group() -> SpaceFormGroup:
    """Left multiplication by +-1, +-i, +-j, +-k on H = R^4."""
    one = np.eye(4)
    i = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], float)
    j = np.array([[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]], float)
    k = i @ j
    els = [one, -one, i, -i, j, -j, k, -k]
    return SpaceFormGroup(np.array(els), "Q8")


def test_lens_examples():
    g = lens_group(2, (1, 1))
    assert g.order == 2 and np.allclose(g.elements[1], -np.eye(4))
    g7 = lens_group(7, (1, 2))
    assert g7.order == 7
    for R in g7.nontrivial():
        assert abs(np.linalg.det(R - np.eye(4))) > 1e-8
    with pytest.raises(NonFreeActionError):
        lens_group(4, (2, 1))


def test_parse_space():
    assert parse_space("L(7;1,2)").label == "L(7;1,2)"
    assert parse_space(" L( 5 ; 1 , 2 ) ").order == 5
    assert parse_space("S^5").ambient == 6
    for bad in ("L(7,2)", "X", "L(;1)"):
        with pytest.raises(ValueError):
            parse_space(bad)


def test_validation():
    assert validate_group(lens_group(5, (1, 2))).ok
    assert validate_group(quaternion_group()).ok
    g = lens_group(5, (1, 2))
    missing = SpaceFormGroup(g.elements[:-1])
    assert "closure" in validate_group(missing).failures
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    bad = SpaceFormGroup(np.array([np.eye(4), flip]))
    assert "orientation" in validate_group(bad).failures
    fixed = SpaceFormGroup(np.array([np.eye(4), np.diag([1.0, 1.0, -1.0, -1.0])]))
    assert "free_action" in validate_group(fixed).failures


def test_closed_form_examples():
    xi = np.eye(4)[0]
    assert mass_closed_form(trivial_group(3), xi, K1).value == 0.0
    rp3 = mass_closed_form(lens_group(2, (1, 1)), xi, K1)
    assert rp3.value == pytest.approx(1 / (8 * math.pi), rel=1e-15)
    assert rp3.method == "closed_form" and rp3.error_estimate == 0.0
    rng = np.random.default_rng(0)
    for p in random_sphere_points(4, 5, rng):
        assert mass_closed_form(lens_group(3, (1, 1)), p, K1).value == pytest.approx(
            1 / (2 * math.sqrt(3) * math.pi), rel=1e-14
        )
    rp5 = mass_closed_form(lens_group(2, (1, 1, 1)), np.eye(6)[2], DimPair(5, 2))
    assert rp5.value == pytest.approx(1 / (32 * math.pi**2), rel=1e-15)


def test_closed_form_dimension_mismatch():
    with pytest.raises(DimensionError):
        mass_closed_form(lens_group(3, (1, 1)), np.eye(4)[0], DimPair(5, 2))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["L(5;1,2)", "L(7;1,2)", "L(8;1,3)", "L(3;1,1,1)"]))
def test_mass_positive_and_invariant(seed, label):
    g = parse_space(label)
    dims = DimPair(g.sphere_dim, 1)
    xi = random_sphere_points(g.ambient, 1, np.random.default_rng(seed))[0]
    a = mass_closed_form(g, xi, dims).value
    assert a > 0
    for R in g.elements:
        assert mass_closed_form(g, R @ xi, dims).value == pytest.approx(a, rel=1e-13)


def test_quaternion_mass_positive():
    g = quaternion_group()
    pts = random_sphere_points(4, 20, np.random.default_rng(1))
    assert np.all(mass_field(g, K1)(pts) > 0)


def test_limit_examples():
    xi = np.array([0.2, -0.5, 0.7, 0.3])
    rp3 = mass_via_limit(lens_group(2, (1, 1)), xi, K1)
    assert rp3.value == pytest.approx(1 / (8 * math.pi), rel=1e-6)
    assert rp3.method == "limit_extraction"
    g7 = lens_group(7, (1, 2))
    assert mass_via_limit(g7, xi, K1).value == pytest.approx(mass_closed_form(g7, xi, K1).value, rel=1e-6)
    assert abs(mass_via_limit(trivial_group(3), xi, K1).value) < 1e-10


@pytest.mark.parametrize("label,k", [("L(5;1,2)", 1), ("L(3;1,1,1)", 1), ("L(3;1,1,1)", 2), ("L(2;1,1,1,1)", 3)])
def test_limit_matches_closed_form(label, k):
    g = parse_space(label)
    dims = DimPair(g.sphere_dim, k)
    for xi in random_sphere_points(g.ambient, 3, np.random.default_rng(7)):
        a = mass_closed_form(g, xi, dims).value
        assert mass_via_limit(g, xi, dims).value == pytest.approx(a, rel=1e-6)


def test_limit_single_ray():
    xi = np.array([0.2, -0.5, 0.7, 0.3])
    g = lens_group(3, (1, 1))
    rep = mass_via_limit(g, xi, K1, direction=[1.0, 0.0, 0.0])
    assert rep.value == pytest.approx(mass_closed_form(g, xi, K1).value, rel=1e-5)


def test_limit_rejects_bad_radii():
    g = lens_group(2, (1, 1))
    with pytest.raises(ValueError):
        mass_via_limit(g, np.eye(4)[0], K1, radii=(0.6, 0.3))
    with pytest.raises(ValueError):
        mass_via_limit(g, np.eye(4)[0], K1, radii=(0.1, 0.2))


@pytest.mark.parametrize("c", [0.5, 3.0])
def test_homothety_covariance(c):
    g = lens_group(7, (1, 2))
    xi = np.array([0.6, 0.1, -0.3, 0.73])
    base = mass_via_limit(g, xi, K1)
    scaled = mass_via_limit(g, xi, K1, scale=c)
    assert scaled.details["chart_constant"] == pytest.approx(base.details["chart_constant"] / c**2, rel=1e-8)
    assert scaled.value == pytest.approx(base.value, rel=1e-8)


def test_covering_examples():
    g4 = lens_group(4, (1, 1))
    pm = generated_subgroup(g4, [g4.elements[2]])
    pts = random_sphere_points(4, 10, np.random.default_rng(3))
    for xi in pts:
        assert covering_mass_residual(g4, g4, xi, K1) == 0.0
        assert abs(covering_mass_residual(pm, g4, xi, K1)) < 1e-12
        assert abs(covering_mass_residual(trivial_group(3), g4, xi, K1)) < 1e-14


def test_covering_quaternion_subgroups():
    q8 = quaternion_group()
    for gen in (q8.elements[2], q8.elements[4], q8.elements[1]):
        sub = generated_subgroup(q8, [gen])
        for xi in random_sphere_points(4, 5, np.random.default_rng(4)):
            assert abs(covering_mass_residual(sub, q8, xi, K1)) < 1e-12


def test_covering_rejects_non_subgroup():
    with pytest.raises(GJMSError):
        covering_mass_residual(lens_group(3, (1, 1)), lens_group(4, (1, 1)), np.eye(4)[0], K1)


def test_hj_factor():
    xi = np.eye(4)[0]
    assert hj_metric_factor(lens_group(2, (1, 1)), xi, K1) == pytest.approx((1 / (8 * math.pi)) ** 2)
    with pytest.raises(MetricUndefinedError):
        hj_metric_factor(trivial_group(3), xi, K1)
    g7 = lens_group(7, (1, 2))
    a = hj_metric_factor(g7, [1.0, 0.0, 0.0, 0.0], K1)
    b = hj_metric_factor(g7, [0.6, 0.0, 0.8, 0.0], K1)
    assert a > 0 and b > 0 and abs(a - b) > 1e-6 * a


def test_hj_scalar_rp3():
    pts = random_sphere_points(4, 100, np.random.default_rng(5))
    scal = hj_scalar_curvature(lens_group(2, (1, 1)), pts)
    assert np.allclose(scal, 384 * math.pi**2, rtol=1e-6)


def test_hj_scalar_matches_one_variable_formula():
    # A depends only on t with xi = (cos t, 0, sin t, 0) up to the torus action,
    # so the sphere Laplacian reduces to an ODE operator; compare with sympy.
    sp = pytest.importorskip("sympy")
    T = sp.symbols("t")
    terms = [
        1 / sp.sqrt(4 * sp.sin(sp.pi * j / 7) ** 2 * sp.cos(T) ** 2 + 4 * sp.sin(2 * sp.pi * j / 7) ** 2 * sp.sin(T) ** 2)
        for j in range(1, 7)
    ]
    A = sum(terms) / (4 * sp.pi)
    w = sp.log(A)
    lap = -sp.diff(sp.cos(T) * sp.sin(T) * sp.diff(w, T), T) / (sp.cos(T) * sp.sin(T))
    scal = sp.lambdify(T, (6 + 4 * lap - 2 * sp.diff(w, T) ** 2) / A**2)
    t = np.linspace(0.2, 1.3, 7)
    pts = np.stack([np.cos(t), 0 * t, np.sin(t), 0 * t], axis=1)
    got = hj_scalar_curvature(lens_group(7, (1, 2)), pts)
    assert np.allclose(got, [scal(v) for v in t], rtol=1e-6)


def test_hj_needs_three_sphere():
    with pytest.raises(DimensionError):
        hj_scalar_curvature(lens_group(2, (1, 1, 1)), np.eye(6)[0])
