import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gjms_mass.errors import ChartPoleError
from gjms_mass.moebius import (
    ChartFrame,
    Dilation,
    Inversion,
    Isometry,
    MoebiusMap,
    SpherePoint,
    chordal_distance,
    from_chart,
    moebius_apply,
    moebius_identity_residual,
    random_moebius,
    random_orthogonal,
    round_factor,
    to_chart,
)


def random_point(rng, n):
    v = rng.standard_normal(n + 1)
    return SpherePoint(v)


def test_sphere_point_normalised():
    p = SpherePoint([3.0, 4.0, 0.0])
    assert np.linalg.norm(p.coords) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        SpherePoint([0.0, 0.0])


@pytest.mark.parametrize("n", [2, 3, 5])
def test_chart_examples(n):
    rng = np.random.default_rng(n)
    frame = ChartFrame(random_point(rng, n))
    assert np.allclose(to_chart(frame, frame.center), 0.0, atol=1e-15)
    # a unit vector orthogonal to the centre lands on the unit sphere
    v = rng.standard_normal(n + 1)
    c = frame.center.coords
    v -= (v @ c) * c
    assert np.linalg.norm(to_chart(frame, v / np.linalg.norm(v))) == pytest.approx(1.0, abs=1e-13)
    p = random_point(rng, n)
    assert np.allclose(from_chart(frame, to_chart(frame, p)), p.coords, atol=1e-12)
    assert np.allclose(from_chart(frame, np.zeros(n)), c, atol=1e-15)


def test_chart_pole():
    frame = ChartFrame(SpherePoint([0.0, 0.0, 1.0, 0.0]))
    with pytest.raises(ChartPoleError):
        to_chart(frame, [0.0, 0.0, -1.0, 0.0])
    far = from_chart(frame, np.array([1e6, 0.0, 0.0]))
    assert np.allclose(far, [0.0, 0.0, -1.0, 0.0], atol=1e-5)


def test_round_factor_examples():
    assert round_factor(np.zeros(3)) == 2.0
    assert round_factor(np.array([1.0, 0.0])) == 1.0
    assert round_factor(np.array([3.0, 0.0, 0.0])) == pytest.approx(0.2)


def test_chordal_examples():
    p = SpherePoint([1.0, 0.0, 0.0])
    assert chordal_distance(p, p) == 0.0
    assert chordal_distance(p, SpherePoint([-1.0, 0.0, 0.0])) == 2.0
    assert chordal_distance(p, SpherePoint([0.0, 1.0, 0.0])) == pytest.approx(np.sqrt(2))


def test_chordal_geodesic_relation():
    rng = np.random.default_rng(1)
    for _ in range(20):
        p, q = random_point(rng, 4), random_point(rng, 4)
        geo = np.arccos(np.clip(p.coords @ q.coords, -1, 1))
        assert chordal_distance(p, q) == pytest.approx(2 * np.sin(geo / 2), abs=1e-12)
        assert chordal_distance(p, q) ** 2 == pytest.approx(2 - 2 * p.coords @ q.coords, abs=1e-14)


def test_moebius_apply_examples():
    x = np.array([0.3, -1.2, 2.0])
    img, fac = moebius_apply(MoebiusMap(), x)
    assert np.array_equal(img, x) and fac == 1.0
    y = np.array([2.0, 0.0, 0.0])
    img, fac = moebius_apply(MoebiusMap((Inversion(),)), y)
    assert np.allclose(img, y / 4) and fac == pytest.approx(0.25)
    img, fac = moebius_apply(MoebiusMap((Dilation(3.0),)), x)
    assert np.allclose(img, 3 * x) and fac == 3.0


def test_inversion_pole_and_bad_moves():
    with pytest.raises(ChartPoleError):
        moebius_apply(MoebiusMap((Inversion(),)), np.zeros(3))
    with pytest.raises(ValueError):
        Dilation(-1.0)
    with pytest.raises(ValueError):
        Isometry(np.array([[1.0, 0.1], [0.0, 1.0]]), np.zeros(2))


def test_identity_residual_inversion_example():
    h = MoebiusMap((Inversion(),))
    x, y = np.array([2.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
    hx, fx = moebius_apply(h, x)
    hy, fy = moebius_apply(h, y)
    assert np.sum((hx - hy) ** 2) == pytest.approx(1.25)
    assert fx * fy * np.sum((x - y) ** 2) == pytest.approx(1.25)
    assert moebius_identity_residual(h, x, y) == pytest.approx(0.0, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(2, 5))
def test_identity_property(seed, stages, n):
    rng = np.random.default_rng(seed)
    h = random_moebius(n, stages, rng)
    x, y = rng.uniform(-2, 2, (2, n))
    res = moebius_identity_residual(h, x, y)
    assert abs(res) < 1e-12 * (1 + np.sum((x - y) ** 2))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_factor_multiplicative(seed):
    rng = np.random.default_rng(seed)
    h1, h2 = random_moebius(3, 3, rng), random_moebius(3, 3, rng)
    x = rng.uniform(-1, 1, 3)
    y, f1 = moebius_apply(h1, x)
    _, f2 = moebius_apply(h2, y)
    _, f = moebius_apply(MoebiusMap(h1.moves + h2.moves), x)
    assert f == pytest.approx(f1 * f2, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_stereographic_pullback(seed, n):
    rng = np.random.default_rng(seed)
    frame = ChartFrame(random_point(rng, n))
    p, q = random_point(rng, n), random_point(rng, n)
    x, y = to_chart(frame, p), to_chart(frame, q)
    lhs = chordal_distance(p, q) ** 2
    rhs = round_factor(x) * round_factor(y) * np.sum((x - y) ** 2)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-13)


def test_random_orthogonal_is_orthogonal():
    Q = random_orthogonal(6, np.random.default_rng(3))
    assert np.allclose(Q.T @ Q, np.eye(6), atol=1e-13)
