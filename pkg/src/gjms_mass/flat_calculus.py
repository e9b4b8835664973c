"""Curvature and GJMS operators of conformally flat metrics g = e^{2f} eucl.

Every derivative is a fourth-order central difference; compound quantities
nest stencils (J needs the 2-jet of f, Q_2 needs the Laplacian of J, and so
on). Internally fields are vectorised callables on ``(m, n)`` arrays, so a
nested evaluation is a handful of large numpy calls.

Conventions: Delta_g = -div grad (positive), delta = -div on 1-forms, so that
delta d = Delta on functions.
"""
from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .constants import DimPair, gjms_constant
from .errors import StencilDomainError
from .numerics import (
    _D1_OFFSETS,
    _D1_WEIGHTS,
    _evaluate,
    gauss_legendre,
    gradient,
    jet2,
    laplacian0,
    richardson,
    sphere_quadrature,
)

DEFAULT_STEP = 1e-2
FD_ORDER = 4


@dataclass(frozen=True)
class CurvaturePack:
    """Curvature of e^{2f} eucl at one point; tensors in chart components."""

    scal: float
    ric: np.ndarray
    schouten: np.ndarray
    j: float


def _check(field, x, reach):
    if hasattr(field, "check_stencil"):
        field.check_stencil(x, reach)


def _point(x, n):
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != n:
        raise ValueError(f"point has {x.size} coordinates, expected {n}")
    return x


# vectorised building blocks ----------------------------------------------------


def _curvature(f, X, h, n):
    """Curvature data at the rows of X."""
    val, g, H = jet2(f, X, h)
    sq = np.sum(g * g, axis=1)
    lap_an = np.trace(H, axis1=1, axis2=2)
    eye = np.eye(n)
    ric = (n - 2) * (g[:, :, None] * g[:, None, :] - H)
    ric = ric - ((n - 2) * sq + lap_an)[:, None, None] * eye
    e2f = np.exp(2.0 * val)
    scal = (-2.0 * (n - 1) * lap_an - (n - 1) * (n - 2) * sq) / e2f
    J = scal / (2.0 * (n - 1))
    P = (ric - (J * e2f)[:, None, None] * eye) / (n - 2)
    return {"f": val, "df": g, "ric": ric, "scal": scal, "J": J, "P": P}


def _J_field(f, h, n):
    return lambda X: _curvature(f, X, h, n)["J"]


def _scal_field(f, h, n):
    return lambda X: _curvature(f, X, h, n)["scal"]


def _lap_g(f, u, h, n):
    """Field Delta_g u = e^{-2f}(Delta_0 u - (n-2) <df, du>)."""

    def out(X):
        fv = _evaluate(f, X)
        df = gradient(f, X, h)
        du = gradient(u, X, h)
        return np.exp(-2.0 * fv) * (laplacian0(u, X, h) - (n - 2) * np.sum(df * du, axis=1))

    return out


def _q2_field(f, h, n):
    J = _J_field(f, h, n)
    lapJ = _lap_g(f, J, h, n)

    def out(X):
        c = _curvature(f, X, h, n)
        P2 = np.exp(-4.0 * c["f"]) * np.sum(c["P"] ** 2, axis=(1, 2))
        return lapJ(X) + 0.5 * n * c["J"] ** 2 - 2.0 * P2

    return out


def _divergence(vec, X, h):
    """sum_i d_i vec_i at the rows of X, for a field returning (m, n)."""
    m, n = X.shape
    offs = h * _D1_OFFSETS[None, :, None] * np.eye(n)[:, None, :]  # (n, 4, n)
    pts = X[:, None, None, :] + offs[None]
    vals = np.asarray(vec(pts.reshape(-1, n))).reshape(m, n, 4, n)
    diag = vals[:, np.arange(n), :, np.arange(n)]  # (n, m, 4)
    return np.einsum("imk,k->m", diag, _D1_WEIGHTS) / h


def _delta_T_du(f, u, h, n):
    """Field delta(T du) = -e^{-nf} d_i(e^{(n-2)f} w_i), w_i = (n-2)J d_i u - 4 e^{-2f} P_ik d_k u."""

    def flux(X):
        c = _curvature(f, X, h, n)
        du = gradient(u, X, h)
        w = (n - 2) * c["J"][:, None] * du
        w = w - 4.0 * np.exp(-2.0 * c["f"])[:, None] * np.einsum("mik,mk->mi", c["P"], du)
        return np.exp((n - 2) * c["f"])[:, None] * w

    def out(X):
        return -np.exp(-n * _evaluate(f, X)) * _divergence(flux, X, h)

    return out


def _p1(f, u, h, n):
    lap = _lap_g(f, u, h, n)
    scal = _scal_field(f, h, n)
    coef = (n - 2) / (4.0 * (n - 1))
    return lambda X: lap(X) + coef * scal(X) * _evaluate(u, X)


def _p2(f, u, h, n):
    bilap = _lap_g(f, _lap_g(f, u, h, n), h, n)
    div = _delta_T_du(f, u, h, n)
    q2 = _q2_field(f, h, n)
    return lambda X: bilap(X) + div(X) + 0.5 * (n - 4) * q2(X) * _evaluate(u, X)


def _operator(k, f, u, h, n):
    if k == 1:
        return _p1(f, u, h, n)
    if k == 2:
        if n < 5:
            raise ValueError("the Paneitz operator is used here for n >= 5")
        return _p2(f, u, h, n)
    raise ValueError(f"only k = 1 and k = 2 are available, got k={k}")


# public point evaluations ------------------------------------------------------


def conformal_curvature(f, x, n: int, step: float = DEFAULT_STEP) -> CurvaturePack:
    """Ricci, scalar, Schouten and J of e^{2f} eucl at x."""
    x = _point(x, n)
    _check(f, x, 2 * step)
    c = _curvature(f, x[None], step, n)
    return CurvaturePack(
        scal=float(c["scal"][0]),
        ric=c["ric"][0],
        schouten=c["P"][0],
        j=float(c["J"][0]),
    )


def christoffel(f, x, n: int, step: float = DEFAULT_STEP) -> np.ndarray:
    """Gamma[a, i, j] = delta_ai d_j f + delta_aj d_i f - delta_ij d_a f."""
    x = _point(x, n)
    _check(f, x, 2 * step)
    df = gradient(f, x[None], step)[0]
    eye = np.eye(n)
    return (
        eye[:, :, None] * df[None, None, :]
        + eye[:, None, :] * df[None, :, None]
        - df[:, None, None] * eye[None, :, :]
    )


def laplacian_g(f, u, x, n: int, step: float = DEFAULT_STEP) -> float:
    x = _point(x, n)
    _check(f, x, 2 * step)
    _check(u, x, 2 * step)
    return float(_lap_g(f, u, step, n)(x[None])[0])


def q2_curvature(f, x, n: int, step: float = DEFAULT_STEP) -> float:
    """Q_2 = Delta_g J + (n/2) J^2 - 2 |P|^2 at x."""
    if n < 5:
        raise ValueError("Q_2 is used here for n >= 5")
    x = _point(x, n)
    _check(f, x, 4 * step)
    return float(_q2_field(f, step, n)(x[None])[0])


def paneitz_apply(k: int, f, u, x, n: int, step: float = DEFAULT_STEP) -> float:
    """P_k u at x for g = e^{2f} eucl; k = 1 conformal Laplacian, k = 2 Paneitz.

    P_2 u = Delta^2 u + delta(T du) + ((n-4)/2) Q_2 u with T = (n-2) J g - 4 P.
    """
    x = _point(x, n)
    _check(f, x, 2 * k * step)
    _check(u, x, 2 * k * step)
    return float(_operator(k, f, u, step, n)(x[None])[0])


def _log_field(phi):
    return lambda X: np.log(_evaluate(phi, X))


def _sum_field(a, b, cb):
    return lambda X: _evaluate(a, X) + cb * _evaluate(b, X)


def _prod_field(a, b):
    return lambda X: _evaluate(a, X) * _evaluate(b, X)


def covariance_defect(k: int, f, phi, u, x, n: int, step: float = DEFAULT_STEP) -> float:
    """P^{g~} u - phi^{-(n+2k)/(n-2k)} P^g(phi u) at x, with g~ = phi^{4/(n-2k)} g."""
    dims = DimPair(n, k)
    x = _point(x, n)
    for field in (f, phi, u):
        _check(field, x, 2 * k * step)
    phi_x = float(_evaluate(phi, x[None])[0])
    if phi_x <= 0:
        raise ValueError("conformal factor phi must be positive")
    f_tilde = _sum_field(f, _log_field(phi), 2.0 / dims.weight)
    lhs = _operator(k, f_tilde, u, step, n)(x[None])[0]
    rhs = _operator(k, f, _prod_field(phi, u), step, n)(x[None])[0]
    return float(lhs - phi_x ** (-(n + 2 * k) / dims.weight) * rhs)


def covariance_residual(k: int, f, phi, u, x, n: int, step: float = DEFAULT_STEP) -> float:
    """Absolute value of :func:`covariance_defect`."""
    return abs(covariance_defect(k, f, phi, u, x, n, step))


def _prop21_bracket(f, w, h, n):
    """Delta^2 w + 2 T w + (n/2) J Delta w - (2 - n/2) Delta(J w), with
    T w = 2 P^{ij} nabla^2_ij w + <dJ, dw>."""
    lap = _lap_g(f, w, h, n)
    bilap = _lap_g(f, lap, h, n)
    J = _J_field(f, h, n)
    lapJw = _lap_g(f, _prod_field(J, w), h, n)

    def out(X):
        c = _curvature(f, X, h, n)
        wv, dw, Hw = jet2(w, X, h)
        df = c["df"]
        # Gamma^a_ij d_a w = d_j f d_i w + d_i f d_j w - delta_ij <df, dw>
        gam = df[:, None, :] * dw[:, :, None] + df[:, :, None] * dw[:, None, :]
        gam = gam - np.sum(df * dw, axis=1)[:, None, None] * np.eye(n)
        hess_g = Hw - gam
        e2f = np.exp(-2.0 * c["f"])
        Tw = 2.0 * e2f**2 * np.sum(c["P"] * hess_g, axis=(1, 2))
        Tw = Tw + e2f * np.sum(gradient(J, X, h) * dw, axis=1)
        return bilap(X) + 2.0 * Tw + 0.5 * n * c["J"] * lap(X) - (2.0 - 0.5 * n) * lapJw(X)

    return out


def gjms_second_term_defect(f, w, x, n: int, step: float = DEFAULT_STEP) -> float:
    """R(w)/w(x), where R(w) = P_2 w - B(w) and B is the explicit fourth-order
    bracket; independent of w when the remainder is a multiplication operator."""
    if n < 5:
        raise ValueError("needs n >= 5")
    x = _point(x, n)
    wx = float(_evaluate(w, x[None])[0])
    if abs(wx) < 1e-12:
        raise ValueError("test function vanishes at the evaluation point")
    P = _p2(f, w, step, n)(x[None])[0]
    B = _prop21_bracket(f, w, step, n)(x[None])[0]
    return float((P - B) / wx)


def gjms_second_term_residual(f, u, v, x, n: int, step: float = DEFAULT_STEP) -> float:
    """|R(u)/u(x) - R(v)/v(x)|; vanishes because the remainder has order zero."""
    for field in (f, u, v):
        _check(field, x, 4 * step)
    return abs(gjms_second_term_defect(f, u, x, n, step) - gjms_second_term_defect(f, v, x, n, step))


def step_extrapolate(func: Callable[[float], float], step: float = DEFAULT_STEP, order: int = FD_ORDER):
    """Richardson over steps {h, h/2}: returns (value, |difference|)."""
    values = [func(step), func(step / 2)]
    best, _ = richardson(values, [step, step / 2], orders=(order,))
    return best, abs(values[1] - values[0])


# distributional pairing --------------------------------------------------------


@dataclass(frozen=True)
class DiracGrid:
    """Polar quadrature on the ball of ``radius``: ``panels`` Gauss-Legendre
    panels of ``order`` nodes in r, a product rule of ``sphere_order`` on the
    unit sphere, and FD ``step`` for Delta_0^k."""

    radius: float
    panels: int = 16
    order: int = 4
    sphere_order: int = 2
    step: float = 1e-2

    def refined(self, times: int = 1) -> "DiracGrid":
        return DiracGrid(self.radius, self.panels * 2**times, self.order, self.sphere_order, self.step)


def _lap_power(u, k, h):
    field = u
    for _ in range(k):
        field = (lambda g: (lambda X: laplacian0(g, X, h)))(field)
    return field


def dirac_pairing(dims: DimPair, test, grid: DiracGrid) -> float:
    """Quadrature of the integral of r^{2k-n} Delta_0^k(test) over the ball of grid.radius.

    In polar form the integrand r^{2k-1} Delta_0^k(test)(r theta) is smooth, so
    uniform Gauss-Legendre panels in r converge without grading towards the
    origin. Tends to c_{n,k} test(0).
    """
    n, k = dims.n, dims.k
    R = float(grid.radius)
    support = getattr(test, "support", None)
    dirs, wdir = sphere_quadrature(n, grid.sphere_order)
    if support is not None:
        if support >= R:
            raise StencilDomainError("test support touches the quadrature boundary")
    else:
        edge = np.abs(_evaluate(test, R * dirs))
        if np.max(edge) > 0.0:
            raise StencilDomainError("test function does not vanish on the quadrature boundary")
    edges = np.linspace(0.0, R, grid.panels + 1)
    total = 0.0
    lap_k = _lap_power(test, k, grid.step)
    for a, b in zip(edges[:-1], edges[1:]):
        r, wr = gauss_legendre(a, b, grid.order)
        pts = (r[:, None, None] * dirs[None]).reshape(-1, n)
        vals = lap_k(pts).reshape(r.size, dirs.shape[0])
        total += float(np.sum(wr * r ** (2 * k - 1) * (vals @ wdir)))
    return total


def dirac_refinement(dims: DimPair, test, grid: DiracGrid, levels: int = 3):
    """Pairings over successive panel doublings, with the target c_{n,k} test(0)."""
    values = [dirac_pairing(dims, test, grid.refined(j)) for j in range(levels)]
    target = gjms_constant(dims) * float(_evaluate(test, np.zeros((1, dims.n)))[0])
    return values, target
