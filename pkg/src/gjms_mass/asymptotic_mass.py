"""Stereographic blow-ups and their asymptotic masses.

The blow-up of a quotient of the round sphere at p is read in the chart
centred at p and then in inverted coordinates z = x / |x|^2, where it becomes
V(z)^{4/(n-2k)} eucl with V -> c_{n,k}^{-1} at infinity. Masses are surface
integrals over large spheres |z| = R, extrapolated in 1/R.

Reported masses refer to the blow-up of the round metric itself; the chart
flat metric differs from it by the constant factor w(0)^{4/(n-2k)}, which the
profile records as ``round_scale``.
"""
from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .constants import DimPair, gjms_constant
from .errors import DimensionError, SingularityError
from .green import GreenKernel, chart_kernel, conformal_transport_green, round_to_flat_factor
from .moebius import ChartFrame, SpherePoint, to_chart
from .numerics import _D1_OFFSETS, _D1_WEIGHTS, laplacian0, richardson, sphere_quadrature
from .space_forms import MassReport, mass_closed_form, space_form_kernel

DEFAULT_RADII = (20.0, 40.0, 80.0)
SPHERE_ORDER = 6
RADIAL_STEP = 0.02  # FD step as a fraction of R


@dataclass(frozen=True)
class BlowupProfile:
    """Conformally flat end V(z)^{4/(n-2k)} eucl on |z| >= rho_min."""

    dims: DimPair
    V: Callable
    v_inf: float
    rho_min: float = 1.0
    round_scale: float = 1.0
    label: str = "profile"

    def __call__(self, Z):
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        if np.any(np.linalg.norm(Z, axis=1) < self.rho_min * (1 - 1e-12)):
            raise SingularityError("profile evaluated inside rho_min")
        return self.V(Z)


def _orbit_chart_distance(kernel: GreenKernel, frame: ChartFrame) -> float:
    """Smallest chart norm of a non-trivial orbit image of the chart centre."""
    group = kernel.group
    if group is None or group.order == 1:
        return math.inf
    xi = frame.center.coords
    best = math.inf
    for g in group.nontrivial():
        img = g @ xi
        if 1.0 + img @ xi < 1e-12:  # antipode sits at infinity
            continue
        best = min(best, float(np.linalg.norm(to_chart(frame, img))))
    return best


def blowup_profile(
    kernel: GreenKernel,
    frame: ChartFrame,
    dims: DimPair | None = None,
    rho_min: float | None = None,
    scale: float = 1.0,
) -> BlowupProfile:
    """Inverted-coordinate profile V(z) = scale * G_chart(0, z/|z|^2) |z|^{2k-n}.

    ``kernel`` is a sphere or space-form kernel; it is transported to the flat
    chart of ``frame`` with w(x) = ((1 + |x|^2)/2)^{(n-2k)/2}.
    """
    dims = kernel.dims if dims is None else dims
    if dims != kernel.dims:
        raise DimensionError("kernel and profile dimensions differ")
    if scale <= 0:
        raise ValueError("scale must be positive")
    n, k = dims.n, dims.k
    reach = _orbit_chart_distance(kernel, frame)
    floor = 0.0 if math.isinf(reach) else 2.0 / reach
    if rho_min is None:
        rho_min = max(1.0, floor)
    elif rho_min <= floor:
        raise SingularityError(
            f"rho_min={rho_min:g} reaches the orbit singularity (need > {floor:g})"
        )
    chart_G = chart_kernel(kernel, frame)
    w = round_to_flat_factor(dims)
    origin = np.zeros(n)

    def V(Z):
        r2 = np.sum(Z * Z, axis=1)
        X = Z / r2[:, None]
        G = conformal_transport_green(chart_G, w, np.broadcast_to(origin, X.shape), X)
        return scale * np.asarray(G) * r2 ** (0.5 * (2 * k - n))

    return BlowupProfile(
        dims,
        V,
        v_inf=scale / gjms_constant(dims),
        rho_min=float(rho_min),
        round_scale=float(w(origin)),
        label=f"{kernel.geometry}:{getattr(kernel.group, 'label', 'S')}",
    )


def schwarzschild_profile(n: int, alpha: float) -> BlowupProfile:
    """U = 1 + alpha |z|^{2-n}, with flux 4 (n-1) alpha Vol(S^{n-1})."""
    dims = DimPair(n, 1)
    return BlowupProfile(
        dims,
        lambda Z: 1.0 + alpha * np.sum(Z * Z, axis=1) ** (0.5 * (2 - n)),
        v_inf=1.0,
        rho_min=max(1.0, 2 * abs(alpha)) if alpha else 1.0,
        label=f"schwarzschild({alpha:g})",
    )


def constant_profile(dims: DimPair, value: float = 1.0) -> BlowupProfile:
    return BlowupProfile(dims, lambda Z: np.full(Z.shape[0], float(value)), v_inf=float(value),
                         label="constant")


def _radial_derivative(F, R, dirs, h):
    pts = (R + h * _D1_OFFSETS)[None, :, None] * dirs[:, None, :]
    vals = F(pts.reshape(-1, dirs.shape[1])).reshape(dirs.shape[0], 4)
    return vals @ _D1_WEIGHTS / h


def _extrapolate(values, radii):
    inv = [1.0 / r for r in radii]
    best, err = richardson(values, inv, orders=(1, 2, 3))
    details = {}
    inc = np.abs(np.diff(values))
    scale = max(abs(v) for v in values)
    if len(inc) > 1 and inc[-1] > inc[-2] and inc[-1] > 1e-9 * max(scale, 1e-300):
        details["warning"] = "surface integrals do not settle as R grows"
        err = max(err, float(inc[-1]))
    return best, err, details


def _check_radii(profile, radii):
    radii = [float(r) for r in radii]
    if not radii or any(a >= b for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be a non-empty increasing list")
    if radii[0] * (1 - 4 * RADIAL_STEP) <= profile.rho_min:
        raise SingularityError("smallest radius must exceed the profile's rho_min")
    return radii


def _mass_scale(profile: BlowupProfile, mass_k: int) -> float:
    """m(const^{4/(n-2kp)} g) / m(g) for the profile constant v_inf * round_scale."""
    n, kp = profile.dims.n, profile.dims.k
    c = profile.v_inf * profile.round_scale
    return c ** (2.0 * (n - 2 * mass_k) / (n - 2 * kp))


def adm_integral(profile: BlowupProfile, radii=DEFAULT_RADII, sphere_order: int = SPHERE_ORDER) -> MassReport:
    """ADM flux of U^{4/(n-2)} eucl, U = V / v_inf, rescaled to the profile's metric.

    The integrand d_i g_ij - d_j g_ii reduces to -(n-1) d_rho psi for g = psi eucl.
    """
    if profile.dims.k != 1:
        raise DimensionError("the ADM integral applies to k = 1 profiles")
    n = profile.dims.n
    radii = _check_radii(profile, radii)
    dirs, wts = sphere_quadrature(n, sphere_order)

    def psi(Z):
        return (profile(Z) / profile.v_inf) ** (4.0 / (n - 2))

    fluxes = []
    for R in radii:
        d = _radial_derivative(psi, R, dirs, RADIAL_STEP * R)
        fluxes.append(float(-(n - 1) * R ** (n - 1) * (wts @ d)))
    flux, err, details = _extrapolate(fluxes, radii)
    factor = _mass_scale(profile, 1)
    value = flux * factor
    c = gjms_constant(profile.dims)
    details.update(
        raw_flux=flux,
        fluxes=fluxes,
        radii=radii,
        barred=c**2 * value,
        adm_16pi=value / (16 * math.pi),
    )
    return MassReport(value, "surface_integral", err * factor, details)


def _scal_field(profile: BlowupProfile):
    """W and Scal(Z, h) of V^{4/(n-2kp)} eucl / v_inf, via W = U^{(n-2)/(n-2kp)}."""
    n, kp = profile.dims.n, profile.dims.k
    expo = (n - 2.0) / (n - 2 * kp)

    def W(Z):
        return (profile(Z) / profile.v_inf) ** expo

    def scal(Z, h):
        return 4.0 * (n - 1) / (n - 2) * W(Z) ** (-(n + 2) / (n - 2)) * laplacian0(W, Z, h)

    return W, scal


def mk_surface_integral(profile: BlowupProfile, radii=DEFAULT_RADII, sphere_order: int = SPHERE_ORDER) -> MassReport:
    """m_2 = integral of Delta Scal dv as the flux -oint W^2 d_rho Scal dsigma.

    Any profile order is accepted: the metric is rewritten as W^{4/(n-2)} eucl,
    which gives Scal by the conformal Laplacian law.
    """
    n = profile.dims.n
    if n < 5:
        raise DimensionError("the second-order mass needs n >= 5")
    radii = _check_radii(profile, radii)
    dirs, wts = sphere_quadrature(n, sphere_order)
    W, scal = _scal_field(profile)
    fluxes = []
    for R in radii:
        h = RADIAL_STEP * R
        dS = _radial_derivative(lambda Z: scal(Z, 0.5 * h), R, dirs, h)
        fluxes.append(float(-(R ** (n - 1)) * (wts @ (W(R * dirs) ** 2 * dS))))
    flux, err, details = _extrapolate(fluxes, radii)
    factor = _mass_scale(profile, 2)
    value = flux * factor
    c = gjms_constant(profile.dims)
    details.update(raw_flux=flux, fluxes=fluxes, radii=radii, barred=c**2 * value)
    return MassReport(value, "surface_integral", err * factor, details)


def flatness_defect(profile: BlowupProfile, R: float, sphere_order: int = SPHERE_ORDER) -> float:
    """max over |z| = R of |g_ij / g_inf - delta_ij| = |U^{4/(n-2k)} - 1|."""
    dirs, _ = sphere_quadrature(profile.dims.n, sphere_order)
    U = profile(R * dirs) / profile.v_inf
    return float(np.max(np.abs(U ** (4.0 / profile.dims.weight) - 1.0)))


def scal_decay(profile: BlowupProfile, radii=DEFAULT_RADII, sphere_order: int = SPHERE_ORDER):
    """Largest |Scal| on each sphere |z| = R, and the fitted log-log slope."""
    dirs, _ = sphere_quadrature(profile.dims.n, sphere_order)
    _, scal = _scal_field(profile)
    radii = _check_radii(profile, radii)
    peaks = [float(np.max(np.abs(scal(R * dirs, 0.5 * RADIAL_STEP * R)))) for R in radii]
    if min(peaks) <= 0:
        return peaks, -math.inf
    slope = np.polyfit(np.log(radii), np.log(peaks), 1)[0]
    return peaks, float(slope)


@dataclass(frozen=True)
class Thm51Result:
    """Closed-form mass A, surface mass m_k and their relative gap."""

    A: float
    mk: float
    residual: float
    coefficient: float
    report: MassReport = field(repr=False)


def thm51_check(group, dims: DimPair, radii=DEFAULT_RADII, xi=None,
                sphere_order: int = SPHERE_ORDER) -> Thm51Result:
    """Compare A with ((n-2k)/(4(n-1))) m_k of the blow-up at xi.

    The residual is relative to A, or absolute when A vanishes.
    """
    if not dims.mass_range:
        raise DimensionError(f"no mass term for n={dims.n}, k={dims.k}")
    if dims.k not in (1, 2):
        raise DimensionError("only k = 1 and k = 2 are supported")
    n = dims.n
    if xi is None:
        xi = np.eye(n + 1)[0]
    point = SpherePoint(xi)
    A = mass_closed_form(group, point, dims).value
    profile = blowup_profile(space_form_kernel(group, dims), ChartFrame(point), dims)
    if dims.k == 1:
        report = adm_integral(profile, radii, sphere_order)
    else:
        report = mk_surface_integral(profile, radii, sphere_order)
    coef = dims.weight / (4.0 * (n - 1))
    gap = A - coef * report.value
    residual = abs(gap) / A if A > 0 else abs(gap)
    return Thm51Result(A, report.value, residual, coef, report)
