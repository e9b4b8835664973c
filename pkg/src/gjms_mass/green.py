"""Closed-form Green functions of P_k on R^n, the round sphere and its quotients."""
from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .constants import DimPair, gjms_constant
from .errors import DimensionError, SingularityError
from .moebius import ChartFrame, _coords, from_chart

# Below this distance, r^{2k-n} amplifies roundoff beyond usefulness.
SINGULAR_TOL = 1e-9


@dataclass(frozen=True)
class GreenKernel:
    """A two-point Green function.

    ``geometry`` is one of ``"flat"``, ``"sphere"``, ``"space_form"`` or
    ``"chart"``; ``evaluate(x, y)`` accepts single points or stacked rows.
    """

    geometry: str
    dims: DimPair
    evaluate: Callable
    group: object = None

    def __call__(self, x, y):
        return self.evaluate(x, y)


def _power_kernel(dims: DimPair, d):
    d = np.asarray(d, dtype=float)
    if np.any(d < SINGULAR_TOL):
        raise SingularityError("Green function evaluated on the diagonal")
    out = d ** (2 * dims.k - dims.n) / gjms_constant(dims)
    return float(out) if out.ndim == 0 else out


def green_flat(dims: DimPair, x, y):
    """c_{n,k}^{-1} |x - y|^{2k-n}."""
    d = np.linalg.norm(np.asarray(x, float) - np.asarray(y, float), axis=-1)
    return _power_kernel(dims, d)


def green_sphere(dims: DimPair, p, q):
    """c_{n,k}^{-1} |xi(p) - xi(q)|^{2k-n} on the unit sphere S^n."""
    d = np.linalg.norm(_coords(p) - _coords(q), axis=-1)
    return _power_kernel(dims, d)


def green_space_form(group, dims: DimPair, x, y):
    """Green function of Gamma \\ S^n from lifts x, y: sum over gamma of G_sphere(x, gamma y)."""
    X = _coords(x)
    Y = _coords(y)
    # images[g] = gamma_g y, summed in the fixed element order
    images = np.einsum("gij,...j->g...i", group.elements, Y)
    d = np.linalg.norm(X[None] - images, axis=-1)
    if np.any(d < SINGULAR_TOL):
        raise SingularityError("points lie in the same group orbit")
    terms = d ** (2 * dims.k - dims.n)
    out = terms.sum(axis=0) / gjms_constant(dims)
    return float(out) if np.ndim(out) == 0 else out


def flat_kernel(dims: DimPair) -> GreenKernel:
    return GreenKernel("flat", dims, lambda x, y: green_flat(dims, x, y))


def sphere_kernel(dims: DimPair) -> GreenKernel:
    return GreenKernel("sphere", dims, lambda p, q: green_sphere(dims, p, q))


def space_form_kernel(group, dims: DimPair) -> GreenKernel:
    if group.ambient != dims.n + 1:
        raise DimensionError(
            f"group acts on R^{group.ambient}, expected R^{dims.n + 1} for n={dims.n}"
        )
    return GreenKernel(
        "space_form", dims, lambda p, q: green_space_form(group, dims, p, q), group
    )


def chart_kernel(kernel: GreenKernel, frame: ChartFrame) -> GreenKernel:
    """The sphere kernel read in stereographic coordinates (no conformal weight)."""
    return GreenKernel(
        "chart",
        kernel.dims,
        lambda x, y: kernel(from_chart(frame, x), from_chart(frame, y)),
        kernel.group,
    )


def conformal_transport_green(kernel: GreenKernel, factor: Callable, x, y):
    """G(x, y) / (phi(x) phi(y)): the Green function of phi^{4/(n-2k)} g."""
    fx = np.asarray(factor(x), dtype=float)
    fy = np.asarray(factor(y), dtype=float)
    if np.any(fx <= 0) or np.any(fy <= 0):
        raise ValueError("conformal factor must be strictly positive")
    out = np.asarray(kernel(x, y), dtype=float) / (fx * fy)
    return float(out) if out.ndim == 0 else out


def round_to_flat_factor(dims: DimPair) -> Callable:
    """w(x) = ((1 + |x|^2) / 2)^{(n-2k)/2}, so that eucl = w^{4/(n-2k)} g_round."""
    def w(x):
        X = np.asarray(x, dtype=float)
        return (0.5 * (1.0 + np.sum(X * X, axis=-1))) ** (0.5 * dims.weight)

    return w
