"""Finite differences, Richardson extrapolation and quadrature rules.

Fields are vectorised callables: they take an array of points of shape
``(m, n)`` and return an array of shape ``(m,)``. All stencils are central and
fourth order.
"""
from __future__ import annotations

from collections.abc import Callable, Sequence

import numpy as np
from scipy.special import roots_gegenbauer

Field = Callable[[np.ndarray], np.ndarray]

# f'(0) ~ sum c_j f(j h) / h over j = -2, -1, 1, 2
_D1_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
_D1_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
# f''(0) ~ sum c_j f(j h) / h^2 over j = -2..2 (centre handled separately)
_D2_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
_D2_WEIGHTS = np.array([-1.0, 16.0, 16.0, -1.0]) / 12.0
_D2_CENTER = -30.0 / 12.0


def _evaluate(f: Field, pts: np.ndarray) -> np.ndarray:
    """Evaluate ``f`` on an array of points of shape (..., n)."""
    shape = pts.shape[:-1]
    vals = np.asarray(f(pts.reshape(-1, pts.shape[-1])), dtype=float)
    return vals.reshape(shape)


def _axis_offsets(n: int, h: float) -> np.ndarray:
    """Offsets of shape (n, 4, n): four points along each coordinate axis."""
    eye = np.eye(n)
    return h * _D1_OFFSETS[None, :, None] * eye[:, None, :]


def gradient(f: Field, X: np.ndarray, h: float) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[1]
    vals = _evaluate(f, X[:, None, None, :] + _axis_offsets(n, h)[None])
    return vals @ _D1_WEIGHTS / h


def laplacian0(f: Field, X: np.ndarray, h: float) -> np.ndarray:
    """Positive flat Laplacian ``-sum_i d_i^2 f`` at each row of X."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[1]
    center = _evaluate(f, X)
    side = _evaluate(f, X[:, None, None, :] + _axis_offsets(n, h)[None])
    d2 = (side @ _D2_WEIGHTS).sum(axis=1) + n * _D2_CENTER * center
    return -d2 / h**2


def jet2(f: Field, X: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Value, gradient (m, n) and Hessian (m, n, n) of f at each row of X.

    Mixed partials use the tensor product of two first-derivative stencils.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    m, n = X.shape
    center = _evaluate(f, X)
    side = _evaluate(f, X[:, None, None, :] + _axis_offsets(n, h)[None])  # (m, n, 4)
    grad = side @ _D1_WEIGHTS / h
    hess = np.empty((m, n, n))
    diag = (side @ _D2_WEIGHTS + _D2_CENTER * center[:, None]) / h**2
    hess[:, np.arange(n), np.arange(n)] = diag
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if pairs:
        eye = np.eye(n)
        off = []
        for i, j in pairs:
            oi = h * _D1_OFFSETS[:, None, None] * eye[i]
            oj = h * _D1_OFFSETS[None, :, None] * eye[j]
            off.append(oi + oj)
        off = np.stack(off)  # (npairs, 4, 4, n)
        vals = _evaluate(f, X[:, None, None, None, :] + off[None])  # (m, npairs, 4, 4)
        mixed = np.einsum("mpab,a,b->mp", vals, _D1_WEIGHTS, _D1_WEIGHTS) / h**2
        for p, (i, j) in enumerate(pairs):
            hess[:, i, j] = mixed[:, p]
            hess[:, j, i] = mixed[:, p]
    return center, grad, hess


def richardson(values: Sequence[float], steps: Sequence[float], orders: Sequence[float]):
    """Extrapolate ``values`` (taken at ``steps``) to step 0.

    The error is assumed to expand as ``sum_j a_j step**orders[j]``; level j of
    the tableau removes ``orders[j]``. Uses as many levels as the data allows.
    Returns ``(estimate, error_estimate)`` where the error estimate is the
    difference between the two most extrapolated entries.
    """
    vals = [float(v) for v in values]
    steps = [float(s) for s in steps]
    if len(vals) != len(steps) or not vals:
        raise ValueError("values and steps must be non-empty and of equal length")
    levels = min(len(vals) - 1, len(orders))
    table = [vals]
    for j in range(levels):
        prev = table[-1]
        p = orders[j]
        row = []
        for i in range(1, len(prev)):
            # prev[i] covers steps[i : i + j + 1]; compare the finest steps of the pair
            ratio = (steps[i + j - 1] / steps[i + j]) ** p
            row.append(prev[i] + (prev[i] - prev[i - 1]) / (ratio - 1.0))
        table.append(row)
    best = table[-1][-1]
    if len(table) >= 2:
        err = abs(table[-1][-1] - table[-2][-1])
    else:
        err = float("inf")
    return best, err


def gauss_legendre(a: float, b: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


def gl_panels(edges: Sequence[float], order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule over consecutive intervals of ``edges``."""
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = gauss_legendre(a, b, order)
        nodes.append(x)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def graded_edges(radius: float, panels: int, ratio: float = 0.5) -> list[float]:
    """Panel edges on [0, radius], geometrically refined towards 0."""
    edges = [radius * ratio**j for j in range(panels)]
    return [0.0] + edges[::-1]


def sphere_quadrature(ambient: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Product rule on the unit sphere S^{ambient-1} in R^ambient.

    In each polar coordinate t = cos(theta) it uses Gauss-Gegenbauer nodes for
    the Jacobian weight (1 - t^2)^{(d-3)/2}, and ``2 * order`` uniform nodes in
    the last angle. Exact for polynomials of degree < 2 * order. Returns unit
    vectors of shape (N, ambient) and weights summing to the sphere's volume.
    """
    if ambient < 2:
        raise ValueError("ambient dimension must be >= 2")
    if order < 1:
        raise ValueError("order must be >= 1")
    m = 2 * order
    phi = 2.0 * np.pi * (np.arange(m) + 0.5) / m
    pts = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    wts = np.full(m, 2.0 * np.pi / m)
    for d in range(3, ambient + 1):
        t, wt = roots_gegenbauer(order, 0.5 * (d - 2))
        s = np.sqrt(1.0 - t * t)
        new_pts = np.concatenate(
            [t[:, None, None].repeat(len(pts), axis=1), s[:, None, None] * pts[None]],
            axis=2,
        )
        pts = new_pts.reshape(-1, d)
        wts = (wt[:, None] * wts[None]).reshape(-1)
    return pts, wts
