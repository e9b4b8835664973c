"""Round sphere, stereographic charts and Moebius transformations of R^n.

Charts are normalised so that the round metric pulls back to
``(2 / (1 + |x|^2))**2`` times the Euclidean metric, with the chart centre at
the origin and its antipode at infinity.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ChartPoleError

_POLE_TOL = 1e-12


def _coords(p) -> np.ndarray:
    return np.asarray(getattr(p, "coords", p), dtype=float)


@dataclass(frozen=True)
class SpherePoint:
    """A point of the unit sphere S^n in R^{n+1}; renormalised on construction."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float).reshape(-1)
        norm = np.linalg.norm(c)
        if norm == 0.0 or not np.isfinite(norm):
            raise ValueError("cannot normalise a zero or non-finite vector")
        object.__setattr__(self, "coords", c / norm)

    @property
    def dim(self) -> int:
        return self.coords.size - 1


def _tangent_basis(c: np.ndarray) -> np.ndarray:
    """Orthonormal basis of c^perp as the columns of an (n+1, n) matrix.

    Columns 1..n of a Householder reflection exchanging e_0 and +-c.
    """
    e0 = np.zeros_like(c)
    e0[0] = 1.0
    v = e0 - c if c[0] <= 0 else e0 + c
    H = np.eye(c.size) - 2.0 * np.outer(v, v) / (v @ v)
    return H[:, 1:]


@dataclass(frozen=True)
class ChartFrame:
    """Stereographic chart sending ``center`` to 0 and its antipode to infinity."""

    center: SpherePoint
    basis: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.center, SpherePoint):
            object.__setattr__(self, "center", SpherePoint(self.center))
        object.__setattr__(self, "basis", _tangent_basis(self.center.coords))

    @property
    def n(self) -> int:
        return self.center.dim


def to_chart(frame: ChartFrame, p) -> np.ndarray:
    """Stereographic image of p (or of each row of an array of sphere points)."""
    P = _coords(p)
    c = frame.center.coords
    t = P @ c
    denom = 1.0 + t
    if np.any(denom < _POLE_TOL):
        raise ChartPoleError("point is the antipode of the chart centre")
    y = P @ frame.basis
    return y / np.expand_dims(denom, -1)


def from_chart(frame: ChartFrame, x) -> np.ndarray:
    """Inverse of :func:`to_chart`; returns unit vectors of R^{n+1}."""
    X = np.asarray(x, dtype=float)
    s = np.sum(X * X, axis=-1)
    c = frame.center.coords
    out = np.multiply.outer((1.0 - s) / (1.0 + s), c)
    out = out + (2.0 / (1.0 + s))[..., None] * (X @ frame.basis.T)
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


def round_factor(x) -> np.ndarray | float:
    """F(x) = 2 / (1 + |x|^2); the round metric in the chart is F^2 eucl."""
    X = np.asarray(x, dtype=float)
    return 2.0 / (1.0 + np.sum(X * X, axis=-1))


def chordal_distance(p, q) -> np.ndarray | float:
    """Euclidean distance between embedded sphere points (= 2 sin(geodesic/2))."""
    return np.linalg.norm(_coords(p) - _coords(q), axis=-1)


# Moebius maps -----------------------------------------------------------------


@dataclass(frozen=True)
class Isometry:
    """x -> Q x + b with Q orthogonal."""

    Q: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        if np.max(np.abs(Q.T @ Q - np.eye(Q.shape[0]))) > 1e-12:
            raise ValueError("isometry matrix is not orthogonal")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))

    def apply(self, X):
        return X @ self.Q.T + self.b, np.ones(X.shape[:-1])


@dataclass(frozen=True)
class Dilation:
    factor: float

    def __post_init__(self):
        if not self.factor > 0:
            raise ValueError("dilation factor must be positive")

    def apply(self, X):
        return self.factor * X, np.full(X.shape[:-1], float(self.factor))


@dataclass(frozen=True)
class Inversion:
    """x -> x / |x|^2, conformal factor |x|^{-2}."""

    def apply(self, X):
        s = np.sum(X * X, axis=-1)
        if np.any(s < _POLE_TOL**2):
            raise ChartPoleError("inversion evaluated at its pole")
        return X / s[..., None], 1.0 / s


@dataclass(frozen=True)
class MoebiusMap:
    """Composition of primitive moves, applied left to right."""

    moves: tuple = ()

    def then(self, move) -> "MoebiusMap":
        return MoebiusMap(self.moves + (move,))


def moebius_apply(h: MoebiusMap, x):
    """Image h(x) and the conformal factor phi(x) with h^* eucl = phi^2 eucl."""
    X = np.asarray(x, dtype=float)
    factor = np.ones(X.shape[:-1])
    for move in h.moves:
        X, f = move.apply(X)
        factor = factor * f
    if factor.ndim == 0:
        factor = float(factor)
    return X, factor


def moebius_identity_residual(h: MoebiusMap, x, y):
    """|h(x) - h(y)|^2 - phi(x) phi(y) |x - y|^2, which vanishes for Moebius maps."""
    hx, fx = moebius_apply(h, x)
    hy, fy = moebius_apply(h, y)
    lhs = np.sum((hx - hy) ** 2, axis=-1)
    rhs = fx * fy * np.sum((np.asarray(x, float) - np.asarray(y, float)) ** 2, axis=-1)
    return lhs - rhs


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed element of O(n) via QR with sign correction."""
    A = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(A)
    return Q * np.sign(np.diag(R))


def random_moebius(n: int, stages: int, rng: np.random.Generator) -> MoebiusMap:
    """Random composition of ``stages`` primitive moves with moderate scales.

    Translations have norm <= 1 and dilations lie in [0.5, 2], so sampled
    images stay at unit scale away from inversion poles.
    """
    moves = []
    for _ in range(stages):
        kind = rng.integers(3)
        if kind == 0:
            b = rng.standard_normal(n)
            b *= rng.uniform(0.0, 1.0) / np.linalg.norm(b)
            moves.append(Isometry(random_orthogonal(n, rng), b))
        elif kind == 1:
            moves.append(Dilation(float(np.exp(rng.uniform(np.log(0.5), np.log(2.0))))))
        else:
            moves.append(Inversion())
    return MoebiusMap(tuple(moves))


def min_inversion_radius(h: MoebiusMap, x) -> float:
    """Smallest norm of the input of any inversion stage along the orbit of x."""
    X = np.asarray(x, dtype=float)
    best = np.inf
    for move in h.moves:
        if isinstance(move, Inversion):
            best = min(best, float(np.min(np.linalg.norm(X, axis=-1))))
        X, _ = move.apply(X)
    return best
