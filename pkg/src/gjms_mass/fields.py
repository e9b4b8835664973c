"""Smooth scalar fields on chart domains.

A :class:`ScalarField` wraps a vectorised callable (rows of an ``(m, n)`` array
to ``(m,)`` values) together with the box it may be evaluated on. Fields
combine with ``+``, ``*`` and :meth:`ScalarField.exp`.
"""
from __future__ import annotations

import re
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .errors import StencilDomainError


def _min_domain(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


@dataclass(frozen=True)
class ScalarField:
    """A smooth function on the box ``|x_i| < domain`` (all of R^n when None)."""

    func: Callable
    name: str = "field"
    domain: float | None = None
    support: float | None = None  # radius of a ball containing the support, if compact

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            return float(np.asarray(self.func(X[None]))[0])
        flat = X.reshape(-1, X.shape[-1])
        return np.asarray(self.func(flat), dtype=float).reshape(X.shape[:-1])

    def check_stencil(self, x, reach: float):
        """Raise unless every point within ``reach`` (sup norm) of x is in the domain."""
        if self.domain is None:
            return
        if np.max(np.abs(np.asarray(x, float))) + reach >= self.domain:
            raise StencilDomainError(
                f"stencil of reach {reach:g} around {x} leaves the domain of {self.name}"
            )

    def _combine(self, other, op, symbol):
        if isinstance(other, ScalarField):
            return ScalarField(
                lambda X: op(self.func(X), other.func(X)),
                f"({self.name} {symbol} {other.name})",
                _min_domain(self.domain, other.domain),
            )
        c = float(other)
        return ScalarField(lambda X: op(self.func(X), c), f"({self.name} {symbol} {c:g})", self.domain)

    def __add__(self, other):
        return self._combine(other, np.add, "+")

    __radd__ = __add__

    def __mul__(self, other):
        return self._combine(other, np.multiply, "*")

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def exp(self) -> "ScalarField":
        return ScalarField(lambda X: np.exp(self.func(X)), f"exp({self.name})", self.domain)


def _sq(X):
    return np.sum(X * X, axis=-1)


def constant(c: float) -> ScalarField:
    c = float(c)
    return ScalarField(lambda X: np.full(X.shape[0], c), f"constant({c:g})")


def round_chart(n: int) -> ScalarField:
    """f = ln(2 / (1 + |x|^2)); e^{2f} eucl is the unit round metric of S^n."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return ScalarField(lambda X: np.log(2.0) - np.log1p(_sq(X)), f"round_chart({n})")


def gaussian(a: float, center=None, amplitude: float = 1.0) -> ScalarField:
    """amplitude * exp(-a |x - center|^2)."""
    a = float(a)

    def g(X):
        Y = X if center is None else X - np.asarray(center, float)
        return amplitude * np.exp(-a * _sq(Y))

    return ScalarField(g, f"gaussian({a:g})")


def bump(radius: float) -> ScalarField:
    """exp(1 - 1 / (1 - s^2)) with s = |x| / radius, zero for s >= 1; equals 1 at 0."""
    radius = float(radius)
    if radius <= 0:
        raise ValueError("bump radius must be positive")

    def b(X):
        s2 = _sq(X) / radius**2
        out = np.zeros_like(s2)
        inside = s2 < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - s2[inside]))
        return out

    return ScalarField(b, f"bump({radius:g})", support=radius)


def poly(coeffs) -> ScalarField:
    """sum_j coeffs[j] |x|^{2j}, an even radial polynomial."""
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("poly needs a non-empty list of coefficients")

    def p(X):
        return np.polynomial.polynomial.polyval(_sq(X), c)

    return ScalarField(p, "poly(" + ",".join(f"{v:g}" for v in c) + ")")


def linear(a) -> ScalarField:
    """x -> <a, x>."""
    a = np.asarray(a, dtype=float)
    return ScalarField(lambda X: X @ a, "linear")


def coordinate_exp(i: int, scale: float = 1.0) -> ScalarField:
    """x -> exp(scale * x^i)."""
    return ScalarField(lambda X: np.exp(scale * X[:, i]), f"exp(x{i})")


def random_poly_gaussian(n: int, rng: np.random.Generator, amplitude: float = 0.3) -> ScalarField:
    """Random quadratic polynomial times a Gaussian of unit width, of size ~amplitude."""
    c0 = rng.uniform(-1.0, 1.0)
    b = rng.uniform(-1.0, 1.0, n)
    S = rng.uniform(-1.0, 1.0, (n, n))
    S = 0.5 * (S + S.T)
    m = rng.uniform(-0.5, 0.5, n)
    a = rng.uniform(0.3, 0.8)

    def g(X):
        quad = c0 + X @ b + 0.5 * np.einsum("mi,ij,mj->m", X, S, X)
        return amplitude * quad * np.exp(-a * _sq(X - m))

    return ScalarField(g, "poly_gaussian")


_FIELD_RE = re.compile(r"^\s*(\w+)\s*\(([^)]*)\)\s*$")


def parse_field(text: str, n: int) -> ScalarField:
    """Build a named field: round_chart(n), gaussian(a), bump(radius), poly(c0,c1,...)."""
    m = _FIELD_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse field {text!r}")
    name, raw = m.group(1), m.group(2)
    args = [float(v) for v in raw.split(",") if v.strip()]
    if name == "round_chart":
        if args and int(args[0]) != n:
            raise ValueError(f"round_chart({args[0]:g}) does not match n={n}")
        return round_chart(n)
    if name == "gaussian" and len(args) == 1:
        return gaussian(args[0])
    if name == "bump" and len(args) == 1:
        return bump(args[0])
    if name == "poly" and args:
        return poly(args)
    raise ValueError(f"unknown field or wrong arguments: {text!r}")
