"""Constants of the flat model: sphere volumes, c_{n,k}, and the action of the
flat Laplacian powers on homogeneous radial functions.

Laplacian sign convention used everywhere in the package: Delta = -sum_i d_i^2
(the geometer's positive Laplacian).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DimensionError


@dataclass(frozen=True)
class DimPair:
    """Dimension ``n`` of the manifold and order index ``k`` of P_k (order 2k)."""

    n: int
    k: int

    def __post_init__(self):
        if int(self.n) != self.n or int(self.k) != self.k:
            raise DimensionError(f"n and k must be integers, got {self.n!r}, {self.k!r}")
        if self.n < 3:
            raise DimensionError(f"n must be >= 3, got {self.n}")
        if self.k < 1:
            raise DimensionError(f"k must be >= 1, got {self.k}")
        if self.n <= 2 * self.k:
            raise DimensionError(f"need n > 2k, got n={self.n}, k={self.k}")

    @property
    def mass_range(self) -> bool:
        """True iff 2k+1 <= n <= 2k+3, where the Green function has a constant term."""
        return 2 * self.k + 1 <= self.n <= 2 * self.k + 3

    @property
    def weight(self) -> int:
        """n - 2k, the exponent governing the singularity r^{2k-n}."""
        return self.n - 2 * self.k


def _half_gamma(two_s: int) -> tuple[Fraction, int]:
    """Gamma(two_s / 2) as ``coef * sqrt(pi)**e`` with e in {0, 1}.

    Uses Gamma(s+1) = s Gamma(s) from Gamma(1) = 1 or Gamma(1/2) = sqrt(pi).
    """
    if two_s < 1:
        raise ValueError("argument must be a positive half-integer")
    if two_s % 2 == 0:
        coef, s = Fraction(1), Fraction(1)
        e = 0
    else:
        coef, s = Fraction(1), Fraction(1, 2)
        e = 1
    while 2 * s < two_s:
        coef *= s
        s += 1
    return coef, e


def _sphere_volume_exact(d: int) -> tuple[Fraction, int]:
    """Vol(S^d) = coef * pi**power, exactly."""
    if d < 0:
        raise ValueError(f"sphere dimension must be >= 0, got {d}")
    g_coef, g_e = _half_gamma(d + 1)
    # 2 pi^{(d+1)/2} / Gamma((d+1)/2); the sqrt(pi) parts cancel to an integer power.
    coef = Fraction(2) / g_coef
    twice_power = (d + 1) - g_e
    return coef, twice_power // 2


def vol_sphere(d: int) -> float:
    """Volume of the unit d-sphere in R^{d+1}."""
    coef, power = _sphere_volume_exact(d)
    return float(coef) * math.pi**power


def _gjms_exact(dims: DimPair) -> tuple[Fraction, int]:
    n, k = dims.n, dims.k
    coef, power = _sphere_volume_exact(n - 1)
    coef *= 2 ** (k - 1) * math.factorial(k - 1)
    for j in range(1, k + 1):
        coef *= n - 2 * j
    return coef, power


def gjms_constant(dims: DimPair) -> float:
    """c_{n,k} = Vol(S^{n-1}) 2^{k-1} (k-1)! (n-2)(n-4)...(n-2k)."""
    coef, power = _gjms_exact(dims)
    return float(coef) * math.pi**power


def gjms_constant_exact(dims: DimPair) -> str:
    """c_{n,k} as a string ``"<rational>*pi^<m>"``, e.g. ``"16*pi^2"``."""
    coef, power = _gjms_exact(dims)
    return format_pi_power(coef, power)


def format_pi_power(coef: Fraction, power: int) -> str:
    head = str(coef.numerator) if coef.denominator == 1 else f"{coef.numerator}/{coef.denominator}"
    if power == 0:
        return head
    tail = "pi" if power == 1 else f"pi^{power}"
    return f"{head}*{tail}"


def radial_power_coefficient(dims: DimPair, alpha: float) -> float:
    """C with Delta_0^k r^alpha = C r^{alpha-2k} on R^n minus the origin."""
    n = dims.n
    coef = 1.0
    for j in range(dims.k):
        beta = alpha - 2 * j
        coef *= -beta * (beta + n - 2)
    return coef


def homogeneous_invertibility(dims: DimPair, alpha: float) -> bool:
    """Whether Delta_0^k is invertible on functions homogeneous of degree alpha.

    True iff alpha is not an integer or 2k - n < alpha < 0.
    """
    if not math.isfinite(alpha):
        raise ValueError("homogeneity degree must be finite")
    if alpha != math.floor(alpha):
        return True
    return 2 * dims.k - dims.n < alpha < 0
