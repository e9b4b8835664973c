"""Spherical space forms Gamma \\ S^n: groups, GJMS masses and the
Habermann-Jost metric."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .constants import DimPair, gjms_constant
from .errors import DimensionError, GJMSError, MetricUndefinedError, NonFreeActionError
from .green import (
    chart_kernel,
    conformal_transport_green,
    green_space_form,
    round_to_flat_factor,
    space_form_kernel,
)
from .moebius import ChartFrame, SpherePoint, _coords
from .numerics import gradient, laplacian0, richardson, sphere_quadrature

MEMBERSHIP_TOL = 1e-10
FREE_ACTION_TOL = 1e-8
DEFAULT_RADII = (0.2, 0.1, 0.05, 0.025)


@dataclass(frozen=True)
class SpaceFormGroup:
    """A finite group of orthogonal matrices, stored as an explicit element list.

    Element 0 is expected to be the identity. No validation happens on
    construction; see :func:`validate_group`.
    """

    elements: np.ndarray
    label: str = ""

    def __post_init__(self):
        els = np.asarray(self.elements, dtype=float)
        if els.ndim != 3 or els.shape[1] != els.shape[2]:
            raise ValueError("elements must have shape (order, N, N)")
        object.__setattr__(self, "elements", els)

    @property
    def ambient(self) -> int:
        return self.elements.shape[1]

    @property
    def order(self) -> int:
        return self.elements.shape[0]

    @property
    def sphere_dim(self) -> int:
        return self.ambient - 1

    def nontrivial(self) -> np.ndarray:
        """Elements other than the identity."""
        far = np.max(np.abs(self.elements - np.eye(self.ambient)), axis=(1, 2)) > MEMBERSHIP_TOL
        return self.elements[far]

    def index_of(self, matrix) -> int | None:
        d = np.max(np.abs(self.elements - np.asarray(matrix)[None]), axis=(1, 2))
        i = int(np.argmin(d))
        return i if d[i] <= MEMBERSHIP_TOL else None


def _rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def lens_group(p: int, q) -> SpaceFormGroup:
    """Cyclic group of order p generated by diag(rot(2 pi q_i / p)) on S^{2m-1}."""
    q = [int(v) for v in q]
    if p < 1 or not q:
        raise ValueError("need p >= 1 and at least one rotation block")
    bad = [v for v in q if math.gcd(v, p) != 1]
    if bad:
        raise NonFreeActionError(f"gcd(q_i, p) != 1 for q_i in {bad}: action has fixed points")
    m = len(q)
    elements = []
    for j in range(p):
        g = np.zeros((2 * m, 2 * m))
        for b, qb in enumerate(q):
            # reduce the integer angle first so that j = p/2 gives exactly -1
            g[2 * b:2 * b + 2, 2 * b:2 * b + 2] = _rotation(2.0 * math.pi * ((qb * j) % p) / p)
        elements.append(g)
    label = f"L({p};{','.join(str(v) for v in q)})"
    return SpaceFormGroup(np.array(elements), label)


def trivial_group(n: int) -> SpaceFormGroup:
    return SpaceFormGroup(np.eye(n + 1)[None], f"S^{n}")


_LENS_RE = re.compile(r"^\s*L\(\s*(\d+)\s*;\s*(\d+(?:\s*,\s*\d+)*)\s*\)\s*$")
_SPHERE_RE = re.compile(r"^\s*S\^?(\d+)\s*$")


def parse_space(text: str) -> SpaceFormGroup:
    """Parse ``L(p;q1,...,qm)`` (lens space) or ``S^n`` (round sphere)."""
    m = _LENS_RE.match(text)
    if m:
        p = int(m.group(1))
        q = [int(v) for v in m.group(2).split(",")]
        return lens_group(p, q)
    m = _SPHERE_RE.match(text)
    if m:
        return trivial_group(int(m.group(1)))
    raise ValueError(f"cannot parse space form {text!r}; expected 'L(p;q1,...,qm)' or 'S^n'")


def generated_subgroup(group: SpaceFormGroup, generators) -> SpaceFormGroup:
    """Closure of ``generators`` inside ``group``, identity first."""
    N = group.ambient
    found = [np.eye(N)]
    frontier = [np.asarray(g, float) for g in generators]
    while frontier:
        g = frontier.pop()
        if any(np.max(np.abs(g - h)) <= MEMBERSHIP_TOL for h in found):
            continue
        if group.index_of(g) is None:
            raise GJMSError("generator product left the ambient group")
        found.append(g)
        frontier.extend(g @ h for h in list(found))
        frontier.extend(h @ g for h in list(found))
    return SpaceFormGroup(np.array(found), f"<{len(found)}> in {group.label}")


@dataclass
class GroupValidation:
    orthogonality: float
    closure: float
    inverses: float
    determinant: float
    min_free_det: float
    has_identity: bool
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def validate_group(group: SpaceFormGroup) -> GroupValidation:
    """Check the group axioms, orientation and freeness; report worst residuals."""
    els = group.elements
    N = group.ambient
    eye = np.eye(N)
    orth = float(np.max(np.abs(np.einsum("gji,gjk->gik", els, els) - eye)))
    has_identity = group.index_of(eye) is not None

    closure = 0.0
    for a in els:
        prods = np.einsum("ij,gjk->gik", a, els)
        d = np.max(np.abs(prods[:, None] - els[None]), axis=(2, 3))
        closure = max(closure, float(np.max(np.min(d, axis=1))))
    inv = np.transpose(els, (0, 2, 1))
    d = np.max(np.abs(inv[:, None] - els[None]), axis=(2, 3))
    inverses = float(np.max(np.min(d, axis=1)))
    det = float(np.max(np.abs(np.linalg.det(els) - 1.0)))
    nontriv = group.nontrivial()
    if len(nontriv):
        min_free = float(np.min(np.abs(np.linalg.det(nontriv - eye))))
    else:
        min_free = float("inf")

    failures = []
    if orth > 1e-10:
        failures.append("orthogonality")
    if not has_identity:
        failures.append("identity")
    if closure > MEMBERSHIP_TOL:
        failures.append("closure")
    if inverses > MEMBERSHIP_TOL:
        failures.append("inverses")
    if det > MEMBERSHIP_TOL:
        failures.append("orientation")
    if min_free <= FREE_ACTION_TOL:
        failures.append("free_action")
    return GroupValidation(orth, closure, inverses, det, min_free, has_identity, failures)


@dataclass
class MassReport:
    """A computed mass with its provenance.

    ``method`` is ``"closed_form"``, ``"limit_extraction"`` or
    ``"surface_integral"``; closed forms carry a zero error estimate.
    """

    value: float
    method: str
    error_estimate: float = 0.0
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.error_estimate) or self.error_estimate < 0:
            raise ValueError("error estimate must be finite and nonnegative")


def _check_dims(group: SpaceFormGroup, dims: DimPair):
    if group.ambient != dims.n + 1:
        raise DimensionError(
            f"{group.label or 'group'} acts on S^{group.sphere_dim}, but n={dims.n}"
        )


def _mass_terms(group: SpaceFormGroup, X: np.ndarray, dims: DimPair) -> np.ndarray:
    """Closed-form mass at each row of X (unit vectors)."""
    nontriv = group.nontrivial()
    if not len(nontriv):
        return np.zeros(X.shape[0])
    moved = np.einsum("gij,mj->gmi", nontriv, X) - X[None]
    d = np.linalg.norm(moved, axis=-1)
    return (d ** (2 * dims.k - dims.n)).sum(axis=0) / gjms_constant(dims)


def mass_closed_form(group: SpaceFormGroup, xi, dims: DimPair) -> MassReport:
    """Mass c_{n,k}^{-1} sum_{R != Id} |(R - Id) xi|^{2k-n} of the round quotient."""
    _check_dims(group, dims)
    X = np.atleast_2d(SpherePoint(_coords(xi)).coords)
    value = float(_mass_terms(group, X, dims)[0])
    return MassReport(value, "closed_form", 0.0, {"group": group.label})


def mass_field(group: SpaceFormGroup, dims: DimPair):
    """Vectorised closed-form mass on rows of unit vectors."""
    _check_dims(group, dims)
    return lambda X: _mass_terms(group, np.atleast_2d(np.asarray(X, float)), dims)


def mass_via_limit(
    group: SpaceFormGroup,
    xi,
    dims: DimPair,
    radii=DEFAULT_RADII,
    direction=None,
    scale: float = 1.0,
    sphere_order: int = 6,
) -> MassReport:
    """Mass of the round quotient extracted from the Green function's expansion.

    The Green function is transported to the stereographic chart centred at xi
    (a flat, hence normal conformal, metric) with factor ``scale * w``; the
    constant term of G_chart(0, x) - c^{-1} r^{2k-n} is extrapolated to r = 0
    and converted back with the square of the factor at the centre.

    By default the difference is averaged over each sphere |x| = r, which
    cancels every odd power of r, and extrapolated in r^2. Passing
    ``direction`` samples a single ray instead and extrapolates in r.
    """
    _check_dims(group, dims)
    radii = [float(r) for r in radii]
    if any(r <= 0 or r >= 0.5 for r in radii):
        raise ValueError("radii must lie in (0, 0.5)")
    if any(a <= b for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly decreasing")
    if scale <= 0:
        raise ValueError("scale must be positive")
    frame = ChartFrame(SpherePoint(_coords(xi)))
    n, k = dims.n, dims.k
    if direction is None:
        dirs, weights = sphere_quadrature(n, sphere_order)
        weights = weights / weights.sum()
        orders = (2, 4, 6, 8)
    else:
        d = np.asarray(direction, float)
        dirs, weights = (d / np.linalg.norm(d))[None], np.ones(1)
        orders = (1, 2, 3, 4)

    chart_G = chart_kernel(space_form_kernel(group, dims), frame)
    w = round_to_flat_factor(dims)

    def factor(x):
        return scale * w(x)

    origin = np.zeros(n)
    c = gjms_constant(dims)
    metric_scale = scale ** (2.0 / dims.weight)  # chart metric is scale^{4/(n-2k)} eucl
    diffs, scale_G = [], 0.0
    for r in radii:
        X = r * dirs
        G = conformal_transport_green(chart_G, factor, np.broadcast_to(origin, X.shape), X)
        singular = (metric_scale * r) ** (2 * k - n) / c
        scale_G = max(scale_G, singular)
        diffs.append(float(np.dot(weights, np.atleast_1d(G) - singular)))
    chart_constant, err = richardson(diffs, radii, orders=orders)
    details = {
        "chart_constant": chart_constant,
        "samples": diffs,
        "radii": radii,
        "group": group.label,
    }
    increments = np.abs(np.diff(diffs))
    # increments at the cancellation level of G - singular carry no information
    noise = 1e3 * np.finfo(float).eps * max(scale_G, abs(chart_constant))
    if len(increments) > 1 and np.any(
        (increments[1:] > increments[:-1]) & (increments[1:] > noise)
    ):
        details["warning"] = "non-monotone extrapolation residuals"
        err = max(err, float(np.max(increments)))
    psi0 = float(factor(origin))
    return MassReport(psi0**2 * chart_constant, "limit_extraction", psi0**2 * err, details)


def _is_subgroup(sub: SpaceFormGroup, full: SpaceFormGroup) -> bool:
    return all(full.index_of(g) is not None for g in sub.elements)


def covering_mass_residual(sub: SpaceFormGroup, full: SpaceFormGroup, xi, dims: DimPair) -> float:
    """A_full - A_sub - sum over the other fibre points of G_sub(xi, s xi).

    ``sub \\ S^n -> full \\ S^n`` is a conformal covering; the residual vanishes.
    """
    if sub.ambient != full.ambient or not _is_subgroup(sub, full):
        raise GJMSError("first group is not a subgroup of the second")
    _check_dims(full, dims)
    X = SpherePoint(_coords(xi)).coords
    reps = []
    covered = np.zeros(full.order, dtype=bool)
    for i, s in enumerate(full.elements):
        if covered[i]:
            continue
        for g in sub.elements:
            j = full.index_of(g @ s)
            covered[j] = True
        reps.append(s)
    others = [s for s in reps if sub.index_of(s) is None]
    fibre_sum = 0.0
    for s in others:
        fibre_sum += green_space_form(sub, dims, X, s @ X)
    a_full = mass_closed_form(full, X, dims).value
    a_sub = mass_closed_form(sub, X, dims).value
    return a_full - a_sub - fibre_sum


def hj_metric_factor(group: SpaceFormGroup, xi, dims: DimPair) -> float:
    """A^{2/(n-2k)}: the Habermann-Jost metric is this multiple of the round one."""
    A = mass_closed_form(group, xi, dims).value
    if not A > 0:
        raise MetricUndefinedError("mass vanishes (round sphere); Habermann-Jost metric undefined")
    return A ** (2.0 / dims.weight)


HJ_STEP = 1e-3


def hj_scalar_curvature(group: SpaceFormGroup, xi, step: float = HJ_STEP):
    """Scalar curvature of A^2 g_round on Gamma \\ S^3 (k = 1) at xi.

    ``xi`` may be one point or an array of points (rows). With w = ln A the
    conformal law reads Scal = e^{-2w} (6 + 4 Delta w - 2 |dw|^2); the sphere
    Laplacian and gradient come from the degree-0 extension of w to R^4.
    """
    dims = DimPair(3, 1)
    _check_dims(group, dims)
    X = np.atleast_2d(np.asarray(_coords(xi), float))
    X = X / np.linalg.norm(X, axis=1, keepdims=True)
    A_of = mass_field(group, dims)
    A = A_of(X)
    if np.any(A <= 0):
        raise MetricUndefinedError("mass vanishes (round sphere); Habermann-Jost metric undefined")

    def log_mass(Y):
        return np.log(A_of(Y / np.linalg.norm(Y, axis=1, keepdims=True)))

    lap = laplacian0(log_mass, X, step)
    grad = gradient(log_mass, X, step)
    # the radial part of grad is zero up to truncation; drop it explicitly
    grad -= np.sum(grad * X, axis=1, keepdims=True) * X
    scal = (6.0 + 4.0 * lap - 2.0 * np.sum(grad**2, axis=1)) / A**2
    return float(scal[0]) if np.ndim(xi) == 1 or isinstance(xi, SpherePoint) else scal


def random_sphere_points(ambient: int, count: int, rng: np.random.Generator) -> np.ndarray:
    X = rng.standard_normal((count, ambient))
    return X / np.linalg.norm(X, axis=1, keepdims=True)
