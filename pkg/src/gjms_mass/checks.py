"""Verification suites: each returns a list of :class:`Check` records.

A suite never raises for numerical failures; exceptions become failed
checks so that reports are always complete.
"""
from __future__ import annotations

import math
import time
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .asymptotic_mass import DEFAULT_RADII as BLOWUP_RADII
from .asymptotic_mass import thm51_check
from .constants import DimPair
from .fields import bump, coordinate_exp, random_poly_gaussian
from .flat_calculus import (
    DiracGrid,
    covariance_defect,
    dirac_refinement,
    gjms_second_term_defect,
    paneitz_apply,
)
from .moebius import moebius_identity_residual, random_moebius
from .space_forms import (
    SpaceFormGroup,
    covering_mass_residual,
    generated_subgroup,
    lens_group,
    mass_closed_form,
    mass_via_limit,
    random_sphere_points,
)


@dataclass
class Check:
    name: str
    expected: object
    observed: object
    tolerance: float | None
    passed: bool
    anchor: str
    seconds: float = 0.0
    details: dict = field(default_factory=dict)


def _failed(name, anchor, exc) -> Check:
    return Check(name, None, f"{type(exc).__name__}: {exc}", None, False, anchor)


def guarded(name: str, anchor: str, fn: Callable[[], list[Check]]) -> list[Check]:
    start = time.perf_counter()
    try:
        out = fn()
    except Exception as exc:  # surfaced as a failed check
        out = [_failed(name, anchor, exc)]
    elapsed = time.perf_counter() - start
    for c in out:
        c.seconds = elapsed / max(len(out), 1)
    return out


# Moebius --------------------------------------------------------------------------


def moebius_suite(trials: int = 1000, seed: int = 42, n: int = 3, stages: int = 5) -> list[Check]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        h = random_moebius(n, stages, rng)
        x, y = rng.uniform(-2.0, 2.0, (2, n))
        res = abs(float(moebius_identity_residual(h, x, y)))
        worst = max(worst, res / (1.0 + float(np.sum((x - y) ** 2))))
    return [Check("moebius_identity", 0.0, worst, 1e-12, worst < 1e-12,
                  "Moebius distance identity", details={"trials": trials, "stages": stages})]


# Dirac pairing --------------------------------------------------------------------

DIRAC_PAIRS = ((3, 1), (5, 1), (5, 2), (7, 2))


def dirac_suite(pairs=DIRAC_PAIRS, levels: int = 3, tol: float = 1e-3) -> list[Check]:
    out = []
    for n, k in pairs:
        vals, target = dirac_refinement(DimPair(n, k), bump(1.0), DiracGrid(1.05), levels)
        errs = [abs(v / target - 1.0) for v in vals]
        monotone = all(a > b for a, b in zip(errs, errs[1:]))
        out.append(Check(
            f"dirac_n{n}_k{k}", target, vals[-1], tol, errs[-1] < tol and monotone,
            "flat Dirac constant", details={"relative_errors": errs, "monotone": monotone},
        ))
    return out


# conformal covariance ---------------------------------------------------------------

COV_STEPS = (0.05, 0.025)


def _random_point_fields(n, rng):
    f = random_poly_gaussian(n, rng, 0.3)
    phi = random_poly_gaussian(n, rng, 0.3).exp()
    u = random_poly_gaussian(n, rng, 1.0) + 2.0
    x = rng.uniform(-0.5, 0.5, n)
    return f, phi, u, x


def covariance_suite(ks=(1, 2), n: int = 5, points: int = 20, seed: int = 42,
                     min_order: float = 3.0, rel_tol: float = 1e-5) -> list[Check]:
    out = []
    for k in ks:
        rng = np.random.default_rng([seed, k])
        orders, extrap = [], []
        for _ in range(points):
            f, phi, u, x = _random_point_fields(n, rng)
            d = [covariance_defect(k, f, phi, u, x, n, h) for h in COV_STEPS]
            scale = abs(paneitz_apply(k, f, u, x, n, COV_STEPS[1]))
            orders.append(math.log2(abs(d[0]) / abs(d[1])))
            extrap.append(abs(d[1] + (d[1] - d[0]) / 15.0) / scale)
        order, worst = min(orders), max(extrap)
        out.append(Check(f"covariance_order_k{k}", min_order, order, None, order >= min_order,
                         "conformal covariance", details={"orders": orders}))
        out.append(Check(f"covariance_extrapolated_k{k}", 0.0, worst, rel_tol, worst < rel_tol,
                         "conformal covariance", details={"relative": extrap}))
    return out


# zeroth-order remainder --------------------------------------------------------------


def prop21_suite(n: int = 5, triples: int = 10, seed: int = 42, rel_tol: float = 1e-4) -> list[Check]:
    rng = np.random.default_rng([seed, 21])
    worst, all_rel = 0.0, []
    for _ in range(triples):
        f = random_poly_gaussian(n, rng, 0.3)
        u = random_poly_gaussian(n, rng, 1.0) + 2.0
        v = coordinate_exp(int(rng.integers(n)), float(rng.uniform(-1, 1)))
        x = rng.uniform(-0.5, 0.5, n)
        vals = []
        for h in COV_STEPS:
            vals.append(gjms_second_term_defect(f, u, x, n, h) - gjms_second_term_defect(f, v, x, n, h))
        extrap = vals[1] + (vals[1] - vals[0]) / 15.0
        ux, vx = float(u(x)), float(v(x))
        scale = max(abs(paneitz_apply(2, f, u, x, n, COV_STEPS[1]) / ux),
                    abs(paneitz_apply(2, f, v, x, n, COV_STEPS[1]) / vx))
        rel = abs(extrap) / scale
        all_rel.append(rel)
        worst = max(worst, rel)
    return [Check("zeroth_order_remainder", 0.0, worst, rel_tol, worst < rel_tol,
                  "second GJMS term", details={"relative": all_rel})]


# masses -------------------------------------------------------------------------------

MASS_CASES = (("L(2;1,1)", 1), ("L(3;1,1)", 1), ("L(7;1,2)", 1), ("L(2;1,1,1)", 2))


def mass_limit_suite(cases=MASS_CASES, samples: int = 5, seed: int = 42, rel_tol: float = 1e-6,
                     parse=None) -> list[Check]:
    from .space_forms import parse_space

    parse = parse or parse_space
    out = []
    for label, k in cases:
        group = parse(label)
        dims = DimPair(group.sphere_dim, k)
        rng = np.random.default_rng(seed)
        worst = 0.0
        for xi in random_sphere_points(group.ambient, samples, rng):
            a = mass_closed_form(group, xi, dims).value
            b = mass_via_limit(group, xi, dims).value
            worst = max(worst, abs(b - a) / a)
        out.append(Check(f"mass_limit_{label}_k{k}", 0.0, worst, rel_tol, worst < rel_tol,
                         "mass from the Green expansion"))
    return out


def covering_pairs() -> list[tuple[SpaceFormGroup, SpaceFormGroup]]:
    """{+-Id} in L(4;1,1) and the chain 1 < C2 < C4 < L(8;1,1)."""
    pairs = []
    full4 = lens_group(4, (1, 1))
    pairs.append((generated_subgroup(full4, [full4.elements[2]]), full4))
    full8 = lens_group(8, (1, 1))
    chain = [generated_subgroup(full8, [full8.elements[j]]) for j in (0, 4, 2)] + [full8]
    for i in range(len(chain)):
        for j in range(i + 1, len(chain)):
            pairs.append((chain[i], chain[j]))
    return pairs


def covering_suite(points: int = 10, seed: int = 42, tol: float = 1e-12) -> list[Check]:
    rng = np.random.default_rng(seed)
    dims = DimPair(3, 1)
    pts = random_sphere_points(4, points, rng)
    out = []
    for sub, full in covering_pairs():
        worst = max(abs(covering_mass_residual(sub, full, xi, dims)) for xi in pts)
        base = full.label.split(" in ")[-1]
        out.append(Check(f"covering_{sub.order}_in_{full.order}_{base}", 0.0, worst, tol, worst < tol,
                         "covering mass identity"))
    return out


THM51_CASES = (("L(2;1,1)", 1, 1.0 / math.pi, 0.01), ("L(2;1,1,1)", 2, 1.0 / (2 * math.pi**2), 0.02))


def thm51_suite(cases=THM51_CASES, radii=BLOWUP_RADII, parse=None) -> list[Check]:
    from .space_forms import parse_space

    parse = parse or parse_space
    out = []
    for label, k, expected, tol in cases:
        group = parse(label)
        dims = DimPair(group.sphere_dim, k)
        res = thm51_check(group, dims, radii)
        if expected is None:
            expected = res.A / res.coefficient
        rel_m = abs(res.mk / expected - 1.0) if expected else abs(res.mk)
        out.append(Check(f"mk_{label}_k{k}", expected, res.mk, tol, rel_m < tol,
                         "mass as asymptotic invariant", details=dict(res.report.details)))
        out.append(Check(f"thm51_residual_{label}_k{k}", 0.0, res.residual, tol, res.residual < tol,
                         "mass as asymptotic invariant", details={"A": res.A}))
    return out
