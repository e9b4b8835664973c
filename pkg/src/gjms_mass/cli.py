"""Command-line front end: ``gjms-mass <command> [options]``.

Every command prints one JSON document to stdout. Exit codes: 0 when all
checks pass, 1 when a check fails, 2 on a usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import checks
from . import __version__
from .constants import DimPair, gjms_constant, gjms_constant_exact, vol_sphere
from .errors import GJMSError
from .space_forms import (
    SpaceFormGroup,
    hj_scalar_curvature,
    mass_closed_form,
    mass_field,
    mass_via_limit,
    parse_space,
    random_sphere_points,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass
class CommandPlan:
    command: str
    params: dict = field(default_factory=dict)
    csv_path: str | None = None
    seed: int = 42
    timings: bool = False


@dataclass
class VerificationReport:
    command: str
    checks: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    columns: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


class UsageError(Exception):
    pass


# argument types --------------------------------------------------------------------


def _space(text: str) -> SpaceFormGroup:
    try:
        return parse_space(text)
    except (ValueError, GJMSError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=42, help="RNG seed (default 42)")
    common.add_argument("--csv", dest="csv_path", help="also write a CSV table here")
    common.add_argument("--timings", action="store_true", help="include wall-clock seconds per check")

    parser = argparse.ArgumentParser(prog="gjms-mass", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", parents=[common], help="c_{n,k} and related constants")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)

    for name, helptext in (("mass", "closed-form masses at sampled points"),
                           ("mass-limit", "masses extracted from the Green expansion")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--space", type=_space, required=True, help="'L(p;q1,...,qm)' or 'S^n'")
        p.add_argument("--k", type=int, default=1)
        p.add_argument("--samples", type=_positive_int, default=5)
        if name == "mass-limit":
            p.add_argument("--radii", type=_float_list, default=None)
            p.add_argument("--tol", type=float, default=1e-6)

    p = sub.add_parser("hj-scan", parents=[common], help="scalar curvature of the Habermann-Jost metric")
    p.add_argument("--space", type=_space, required=True)
    p.add_argument("--samples", type=_positive_int, default=2000)
    p.add_argument("--expect", choices=("none", "sign-change", "constant"), default="none")

    p = sub.add_parser("verify", help="run one verification suite")
    vsub = p.add_subparsers(dest="suite", required=True)
    v = vsub.add_parser("moebius", parents=[common])
    v.add_argument("--trials", type=_positive_int, default=1000)
    v = vsub.add_parser("dirac", parents=[common])
    v.add_argument("--n", type=int)
    v.add_argument("--k", type=int)
    v.add_argument("--levels", type=_positive_int, default=3)
    v = vsub.add_parser("covariance", parents=[common])
    v.add_argument("--k", type=int, choices=(1, 2))
    v.add_argument("--n", type=int, default=5)
    v.add_argument("--points", type=_positive_int, default=20)
    v = vsub.add_parser("prop21", parents=[common])
    v.add_argument("--n", type=int, default=5)
    v.add_argument("--triples", type=_positive_int, default=10)
    v = vsub.add_parser("covering", parents=[common])
    v.add_argument("--points", type=_positive_int, default=10)
    v = vsub.add_parser("thm51", parents=[common])
    v.add_argument("--space", type=_space, default=None)
    v.add_argument("--k", type=int, default=1)
    v.add_argument("--radii", type=_float_list, default=None)

    sub.add_parser("report", parents=[common], help="run every verification suite")
    return parser


def _dims_for(parser, group: SpaceFormGroup, k: int) -> DimPair:
    try:
        return DimPair(group.sphere_dim, k)
    except GJMSError as exc:
        parser.error(str(exc))


def parse_args(argv=None) -> CommandPlan:
    parser = build_parser()
    args = parser.parse_args(argv)
    ns = vars(args).copy()
    command = ns.pop("command")
    if command == "verify":
        command = f"verify {ns.pop('suite')}"
    plan = CommandPlan(command, seed=ns.pop("seed", 42), csv_path=ns.pop("csv_path", None),
                       timings=ns.pop("timings", False))
    if command == "constants":
        try:
            DimPair(ns["n"], ns["k"])
        except GJMSError as exc:
            parser.error(str(exc))
    if command in ("mass", "mass-limit"):
        ns["dims"] = _dims_for(parser, ns["space"], ns["k"])
    if command == "hj-scan" and ns["space"].ambient != 4:
        parser.error("hj-scan works on quotients of S^3")
    if command == "verify dirac" and (ns["n"] is None) != (ns["k"] is None):
        parser.error("give both --n and --k, or neither")
    if command == "verify dirac" and ns["n"] is not None:
        _dims_for(parser, parse_space(f"S^{ns['n']}"), ns["k"])
    if command == "verify thm51" and ns["space"] is not None:
        dims = _dims_for(parser, ns["space"], ns["k"])
        if not dims.mass_range or dims.k not in (1, 2):
            parser.error(f"no mass term for n={dims.n}, k={dims.k}")
        if ns["radii"] is not None and any(a >= b for a, b in zip(ns["radii"], ns["radii"][1:])):
            parser.error("--radii must be increasing")
    if command == "mass-limit" and ns["radii"] is not None:
        r = ns["radii"]
        if any(a <= b for a, b in zip(r, r[1:])) or any(not 0 < v < 0.5 for v in r):
            parser.error("--radii must be decreasing and inside (0, 0.5)")
    plan.params = ns
    return plan


# execution -------------------------------------------------------------------------


def _point_columns(ambient):
    return ["index"] + [f"x{i}" for i in range(ambient)]


def _run_mass(plan: CommandPlan) -> VerificationReport:
    group, dims = plan.params["space"], plan.params["dims"]
    rng = np.random.default_rng(plan.seed)
    pts = random_sphere_points(group.ambient, plan.params["samples"], rng)
    values = mass_field(group, dims)(pts)
    rep = VerificationReport(plan.command)
    rep.columns = _point_columns(group.ambient) + ["mass"]
    rep.rows = [[i, *p, v] for i, (p, v) in enumerate(zip(pts, values))]
    trivial = group.order == 1
    if trivial:
        worst = float(np.max(np.abs(values)))
        rep.checks.append(checks.Check("sphere_mass_zero", 0.0, worst, 0.0, worst == 0.0,
                                       "vanishing mass of the sphere"))
    else:
        low = float(np.min(values))
        rep.checks.append(checks.Check("mass_positive", "> 0", low, None, low > 0,
                                       "mass positivity"))
    rep.results = {"space": group.label, "n": dims.n, "k": dims.k,
                   "min": float(np.min(values)), "max": float(np.max(values))}
    return rep


def _run_mass_limit(plan: CommandPlan) -> VerificationReport:
    group, dims = plan.params["space"], plan.params["dims"]
    rng = np.random.default_rng(plan.seed)
    pts = random_sphere_points(group.ambient, plan.params["samples"], rng)
    kwargs = {} if plan.params["radii"] is None else {"radii": plan.params["radii"]}
    rep = VerificationReport(plan.command)
    rep.columns = _point_columns(group.ambient) + ["closed_form", "limit", "rel_error"]
    worst = 0.0
    for i, p in enumerate(pts):
        a = mass_closed_form(group, p, dims).value
        b = mass_via_limit(group, p, dims, **kwargs).value
        err = abs(b - a) / a if a else abs(b)
        worst = max(worst, err)
        rep.rows.append([i, *p, a, b, err])
    tol = plan.params["tol"]
    rep.checks.append(checks.Check("limit_vs_closed_form", 0.0, worst, tol, worst < tol,
                                   "mass from the Green expansion"))
    rep.results = {"space": group.label, "n": dims.n, "k": dims.k, "max_rel_error": worst}
    return rep


def _run_hj(plan: CommandPlan) -> VerificationReport:
    group = plan.params["space"]
    rng = np.random.default_rng(plan.seed)
    pts = random_sphere_points(4, plan.params["samples"], rng)
    A = mass_field(group, DimPair(3, 1))(pts)
    scal = np.atleast_1d(hj_scalar_curvature(group, pts))
    rep = VerificationReport(plan.command)
    rep.columns = ["index", "x0", "x1", "x2", "x3", "A", "scal"]
    rep.rows = [[i, *p, a, s] for i, (p, a, s) in enumerate(zip(pts, A, scal))]
    lo, hi = float(np.min(scal)), float(np.max(scal))
    rep.results = {"space": group.label, "samples": len(pts), "scal_min": lo, "scal_max": hi}
    rep.checks.append(checks.Check("scal_finite", True, bool(np.all(np.isfinite(scal))), None,
                                   bool(np.all(np.isfinite(scal))), "Habermann-Jost metric"))
    expect = plan.params["expect"]
    if expect == "sign-change":
        rep.checks.append(checks.Check("scal_sign_change", "min < 0 < max", [lo, hi], None,
                                       lo < 0 < hi, "Habermann-Jost sign change"))
    elif expect == "constant":
        spread = (hi - lo) / abs(hi)
        rep.checks.append(checks.Check("scal_constant", 0.0, spread, 1e-5, spread < 1e-5,
                                       "Habermann-Jost metric"))
    return rep


SUITES = {
    "moebius": ("Moebius distance identity",
                lambda p, s: checks.moebius_suite(p.get("trials", 1000), s)),
    "dirac": ("flat Dirac constant",
              lambda p, s: checks.dirac_suite(
                  checks.DIRAC_PAIRS if p.get("n") is None else ((p["n"], p["k"]),),
                  p.get("levels", 3))),
    "covariance": ("conformal covariance",
                   lambda p, s: checks.covariance_suite(
                       (1, 2) if p.get("k") is None else (p["k"],), p.get("n", 5),
                       p.get("points", 20), s)),
    "prop21": ("second GJMS term",
               lambda p, s: checks.prop21_suite(p.get("n", 5), p.get("triples", 10), s)),
    "covering": ("covering mass identity",
                 lambda p, s: checks.covering_suite(p.get("points", 10), s)),
    "thm51": ("mass as asymptotic invariant", lambda p, s: _thm51(p)),
}


def _thm51(p):
    space = p.get("space")
    radii = p.get("radii") or checks.BLOWUP_RADII
    if space is None:
        return checks.thm51_suite(radii=radii)
    k = p.get("k", 1)
    cases = ((space.label, k, None, 0.01 if k == 1 else 0.02),)
    return checks.thm51_suite(cases, radii, parse=lambda _: space)


def _threads() -> int:
    raw = os.environ.get("GJMS_THREADS")
    try:
        cap = int(raw) if raw else os.cpu_count() or 1
    except ValueError:
        cap = 1
    return max(1, cap)


def _run_suites(plan: CommandPlan, names) -> VerificationReport:
    rep = VerificationReport(plan.command)
    jobs = [(name, *SUITES[name]) for name in names]

    def run(job):
        name, anchor, fn = job
        return checks.guarded(name, anchor, lambda: fn(plan.params, plan.seed))

    with ThreadPoolExecutor(max_workers=min(_threads(), len(jobs))) as pool:
        for out in pool.map(run, jobs):  # map keeps submission order
            rep.checks.extend(out)
    return rep


def _run_constants(plan: CommandPlan) -> VerificationReport:
    dims = DimPair(plan.params["n"], plan.params["k"])
    rep = VerificationReport(plan.command)
    rep.results = {
        "n": dims.n,
        "k": dims.k,
        "c_nk": gjms_constant(dims),
        "exact": gjms_constant_exact(dims),
        "vol_sphere": vol_sphere(dims.n - 1),
        "mass_range": dims.mass_range,
    }
    return rep


def run_plan(plan: CommandPlan) -> VerificationReport:
    cmd = plan.command
    if cmd == "constants":
        rep = _run_constants(plan)
    elif cmd == "mass":
        rep = _run_mass(plan)
    elif cmd == "mass-limit":
        rep = _run_mass_limit(plan)
    elif cmd == "hj-scan":
        rep = _run_hj(plan)
    elif cmd.startswith("verify "):
        rep = _run_suites(plan, [cmd.split(" ", 1)[1]])
    elif cmd == "report":
        rep = _run_suites(plan, list(SUITES))
    else:
        raise UsageError(f"unknown command {cmd!r}")
    return rep


# output ----------------------------------------------------------------------------


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, SpaceFormGroup):
        return obj.label
    return obj


def report_payload(plan: CommandPlan, rep: VerificationReport) -> dict:
    out_checks = []
    for c in rep.checks:
        d = asdict(c)
        if not plan.timings:
            d.pop("seconds")
        out_checks.append(d)
    return _clean({
        "command": plan.command,
        "seed": plan.seed,
        "passed": rep.passed,
        "results": rep.results,
        "checks": out_checks,
    })


def _fmt(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return "%.17g" % float(v)


def write_csv(path: str, rep: VerificationReport):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if rep.rows:
            w.writerow(rep.columns)
            for row in rep.rows:
                w.writerow([_fmt(v) for v in row])
        else:
            w.writerow(["name", "expected", "observed", "tolerance", "passed", "anchor"])
            for c in rep.checks:
                w.writerow([c.name, c.expected, c.observed, c.tolerance, c.passed, c.anchor])


def main(argv=None) -> int:
    try:
        plan = parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with code 2
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        rep = run_plan(plan)
    except Exception as exc:
        rep = VerificationReport(plan.command)
        rep.checks.append(checks.Check(plan.command, None, f"{type(exc).__name__}: {exc}",
                                       None, False, "execution"))
    payload = report_payload(plan, rep)
    sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n")
    if plan.csv_path:
        write_csv(plan.csv_path, rep)
    return EXIT_OK if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
