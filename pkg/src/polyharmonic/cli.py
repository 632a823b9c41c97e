"""Command-line interface.

Subcommands: laplacian | classify | almansi | verify-paper | validate-geometry.
Exit codes: 0 success; 1 failed verification; 2 input/spec errors;
3 finite-difference cross-check failure (laplacian --fd-check).
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from fractions import Fraction
from typing import Optional

from . import __version__
from .expr import (DEFAULT_SEED, Expr, ParseError, Var, ZeroTestConfig,
                   free_variables, is_zero, parse, substitute, to_string)
from .geometry import (Geometry, GeometrySpecError, Model, SemiEuclidean,
                       WarpedProduct, catalog, load_geometry_file,
                       validate_model)
from .operators import (ExpressionBlowup, ForeignVariable, SeparatedFunction,
                        iterated_laplacian)
from .almansi import (ZeroLeadingCoefficient, almansi_lift, almansi_tower,
                      classify, config_for_geometry)
from .oracle import FDConfig, cross_check
from . import verify
from .expr import DomainError, evaluate
from .geometry import RADIAL_VAR


class CliError(Exception):
    """Input or spec problem: reported on stderr, exit code 2."""


_CATALOG_RE = re.compile(r"^catalog:([a-z-]+)\(([0-9 ,]+)\)$")


def _load_geometry(spec: str) -> Geometry:
    match = _CATALOG_RE.match(spec.strip())
    try:
        if match:
            name = match.group(1)
            dims = tuple(int(d) for d in match.group(2).split(","))
            return catalog(name, *dims)
        return load_geometry_file(spec)
    except (GeometrySpecError, OSError, ValueError) as ex:
        raise CliError(f"bad geometry {spec!r}: {ex}") from ex


def _parse_function(text: str) -> Expr:
    try:
        return parse(text)
    except ParseError as ex:
        raise CliError(f"bad expression {text!r}: {ex}") from ex


def _adapt_coordinates(e: Expr, g: Geometry) -> Expr:
    """Convenience renaming: plain x, y map onto the canonical coordinates."""
    if not isinstance(g, SemiEuclidean):
        return e
    names = set(free_variables(e))
    coords = set(g.coordinates)
    if names <= coords:
        return e
    if names <= {"x", "y"}:
        e = substitute(e, "x", Var("x1"))
        if "y" in names:
            target = "y1" if g.q >= 1 else "x2"
            e = substitute(e, "y", Var(target))
        if free_variables(e) <= coords:
            return e
    raise CliError(
        f"function variables {sorted(names)} do not fit the coordinates "
        f"of {g.describe()} ({', '.join(g.coordinates)})")


def _zero_config(args, g: Geometry) -> ZeroTestConfig:
    base = ZeroTestConfig(samples=args.samples, tolerance=args.tol,
                          seed=args.seed)
    return config_for_geometry(g, base)


def _build_function(args, g: Geometry):
    f = _adapt_coordinates(_parse_function(args.function), g)
    lam = getattr(args, "lam", None)
    mu = getattr(args, "mu", None)
    if lam is not None or mu is not None:
        if not isinstance(g, WarpedProduct):
            raise CliError("--lambda/--mu need a warped-product geometry")
        try:
            return SeparatedFunction(f, Fraction(lam or 0), Fraction(mu or 0))
        except ValueError as ex:
            raise CliError(str(ex)) from ex
    return f


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_laplacian(args) -> int:
    g = _load_geometry(args.geometry)
    f = _build_function(args, g)
    cfg = _zero_config(args, g)
    try:
        result = iterated_laplacian(f, g, args.order)
    except (ForeignVariable, ExpressionBlowup, ValueError) as ex:
        raise CliError(str(ex)) from ex
    verdict = is_zero(result, cfg)
    fd_report = None
    if args.fd_check:
        if args.order != 1:
            raise CliError("--fd-check compares a single application (order 1)")
        points = _fd_points(g, cfg)
        base = f.radial if isinstance(f, SeparatedFunction) else f
        separated = f if isinstance(f, SeparatedFunction) else None
        fd_report = cross_check(result, base, g, points, FDConfig(),
                                separated=separated)
    if args.json:
        payload = {"geometry": g.describe(), "order": args.order,
                   "result": to_string(result), "zero_test": _verdict_json(verdict)}
        if fd_report is not None:
            payload["fd_check"] = {"passed": fd_report.passed,
                                   "max_discrepancy": fd_report.max_discrepancy,
                                   "tolerance": fd_report.tolerance}
        print(json.dumps(payload, indent=2))
    else:
        print(to_string(result))
        print(f"zero-test: {verdict}")
        if fd_report is not None:
            print(f"fd-check: {fd_report}")
    if fd_report is not None and not fd_report.passed:
        return 3
    return 0


def _verdict_json(verdict) -> dict:
    record = {"kind": verdict.kind}
    if verdict.max_abs is not None:
        record["max_abs"] = verdict.max_abs
        record["samples"] = verdict.samples
    if verdict.witness is not None:
        record["witness"] = {"assignment": dict(verdict.witness),
                             "value": verdict.value}
    return record


def _fd_points(g: Geometry, cfg: ZeroTestConfig):
    import random
    rng = random.Random(cfg.seed)
    if isinstance(g, SemiEuclidean):
        from .expr import draw_assignment
        names = g.coordinates
        return [[draw_assignment(rng, names, cfg)[n] for n in names]
                for _ in range(5)]
    lo, hi = cfg.intervals_for(RADIAL_VAR)[0]
    return [rng.uniform(lo, hi) for _ in range(5)]


def cmd_classify(args) -> int:
    g = _load_geometry(args.geometry)
    f = _build_function(args, g)
    cfg = _zero_config(args, g)
    try:
        report = classify(f, g, args.max_order, cfg)
    except (ForeignVariable, ExpressionBlowup, ValueError) as ex:
        raise CliError(str(ex)) from ex
    if args.json:
        print(json.dumps(_report_json(report), indent=2))
    else:
        print(report)
    return 0


def _report_json(report) -> dict:
    orders = []
    for entry in report.orders:
        record = {"order": entry.order, "verdict": entry.verdict.kind,
                  "residual": to_string(entry.residual)}
        if entry.verdict.max_abs is not None:
            record["max_abs"] = entry.verdict.max_abs
        if entry.verdict.witness is not None:
            record["witness"] = {"assignment": dict(entry.verdict.witness),
                                 "value": entry.verdict.value}
        orders.append(record)
    return {"function": report.function, "geometry": report.geometry,
            "classification": str(report.classification), "orders": orders}


def cmd_almansi(args) -> int:
    g = _load_geometry(args.geometry)
    f = _build_function(args, g)
    cfg = _zero_config(args, g)
    if isinstance(f, SeparatedFunction):
        raise CliError("almansi lifts of separated functions are not exposed "
                       "on the command line; pass a plain expression")
    try:
        if args.power == 1:
            lifted = almansi_lift(f, g, Fraction(args.c1), Fraction(args.c2))
        elif isinstance(g, SemiEuclidean):
            lifted = almansi_tower(f, g, args.power, Fraction(args.c1),
                                   Fraction(args.c2))
        else:
            raise CliError("tower powers above 1 need a semi-Euclidean geometry")
        report = classify(lifted, g, args.power + 2, cfg)
    except (ZeroLeadingCoefficient, ForeignVariable, ExpressionBlowup,
            ValueError) as ex:
        raise CliError(str(ex)) from ex
    print(to_string(lifted))
    if args.json:
        print(json.dumps(_report_json(report), indent=2))
    else:
        print(f"classification: {report.classification}")
    return 0


def cmd_validate_geometry(args) -> int:
    g = _load_geometry(args.geometry)
    conditions = []
    if isinstance(g, Model):
        report = validate_model(g)
        conditions = [{"name": c.name, "measured": c.measured,
                       "passed": c.passed} for c in report.conditions]
        passed = report.passed
        text = str(report)
    elif isinstance(g, WarpedProduct):
        lines = []
        for label, profile in (("f1", g.f1), ("f2", g.f2)):
            lo, hi = g.domain
            hi = min(hi, lo + 10.0)
            values = []
            for i in range(1, 65):
                point = lo + (hi - lo) * i / 65.0
                try:
                    values.append(evaluate(profile, {RADIAL_VAR: point}))
                except DomainError:
                    values.append(float("-inf"))
            good = min(values) > 0
            name = f"{label} > 0 on the open domain"
            conditions.append({"name": name, "measured": min(values),
                               "passed": good})
            lines.append(f"[{'pass' if good else 'FAIL'}] {name} "
                         f"(min sampled {min(values):.6g})")
        passed = all(c["passed"] for c in conditions)
        text = "\n".join(lines)
    else:
        name = "semi-Euclidean signature is structurally valid"
        conditions = [{"name": name, "measured": None, "passed": True}]
        passed, text = True, f"[pass] {name}"
    if args.json:
        print(json.dumps({"geometry": g.describe(), "passed": passed,
                          "conditions": conditions}, indent=2))
    else:
        print(g.describe())
        print(text)
    return 0 if passed else 1


def cmd_verify_paper(args) -> int:
    try:
        records = verify.run_suite(seed=args.seed, samples=args.samples,
                                   tolerance=args.tol,
                                   inject_fault=args.inject_fault)
    except ValueError as ex:
        raise CliError(str(ex)) from ex
    if args.json:
        print(json.dumps(_suite_json(args.seed, records), indent=2))
    else:
        for record in records:
            line = record.line()
            if record.detail:
                line += f"   [{record.detail}]"
            print(line)
        total = sum(1 for r in records if r.verdict == verify.PASS)
        failed = [r.id for r in records if r.verdict == verify.FAIL]
        print(f"{total} passed, {len(failed)} failed"
              + (f" ({', '.join(failed)})" if failed else ""))
    return 0 if verify.suite_passed(records) else 1


def _suite_json(seed: int, records) -> dict:
    checks = []
    for r in records:
        entry = {"id": r.id, "anchor": r.anchor, "verdict": r.verdict,
                 "max_abs_residual": r.max_abs_residual}
        if r.witness is not None:
            entry["witness"] = r.witness
        entry["ms"] = r.ms
        checks.append(entry)
    return {"version": __version__, "seed": seed, "checks": checks}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_common(sub, geometry=True, function=True):
    if geometry:
        sub.add_argument("--geometry", required=True,
                         help="catalog:name(dims) or a geometry spec file")
    if function:
        sub.add_argument("--function", required=True,
                         help="expression, e.g. \"r^2\" or \"x1*y1\"")
    sub.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED)
    sub.add_argument("--samples", type=int, default=64)
    sub.add_argument("--tol", type=float, default=1e-9)
    sub.add_argument("--json", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyharmonic",
        description="Iterated Laplacians, polyharmonic classification and "
                    "Almansi lifts on models, warped products and R^{p,q}.")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    lap = subs.add_parser("laplacian", help="apply the iterated Laplacian")
    _add_common(lap)
    lap.add_argument("--order", type=int, default=1)
    lap.add_argument("--lambda", dest="lam", type=Fraction, default=None,
                     help="first sphere eigenvalue (separated functions)")
    lap.add_argument("--mu", dest="mu", type=Fraction, default=None,
                     help="second sphere eigenvalue (separated functions)")
    lap.add_argument("--fd-check", action="store_true",
                     help="cross-check against the finite-difference oracle")
    lap.set_defaults(fn=cmd_laplacian)

    cls = subs.add_parser("classify", help="(proper) s-harmonicity report")
    _add_common(cls)
    cls.add_argument("--max-order", type=int, default=3)
    cls.add_argument("--lambda", dest="lam", type=Fraction, default=None)
    cls.add_argument("--mu", dest="mu", type=Fraction, default=None)
    cls.set_defaults(fn=cmd_classify)

    alm = subs.add_parser("almansi", help="lift/tower construction H^s F")
    _add_common(alm)
    alm.add_argument("--power", type=int, default=1)
    alm.add_argument("--c1", default="1")
    alm.add_argument("--c2", default="0")
    alm.set_defaults(fn=cmd_almansi)

    val = subs.add_parser("validate-geometry", help="check geometry conditions")
    _add_common(val, function=False)
    val.set_defaults(fn=cmd_validate_geometry)

    ver = subs.add_parser("verify-paper",
                          help="run the built-in verification suite")
    _add_common(ver, geometry=False, function=False)
    ver.add_argument("--inject-fault", metavar="CHECK_ID", default=None,
                     help="test mode: perturb the named check's first "
                          "zero assertion by 1e-3")
    ver.set_defaults(fn=cmd_verify_paper)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CliError as ex:
        print(f"error: {ex}", file=sys.stderr)
        return 2
    except (ParseError, GeometrySpecError) as ex:
        print(f"error: {ex}", file=sys.stderr)
        return 2
    except Exception as ex:  # internal error contract for verify-paper
        print(f"internal error: {type(ex).__name__}: {ex}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
