"""Geometries the Laplacian operators act on.

Three families:

* ``Model`` -- rotationally symmetric metric f(r)^2 g_{S^{m-1}} + dr^2 on
  S^{m-1} x (0, R) with a pole at r = 0 (Euclidean space, hyperbolic space
  and the round sphere are the f = r, sinh r, sin r cases).
* ``WarpedProduct`` -- doubly warped metric
  f1(r)^2 g_{S^{p-1}} + dr^2 + f2(r)^2 g_{S^{q-1}}, where r measures the
  distance from the focal variety at r = 0.
* ``SemiEuclidean`` -- R^{p,q} with the signature (+p, -q) flat metric.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .expr import (DomainError, Expr, Var, differentiate, evaluate, parse,
                   simplify, to_string)


class GeometrySpecError(ValueError):
    """Malformed geometry description (bad name, dimension or spec file)."""


RADIAL_VAR = "r"
_R = Var(RADIAL_VAR)


@dataclass(frozen=True)
class Model:
    """Rotationally symmetric metric with a pole, profile f and dimension m."""

    f: Expr
    m: int
    domain: tuple = (0.0, math.inf)

    def __post_init__(self):
        if self.m < 2:
            raise GeometrySpecError(f"model dimension must be >= 2, got {self.m}")
        lo, hi = self.domain
        if not hi > lo:
            raise GeometrySpecError(f"empty domain {self.domain}")

    def describe(self) -> str:
        hi = "inf" if math.isinf(self.domain[1]) else f"{self.domain[1]:g}"
        return f"model(f={to_string(self.f)}, m={self.m}, domain=(0, {hi}))"


@dataclass(frozen=True)
class WarpedProduct:
    """Doubly warped product with profiles f1, f2 and sphere dimensions p-1, q-1."""

    f1: Expr
    f2: Expr
    p: int
    q: int
    domain: tuple = (0.0, math.inf)

    def __post_init__(self):
        if self.p < 2 or self.q < 2:
            raise GeometrySpecError(
                f"warped-product dimensions must be >= 2, got p={self.p}, q={self.q}")
        lo, hi = self.domain
        if not hi > lo:
            raise GeometrySpecError(f"empty domain {self.domain}")

    def describe(self) -> str:
        hi = "inf" if math.isinf(self.domain[1]) else f"{self.domain[1]:g}"
        return (f"warped(f1={to_string(self.f1)}, f2={to_string(self.f2)}, "
                f"p={self.p}, q={self.q}, domain=(0, {hi}))")


@dataclass(frozen=True)
class SemiEuclidean:
    """R^{p,q} with metric signature (+1, ..., +1, -1, ..., -1)."""

    p: int
    q: int = 0

    def __post_init__(self):
        if self.p < 1 or self.q < 0:
            raise GeometrySpecError(
                f"semi-Euclidean signature needs p >= 1 and q >= 0, got ({self.p}, {self.q})")

    @property
    def x_names(self) -> tuple:
        return tuple(f"x{i}" for i in range(1, self.p + 1))

    @property
    def y_names(self) -> tuple:
        return tuple(f"y{j}" for j in range(1, self.q + 1))

    @property
    def coordinates(self) -> tuple:
        return self.x_names + self.y_names

    def describe(self) -> str:
        return f"semieuclidean(p={self.p}, q={self.q})"


Geometry = Union[Model, WarpedProduct, SemiEuclidean]


# ---------------------------------------------------------------------------
# Validation reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionCheck:
    name: str
    required: float
    measured: float
    passed: bool

    def __str__(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return f"[{status}] {self.name}: measured {self.measured:.6g} (required {self.required:g})"


@dataclass(frozen=True)
class ValidationReport:
    conditions: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def failures(self) -> tuple:
        return tuple(c for c in self.conditions if not c.passed)

    def __str__(self) -> str:
        return "\n".join(str(c) for c in self.conditions)


_LIMIT_TOL = 1e-6


def _value_near(e: Expr, point: float, side: int) -> float:
    """Evaluate at ``point``; on a pole, Richardson-extrapolate the limit.

    ``side`` is +1 to approach from above, -1 from below.  The linear-order
    extrapolation 2 f(h/2) - f(h) removes the O(h) term.
    """
    try:
        return evaluate(e, {RADIAL_VAR: point})
    except DomainError:
        h = 1e-4 * side
        v1 = evaluate(e, {RADIAL_VAR: point + h})
        v2 = evaluate(e, {RADIAL_VAR: point + h / 2})
        return 2 * v2 - v1


def validate_model(g: Model) -> ValidationReport:
    """Check the pole conditions of a model profile.

    At r = 0: f = 0, f' = 1 and even derivatives of order 2, 4, 6 vanish
    (the full even-order family is required; order six is the testable cap).
    f > 0 is sampled on the interior.  A finite right endpoint b triggers the
    mirrored checks f(b) = 0, f'(b) = -1, f^(2k)(b) = 0.
    """
    f = simplify(g.f)
    conditions = []
    derivatives = [f]
    for _ in range(6):
        derivatives.append(differentiate(derivatives[-1], RADIAL_VAR))

    def check(name: str, expr: Expr, at: float, side: int, required: float):
        try:
            measured = _value_near(expr, at, side)
        except DomainError:
            measured = math.nan
        ok = abs(measured - required) <= _LIMIT_TOL
        conditions.append(ConditionCheck(name, required, measured, ok))

    check("f(0) = 0", derivatives[0], 0.0, +1, 0.0)
    check("f'(0) = 1", derivatives[1], 0.0, +1, 1.0)
    for k in (1, 2, 3):
        check(f"f^({2 * k})(0) = 0", derivatives[2 * k], 0.0, +1, 0.0)

    lo, hi = g.domain
    hi_eff = min(hi, lo + 10.0)
    span = hi_eff - lo
    min_val = math.inf
    for i in range(1, 65):
        point = lo + span * i / 65.0
        try:
            min_val = min(min_val, evaluate(f, {RADIAL_VAR: point}))
        except DomainError:
            min_val = -math.inf
            break
    conditions.append(ConditionCheck("f > 0 on the open domain",
                                     math.nan, min_val, min_val > 0.0))

    if math.isfinite(hi):
        check(f"f({hi:g}) = 0", derivatives[0], hi, -1, 0.0)
        check(f"f'({hi:g}) = -1", derivatives[1], hi, -1, -1.0)
        for k in (1, 2, 3):
            check(f"f^({2 * k})({hi:g}) = 0", derivatives[2 * k], hi, -1, 0.0)

    return ValidationReport(tuple(conditions))


def check_pole_smoothness(h: Expr) -> ValidationReport:
    """Odd derivatives of orders 1, 3, 5 must vanish at r = 0 for a radial
    function to extend smoothly across the pole."""
    h = simplify(h)
    conditions = []
    d = h
    for order in range(1, 6):
        d = differentiate(d, RADIAL_VAR)
        if order % 2 == 0:
            continue
        try:
            measured = _value_near(d, 0.0, +1)
        except DomainError:
            measured = math.nan
        ok = abs(measured) <= _LIMIT_TOL
        conditions.append(ConditionCheck(f"H^({order})(0) = 0", 0.0, measured, ok))
    return ValidationReport(tuple(conditions))


def radial_curvature(g: Model) -> Expr:
    """Sectional curvature K(r) of planes containing the radial direction,
    recovered from the Jacobi equation f'' + K f = 0 as -f''/f."""
    f = simplify(g.f)
    f2 = differentiate(differentiate(f, RADIAL_VAR), RADIAL_VAR)
    return simplify(-(f2 / f))


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

def catalog(name: str, *dims: int) -> Geometry:
    """Build a named geometry.

    Names: euclidean(m), hyperbolic(m), sphere(m), spherical-join(p, q),
    hyperbolic-join(p, q), cylinder(p, q), semi-euclidean(p, q).
    """
    def want(n: int):
        if len(dims) != n:
            raise GeometrySpecError(
                f"{name} expects {n} dimension argument(s), got {len(dims)}")

    if name == "euclidean":
        want(1)
        return Model(_R, dims[0])
    if name == "hyperbolic":
        want(1)
        return Model(parse("sinh(r)"), dims[0])
    if name == "sphere":
        want(1)
        return Model(parse("sin(r)"), dims[0], (0.0, math.pi))
    if name == "spherical-join":
        want(2)
        return WarpedProduct(parse("sin(r)"), parse("cos(r)"), dims[0], dims[1],
                             (0.0, math.pi / 2))
    if name == "hyperbolic-join":
        want(2)
        return WarpedProduct(parse("sinh(r)"), parse("cosh(r)"), dims[0], dims[1])
    if name == "cylinder":
        want(2)
        return WarpedProduct(_R, parse("1"), dims[0], dims[1])
    if name in ("semi-euclidean", "semieuclidean"):
        want(2)
        return SemiEuclidean(dims[0], dims[1])
    raise GeometrySpecError(f"unknown catalog geometry {name!r}")


CATALOG_NAMES = ("euclidean", "hyperbolic", "sphere", "spherical-join",
                 "hyperbolic-join", "cylinder", "semi-euclidean")


# ---------------------------------------------------------------------------
# Geometry spec files (key = value, one per line, '#' comments)
# ---------------------------------------------------------------------------

def parse_geometry_spec(text: str) -> Geometry:
    entries: dict = {}
    lines: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise GeometrySpecError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key:
            raise GeometrySpecError(f"line {lineno}: empty key")
        if key in entries:
            raise GeometrySpecError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value
        lines[key] = lineno

    def fail(key: str, message: str):
        where = f"line {lines[key]}, key {key!r}" if key in lines else f"key {key!r}"
        raise GeometrySpecError(f"{where}: {message}")

    def take(key: str) -> str:
        if key not in entries:
            raise GeometrySpecError(f"missing required key {key!r}")
        return entries.pop(key)

    def take_int(key: str) -> int:
        value = take(key)
        try:
            return int(value)
        except ValueError:
            fail(key, f"expected an integer, got {value!r}")

    def take_expr(key: str) -> Expr:
        value = take(key)
        try:
            return parse(value)
        except Exception as ex:
            fail(key, f"bad expression: {ex}")

    def take_domain(default: tuple) -> tuple:
        if "domain" not in entries:
            return default
        value = entries.pop("domain").strip()
        if not (value.startswith("[") and value.endswith("]")):
            fail("domain", f"expected [a, b], got {value!r}")
        parts = value[1:-1].split(",")
        if len(parts) != 2:
            fail("domain", f"expected two endpoints, got {value!r}")
        try:
            lo = float(parts[0])
            hi = math.inf if parts[1].strip() in ("inf", "+inf") else float(parts[1])
        except ValueError:
            fail("domain", f"bad endpoint in {value!r}")
        return (lo, hi)

    kind = take("type")
    if kind == "model":
        f = take_expr("f")
        m = take_int("m")
        domain = take_domain((0.0, math.inf))
        geometry: Geometry = Model(f, m, domain)
    elif kind == "warped":
        f1 = take_expr("f1")
        f2 = take_expr("f2")
        p = take_int("p")
        q = take_int("q")
        domain = take_domain((0.0, math.inf))
        geometry = WarpedProduct(f1, f2, p, q, domain)
    elif kind == "semieuclidean":
        p = take_int("p")
        q = take_int("q")
        geometry = SemiEuclidean(p, q)
    else:
        fail("type", f"must be model, warped or semieuclidean, got {kind!r}")

    if entries:
        stray = sorted(entries)[0]
        fail(stray, "unexpected key")
    return geometry


def load_geometry_file(path: str) -> Geometry:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_geometry_spec(fh.read())
