"""Independent numerical verification of the symbolic operators.

Finite-difference Laplacians (central stencils with Richardson
extrapolation) and adaptive Simpson quadrature.  These routines evaluate
point functions only; they never look at the symbolic derivative machinery,
so agreement between the two paths is meaningful evidence.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

from .expr import DomainError, Expr, evaluate
from .geometry import (RADIAL_VAR, Geometry, Model, SemiEuclidean,
                       WarpedProduct)
from .operators import SeparatedFunction
from . import expr as _expr
from . import operators as _operators


class StencilSingular(RuntimeError):
    """The evaluator raised DomainError somewhere on the stencil."""


class OutOfDomain(ValueError):
    """Point too close to the domain boundary for the stencil width."""


class QuadratureFailure(RuntimeError):
    """Adaptive quadrature exceeded its subdivision budget."""


@dataclass(frozen=True)
class FDConfig:
    """Finite-difference policy: base step, Richardson levels, tolerance."""

    h: float = 1e-3
    levels: int = 2
    rel_tol: float = 1e-6

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("h must be positive")
        if self.levels not in (1, 2, 3):
            raise ValueError("levels must be 1, 2 or 3")
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")


PointEvaluator = Callable[..., float]


def radial_evaluator(e: Expr) -> Callable[[float], float]:
    """Wrap a radial expression as a plain float function of r."""
    return lambda value: evaluate(e, {RADIAL_VAR: value})


def cartesian_evaluator(e: Expr, names: Sequence[str]) -> Callable[[Sequence[float]], float]:
    """Wrap an expression as a function of a coordinate vector."""
    names = tuple(names)

    def call(point: Sequence[float]) -> float:
        return evaluate(e, dict(zip(names, point)))

    return call


def _richardson(samples: Sequence[float]) -> float:
    """Extrapolate a sequence of O(h^2) estimates at steps h, h/2, h/4, ...

    Each Romberg stage removes the next even-order error term.
    """
    row = list(samples)
    factor = 4.0
    while len(row) > 1:
        row = [(factor * row[i + 1] - row[i]) / (factor - 1.0)
               for i in range(len(row) - 1)]
        factor *= 4.0
    return row[0]


def _second_difference(f: Callable[[float], float], x: float, h: float) -> float:
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)


def _first_difference(f: Callable[[float], float], x: float, h: float) -> float:
    return (f(x + h) - f(x - h)) / (2.0 * h)


def fd_cartesian_laplacian(f: PointEvaluator, g: SemiEuclidean,
                           point: Sequence[float],
                           cfg: Optional[FDConfig] = None) -> float:
    """Signature Laplacian of a black-box function by central differences."""
    cfg = cfg or FDConfig()
    point = list(point)
    n = g.p + g.q
    if len(point) != n:
        raise ValueError(f"expected {n} coordinates, got {len(point)}")

    def single(h: float) -> float:
        total = 0.0
        for i in range(n):
            def along(t: float, i=i) -> float:
                shifted = list(point)
                shifted[i] = t
                return f(shifted)
            term = _second_difference(along, point[i], h)
            total += term if i < g.p else -term
        return total

    try:
        estimates = [single(cfg.h / 2 ** level) for level in range(cfg.levels)]
    except DomainError as ex:
        raise StencilSingular(str(ex)) from None
    return _richardson(estimates)


def _radial_coefficient(g: Union[Model, WarpedProduct], at: float) -> float:
    """First-order coefficient of the radial Laplacian, evaluated exactly."""
    if isinstance(g, Model):
        coeff = _operators._model_coefficient(g)
    else:
        coeff = _operators._warped_coefficient(g)
    return evaluate(_expr.simplify(coeff), {RADIAL_VAR: at})


def fd_radial_laplacian(f: PointEvaluator, g: Union[Model, WarpedProduct],
                        at: float, cfg: Optional[FDConfig] = None) -> float:
    """F'' by central difference plus the exact first-order coefficient."""
    cfg = cfg or FDConfig()
    lo, hi = g.domain
    if at - 2 * cfg.h <= lo or at + 2 * cfg.h >= hi:
        raise OutOfDomain(
            f"point {at:g} within 2h of the boundary of ({lo:g}, {hi:g})")
    coeff = _radial_coefficient(g, at)
    try:
        second = _richardson([_second_difference(f, at, cfg.h / 2 ** level)
                              for level in range(cfg.levels)])
        first = _richardson([_first_difference(f, at, cfg.h / 2 ** level)
                             for level in range(cfg.levels)])
    except DomainError as ex:
        raise StencilSingular(str(ex)) from None
    return second + coeff * first


def fd_separated_radial_laplacian(f: PointEvaluator, g: WarpedProduct,
                                  lam: float, mu: float, at: float,
                                  cfg: Optional[FDConfig] = None) -> float:
    """Radial-factor Laplacian of F(r) V W: FD part plus the eigenvalue term."""
    base = fd_radial_laplacian(f, g, at, cfg)
    f1 = evaluate(g.f1, {RADIAL_VAR: at})
    f2 = evaluate(g.f2, {RADIAL_VAR: at})
    return base + (float(lam) / f1 ** 2 + float(mu) / f2 ** 2) * f(at)


# ---------------------------------------------------------------------------
# Symbolic-vs-numeric cross checking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CrossCheckPoint:
    point: object
    symbolic: float
    numeric: float
    discrepancy: float


@dataclass(frozen=True)
class CrossCheckReport:
    points: tuple
    max_discrepancy: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_discrepancy <= self.tolerance

    def __str__(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return (f"[{status}] max relative discrepancy {self.max_discrepancy:.3e} "
                f"over {len(self.points)} points (tolerance {self.tolerance:g})")


def cross_check(symbolic: Expr, function: Expr, g: Geometry,
                points: Sequence, cfg: Optional[FDConfig] = None,
                separated: Optional[SeparatedFunction] = None) -> CrossCheckReport:
    """Compare a claimed symbolic Laplacian against the FD oracle.

    ``function`` is the input whose Laplacian ``symbolic`` claims to be.
    Radial geometries take float sample points; semi-Euclidean geometries
    take coordinate vectors ordered x1..xp, y1..yq.  Discrepancies are
    relative to the finite-difference value with an absolute floor of one.
    """
    cfg = cfg or FDConfig()
    if len(points) < 3:
        raise ValueError("need at least 3 sample points")
    results = []
    for point in points:
        if isinstance(g, SemiEuclidean):
            names = g.coordinates
            sym = evaluate(symbolic, dict(zip(names, point)))
            num = fd_cartesian_laplacian(cartesian_evaluator(function, names),
                                         g, point, cfg)
        else:
            sym = evaluate(symbolic, {RADIAL_VAR: point})
            f = radial_evaluator(function)
            if separated is not None:
                num = fd_separated_radial_laplacian(
                    f, g, float(separated.lam), float(separated.mu), point, cfg)
            else:
                num = fd_radial_laplacian(f, g, point, cfg)
        disc = abs(sym - num) / max(1.0, abs(num))
        results.append(CrossCheckPoint(point, sym, num, disc))
    worst = max(p.discrepancy for p in results)
    return CrossCheckReport(tuple(results), worst, cfg.rel_tol)


# ---------------------------------------------------------------------------
# Adaptive Simpson quadrature
# ---------------------------------------------------------------------------

_MAX_SUBDIVISIONS = 10_000


def quadrature(integrand: Callable[[float], float], a: float, b: float,
               tol: float = 1e-10) -> float:
    """Adaptive Simpson integral of a continuous function on [a, b]."""
    if a == b:
        return 0.0
    if b < a:
        return -quadrature(integrand, b, a, tol)

    budget = [_MAX_SUBDIVISIONS]

    def simpson(lo: float, hi: float, flo: float, fmid: float, fhi: float) -> float:
        return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    def recurse(lo: float, hi: float, flo: float, fmid: float, fhi: float,
                whole: float, eps: float, depth: int) -> float:
        budget[0] -= 1
        if budget[0] < 0:
            raise QuadratureFailure(
                f"exceeded {_MAX_SUBDIVISIONS} subdivisions on [{a:g}, {b:g}]")
        if depth > 60:
            # Interval width below representable resolution: not converging.
            raise QuadratureFailure(
                f"no convergence at depth {depth} near [{lo:g}, {hi:g}]")
        mid = (lo + hi) / 2.0
        lmid = (lo + mid) / 2.0
        rmid = (mid + hi) / 2.0
        fl = integrand(lmid)
        fr = integrand(rmid)
        left = simpson(lo, mid, flo, fl, fmid)
        right = simpson(mid, hi, fmid, fr, fhi)
        if abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        return (recurse(lo, mid, flo, fl, fmid, left, eps / 2.0, depth + 1) +
                recurse(mid, hi, fmid, fr, fhi, right, eps / 2.0, depth + 1))

    mid = (a + b) / 2.0
    fa, fm, fb = integrand(a), integrand(mid), integrand(b)
    whole = simpson(a, b, fa, fm, fb)
    return recurse(a, b, fa, fm, fb, whole, tol, 0)
