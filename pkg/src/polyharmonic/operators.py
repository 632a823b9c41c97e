"""Laplace-Beltrami type operators, specialized per geometry family.

For a radial function F on a model, Delta F = F'' + (m-1) (f'/f) F'; on a
doubly warped product the coefficient becomes (p-1) f1'/f1 + (q-1) f2'/f2.
Separated functions F(r) V W (with V, W sphere eigenfunctions of eigenvalues
lambda, mu) add the diagonal term [lambda/f1^2 + mu/f2^2] F; only the radial
factor is ever materialized.  On R^{p,q} the operator is the signature
Laplacian sum_i d^2/dx_i^2 - sum_j d^2/dy_j^2.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .expr import (Const, Expr, Pow, Prod, Quot, Sum, Var, differentiate,
                   free_variables, node_count, simplify)
from .geometry import (RADIAL_VAR, Geometry, Model, SemiEuclidean,
                       WarpedProduct)


class ForeignVariable(ValueError):
    """The function mentions a variable outside the geometry's coordinates."""


class ExpressionBlowup(RuntimeError):
    """An iterated operator exceeded the node-count cap."""


#: Simplified intermediate results above this size abort with ExpressionBlowup.
NODE_CAP = 20_000

_R = Var(RADIAL_VAR)


@dataclass(frozen=True)
class SeparatedFunction:
    """Radial factor together with the two sphere eigenvalues.

    When ``sphere_spectral`` is set, both eigenvalues must be of the exact
    form -k(k+1) for a nonnegative integer k.
    """

    radial: Expr
    lam: Fraction
    mu: Fraction
    sphere_spectral: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lam", Fraction(self.lam))
        object.__setattr__(self, "mu", Fraction(self.mu))
        for name, value in (("lambda", self.lam), ("mu", self.mu)):
            if value > 0:
                raise ValueError(f"{name} must be <= 0, got {value}")
            if self.sphere_spectral and not _is_sphere_eigenvalue(value):
                raise ValueError(
                    f"{name}={value} is not -k(k+1) for an integer k >= 0")


def _is_sphere_eigenvalue(value: Fraction) -> bool:
    # value = -k(k+1)  <=>  k = (sqrt(1 - 4 value) - 1) / 2 is a nonneg integer
    disc = 1 - 4 * value
    root = int(disc ** 0.5 + 0.5)
    return root * root == disc and (root - 1) % 2 == 0 and root >= 1


FunctionValue = Union[Expr, SeparatedFunction]


# ---------------------------------------------------------------------------
# First-order coefficient helpers
# ---------------------------------------------------------------------------

def _model_coefficient(g: Model) -> Expr:
    return Prod((Const(g.m - 1), Quot(differentiate(g.f, RADIAL_VAR), g.f)))


def _warped_coefficient(g: WarpedProduct) -> Expr:
    return Sum((
        Prod((Const(g.p - 1), Quot(differentiate(g.f1, RADIAL_VAR), g.f1))),
        Prod((Const(g.q - 1), Quot(differentiate(g.f2, RADIAL_VAR), g.f2))),
    ))


def _check_coordinates(e: Expr, g: SemiEuclidean) -> None:
    foreign = free_variables(e) - set(g.coordinates)
    if foreign:
        raise ForeignVariable(
            f"variables {sorted(foreign)} are not coordinates of {g.describe()}")


# ---------------------------------------------------------------------------
# The operators
# ---------------------------------------------------------------------------

def radial_laplacian(f_r: Expr, g: Model) -> Expr:
    """F'' + (m-1) (f'/f) F' for a radial function on a model."""
    d1 = differentiate(f_r, RADIAL_VAR)
    d2 = differentiate(d1, RADIAL_VAR)
    return simplify(Sum((d2, Prod((_model_coefficient(g), d1)))))


def tension(f_r: Expr, g: Model) -> Expr:
    """The tension of a radial function: identical to radial_laplacian."""
    return radial_laplacian(f_r, g)


def warped_radial_laplacian(f_r: Expr, g: WarpedProduct) -> Expr:
    """F'' + [(p-1) f1'/f1 + (q-1) f2'/f2] F' on a doubly warped product."""
    d1 = differentiate(f_r, RADIAL_VAR)
    d2 = differentiate(d1, RADIAL_VAR)
    return simplify(Sum((d2, Prod((_warped_coefficient(g), d1)))))


def separated_laplacian(sf: SeparatedFunction, g: WarpedProduct) -> Expr:
    """Radial factor of the Laplacian of F(r) V W.

    The angular eigenfunctions divide out, leaving
    F'' + [(p-1) f1'/f1 + (q-1) f2'/f2] F' + [lambda/f1^2 + mu/f2^2] F.
    """
    base = warped_radial_laplacian(sf.radial, g)
    eigen = Sum((Quot(Const(sf.lam), Pow(g.f1, 2)),
                 Quot(Const(sf.mu), Pow(g.f2, 2))))
    return simplify(Sum((base, Prod((eigen, sf.radial)))))


def cartesian_laplacian(f: Expr, g: SemiEuclidean) -> Expr:
    """sum_i d2F/dx_i^2 - sum_j d2F/dy_j^2 (q = 0 is the Euclidean case)."""
    _check_coordinates(f, g)
    terms = []
    for name in g.x_names:
        terms.append(differentiate(differentiate(f, name), name))
    for name in g.y_names:
        terms.append(Prod((Const(-1),
                           differentiate(differentiate(f, name), name))))
    if not terms:
        raise AssertionError("semi-Euclidean geometry with no coordinates")
    return simplify(terms[0] if len(terms) == 1 else Sum(terms))


def laplacian(f: FunctionValue, g: Geometry) -> Expr:
    """Single application of the geometry's Laplacian (dispatch helper)."""
    if isinstance(f, SeparatedFunction):
        if not isinstance(g, WarpedProduct):
            raise TypeError("separated functions live on warped products")
        return separated_laplacian(f, g)
    if isinstance(g, Model):
        return radial_laplacian(f, g)
    if isinstance(g, WarpedProduct):
        return warped_radial_laplacian(f, g)
    if isinstance(g, SemiEuclidean):
        return cartesian_laplacian(f, g)
    raise TypeError(f"unsupported geometry {g!r}")


def laplacian_orders(f: FunctionValue, g: Geometry, s_max: int) -> list:
    """[F, Delta F, ..., Delta^{s_max} F], simplified at every order.

    For separated functions the eigenvalue term re-applies at every order
    because the angular factor persists; only radial factors are returned.
    """
    if s_max < 0:
        raise ValueError(f"order must be >= 0, got {s_max}")
    separated = isinstance(f, SeparatedFunction)
    current = simplify(f.radial) if separated else simplify(f)
    _guard(current, 0)
    orders = [current]
    for k in range(1, s_max + 1):
        if separated:
            current = separated_laplacian(
                SeparatedFunction(current, f.lam, f.mu, f.sphere_spectral), g)
        else:
            current = laplacian(current, g)
        _guard(current, k)
        orders.append(current)
    return orders


def iterated_laplacian(f: FunctionValue, g: Geometry, s: int) -> Expr:
    """s-fold Laplacian with simplification between applications.

    s = 0 returns the simplified input.
    """
    return laplacian_orders(f, g, s)[-1]


def _guard(e: Expr, order: int) -> None:
    size = node_count(e)
    if size > NODE_CAP:
        raise ExpressionBlowup(
            f"expression grew to {size} nodes (cap {NODE_CAP}) at order {order}")


def laplacian_product_rule(f1: FunctionValue, f2: FunctionValue,
                           g: Geometry) -> Expr:
    """Right-hand side of Delta(F1 F2) = F1 Delta F2 + F2 Delta F1 + 2 grad F1 . grad F2.

    For radial functions the gradient term is 2 F1' F2'; on R^{p,q} the dot
    product carries the metric signature.
    """
    if isinstance(f1, SeparatedFunction) or isinstance(f2, SeparatedFunction):
        raise TypeError("product rule is provided for plain expressions only")
    if isinstance(g, SemiEuclidean):
        _check_coordinates(f1, g)
        _check_coordinates(f2, g)
        cross = []
        for name in g.x_names:
            cross.append(Prod((differentiate(f1, name), differentiate(f2, name))))
        for name in g.y_names:
            cross.append(Prod((Const(-1), differentiate(f1, name),
                               differentiate(f2, name))))
        gradient_term = Prod((Const(2), Sum(cross) if len(cross) > 1 else cross[0]))
        return simplify(Sum((Prod((f1, cartesian_laplacian(f2, g))),
                             Prod((f2, cartesian_laplacian(f1, g))),
                             gradient_term)))
    lap = radial_laplacian if isinstance(g, Model) else warped_radial_laplacian
    return simplify(Sum((
        Prod((f1, lap(f2, g))),
        Prod((f2, lap(f1, g))),
        Prod((Const(2), differentiate(f1, RADIAL_VAR),
              differentiate(f2, RADIAL_VAR))),
    )))


def pq_gradient(f: Expr, g: SemiEuclidean) -> tuple:
    """Signature gradient (dF/dx_1, ..., dF/dx_p, -dF/dy_1, ..., -dF/dy_q)."""
    _check_coordinates(f, g)
    out = [simplify(differentiate(f, name)) for name in g.x_names]
    out.extend(simplify(Prod((Const(-1), differentiate(f, name))))
               for name in g.y_names)
    return tuple(out)


def euler_pairing(f: Expr, g: SemiEuclidean) -> Expr:
    """The first-order operator w . grad F = sum_i x_i dF/dx_i + sum_j y_j dF/dy_j.

    All signs are positive: the two metric sign flips (one from the gradient,
    one from the pairing) cancel.
    """
    _check_coordinates(f, g)
    terms = [Prod((Var(name), differentiate(f, name)))
             for name in g.coordinates]
    return simplify(terms[0] if len(terms) == 1 else Sum(terms))
