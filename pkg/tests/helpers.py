"""Shared generators and oracles for the test suite.

Everything here is deliberately independent of the library's symbolic
pipeline: derivatives are checked against central differences computed on
the spot, and random inputs come from explicit seeded generators so corpus
sizes are exact.
"""
from __future__ import annotations

import random
from fractions import Fraction

from polyharmonic import (Const, DomainError, Expr, PI, Var, evaluate,
                          parse)
from polyharmonic.expr import Call, Neg, NamedPi, Pow, Prod, Quot, Sum


# ---------------------------------------------------------------------------
# Random expression generation
# ---------------------------------------------------------------------------

_FUNCTIONS = ("sin", "cos", "tan", "sinh", "cosh", "tanh", "exp", "ln")


def random_expression(rng: random.Random, variables, depth: int = 5) -> Expr:
    """Random tree of depth <= depth over +, -, *, /, powers and calls."""
    if depth == 0 or rng.random() < 0.25:
        kind = rng.randrange(3)
        if kind == 0:
            return Const(Fraction(rng.randint(-4, 4)))
        if kind == 1 and rng.random() < 0.1:
            return PI
        return Var(rng.choice(variables))
    kind = rng.randrange(6)
    if kind == 0:
        return Sum((random_expression(rng, variables, depth - 1),
                    random_expression(rng, variables, depth - 1)))
    if kind == 1:
        return Sum((random_expression(rng, variables, depth - 1),
                    Neg(random_expression(rng, variables, depth - 1))))
    if kind == 2:
        return Prod((random_expression(rng, variables, depth - 1),
                     random_expression(rng, variables, depth - 1)))
    if kind == 3:
        return Quot(random_expression(rng, variables, depth - 1),
                    random_expression(rng, variables, depth - 1))
    if kind == 4:
        exponent = rng.choice([-2, -1, 2, 3, Fraction(1, 2), Fraction(3, 2)])
        return Pow(random_expression(rng, variables, depth - 1), exponent)
    return Call(rng.choice(_FUNCTIONS),
                random_expression(rng, variables, depth - 1))


def random_radial_smooth(rng: random.Random, trig: bool = True) -> Expr:
    """Small smooth radial expression (for operator identities)."""
    parts = []
    for _ in range(rng.randint(1, 3)):
        choice = rng.randrange(4 if trig else 2)
        coeff = rng.choice([c for c in range(-3, 4) if c])
        if choice == 0:
            parts.append(f"{coeff}*r^{rng.randint(1, 4)}")
        elif choice == 1:
            parts.append(f"{coeff}")
        elif choice == 2:
            parts.append(f"{coeff}*sin({rng.randint(1, 2)}*r)")
        else:
            parts.append(f"{coeff}*cos({rng.randint(1, 2)}*r)")
    return parse(" + ".join(parts))


def random_polynomial(rng: random.Random, coords, max_degree: int = 6) -> Expr:
    """Sparse integer-coefficient polynomial, total degree <= max_degree."""
    terms = []
    for _ in range(rng.randint(2, 5)):
        coeff = rng.choice([c for c in range(-5, 6) if c])
        exps = [0] * len(coords)
        for _ in range(rng.randint(0, max_degree)):
            exps[rng.randrange(len(coords))] += 1
        text = str(coeff)
        for name, k in zip(coords, exps):
            if k:
                text += f"*{name}^{k}" if k > 1 else f"*{name}"
        terms.append(text)
    return parse(" + ".join(terms))


# ---------------------------------------------------------------------------
# Numerical oracles
# ---------------------------------------------------------------------------

def central_difference(e: Expr, var: str, point: dict, h: float = 1e-5) -> float:
    hi = dict(point)
    lo = dict(point)
    hi[var] = point[var] + h
    lo[var] = point[var] - h
    return (evaluate(e, hi) - evaluate(e, lo)) / (2 * h)


def sample_point(rng: random.Random, variables, low=0.2, high=1.8) -> dict:
    return {v: rng.uniform(low, high) for v in variables}


def evaluable_at(e: Expr, point: dict, bound: float = 1e4):
    """Value of e at point if defined and moderately sized, else None."""
    try:
        value = evaluate(e, point)
    except DomainError:
        return None
    if abs(value) > bound or value != value:
        return None
    return value


# ---------------------------------------------------------------------------
# Simplified-form invariant checker
# ---------------------------------------------------------------------------

def assert_simplified_form(e: Expr) -> None:
    """Structural invariants of simplifier output.

    No undersized sums/products, no nested sums in sums or products in
    products, no foldable rational-constant arithmetic left unfolded, no
    trivial powers, no zero factors or terms.  Transcendental calls and
    irrational fractional powers are exactness boundaries and exempt.
    """
    if isinstance(e, Sum):
        assert len(e.terms) >= 2
        zero_count = sum(1 for t in e.terms
                         if isinstance(t, Const) and t.value == 0)
        assert zero_count == 0, "0 + u survived"
        assert sum(1 for t in e.terms if isinstance(t, Const)) <= 1
        for t in e.terms:
            assert not isinstance(t, Sum), "nested sum survived"
            assert_simplified_form(t)
        return
    if isinstance(e, Prod):
        assert len(e.factors) >= 2
        for f in e.factors:
            assert not isinstance(f, Prod), "nested product survived"
            if isinstance(f, Const):
                assert f.value not in (0, 1), "0*u or 1*u survived"
            assert_simplified_form(f)
        assert sum(1 for f in e.factors if isinstance(f, Const)) <= 1
        return
    if isinstance(e, Pow):
        assert e.exponent not in (0, 1), "x^0 or x^1 survived"
        if isinstance(e.base, Const) and e.exponent.denominator == 1:
            # 0^negative is undefined everywhere and stays unfolded.
            assert e.base.value == 0 and e.exponent < 0, \
                "constant integer power left unfolded"
        assert_simplified_form(e.base)
        return
    if isinstance(e, Quot):
        # Simplifier output only keeps quotients that are undefined
        # everywhere (literal zero denominator).
        assert isinstance(e.den, Const) and e.den.value == 0
        return
    if isinstance(e, Neg):
        assert False, "negation should be folded into coefficients"
    if isinstance(e, Call):
        assert_simplified_form(e.arg)
        return
    assert isinstance(e, (Const, Var, NamedPi))
