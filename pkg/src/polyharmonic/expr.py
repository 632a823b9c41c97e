"""Symbolic expression kernel: exact immutable trees over real variables.

Rational constants are stored exactly as ``fractions.Fraction``; the only
named constant is pi.  Builtin functions: sin cos tan cot sec csc sinh cosh
tanh coth exp ln.  Exponents are exact rationals (general ``u^v`` is out of
the grammar).

The kernel provides parsing, printing, exact differentiation, a conservative
value-preserving simplifier (constant folding, flattening, like-term
collection, power merging -- deliberately no trigonometric rewriting), IEEE
double evaluation, substitution and a two-tier zero test (exact rational
canonicalization when possible, seeded sampling otherwise).

All values are immutable and all operations are pure (sampling seeds are
passed in explicitly), so concurrent use is unrestricted; the internal
simplify/differentiate memo tables only ever store results of deterministic
functions, which keeps racing writers consistent.
"""
from __future__ import annotations

import math
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

# Deep trees arise from iterated quotient-rule differentiation.
sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

RationalLike = Union[int, Fraction]

BUILTINS = ("sin", "cos", "tan", "cot", "sec", "csc",
            "sinh", "cosh", "tanh", "coth", "exp", "ln")

#: |denominator| below this threshold counts as a pole when evaluating.
POLE_EPS = 1e-14

DEFAULT_SEED = 0x414C4D


class ExprError(Exception):
    """Base class for kernel errors."""


class ParseError(ExprError):
    """Syntax error, unknown function or malformed number, with offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class DomainError(ExprError):
    """Evaluation hit a pole, a division by (near-)zero or ln of x <= 0."""


class UnboundVariable(ExprError):
    """Evaluation met a variable missing from the assignment."""


class AllSamplesSingular(ExprError):
    """Every sampled point of a zero test raised DomainError."""


# ---------------------------------------------------------------------------
# Expression nodes
# ---------------------------------------------------------------------------

class Expr:
    """Immutable expression tree node.

    Every node caches its hash, node count and free-variable set at
    construction, so structural equality and blowup checks stay cheap even
    on large trees.
    """

    __slots__ = ("_hash", "_size", "_vars")

    def _seal(self, payload: tuple, children: Sequence["Expr"]) -> None:
        self._hash = hash((type(self).__name__,) + payload +
                          tuple(c._hash for c in children))
        self._size = 1 + sum(c._size for c in children)
        vs: frozenset = frozenset()
        for c in children:
            vs = vs | c._vars
        self._vars = vs

    def __hash__(self) -> int:
        return self._hash

    def children(self) -> tuple["Expr", ...]:
        return ()

    # Convenience constructors; results are raw (not simplified).
    def __add__(self, other):
        return Sum((self, _coerce(other)))

    def __radd__(self, other):
        return Sum((_coerce(other), self))

    def __sub__(self, other):
        return Sum((self, Neg(_coerce(other))))

    def __rsub__(self, other):
        return Sum((_coerce(other), Neg(self)))

    def __mul__(self, other):
        return Prod((self, _coerce(other)))

    def __rmul__(self, other):
        return Prod((_coerce(other), self))

    def __truediv__(self, other):
        return Quot(self, _coerce(other))

    def __rtruediv__(self, other):
        return Quot(_coerce(other), self)

    def __pow__(self, exponent: RationalLike):
        return Pow(self, Fraction(exponent))

    def __neg__(self):
        return Neg(self)

    def __str__(self) -> str:
        return to_string(self)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {to_string(self)}>"


def _coerce(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction)):
        return Const(Fraction(value))
    raise TypeError(f"cannot use {value!r} in an expression")


class Const(Expr):
    """Exact rational constant."""

    __slots__ = ("value",)

    def __init__(self, value: RationalLike):
        self.value = Fraction(value)
        self._seal((self.value,), ())

    def __eq__(self, other):
        return self is other or (type(other) is Const and
                                 self._hash == other._hash and
                                 self.value == other.value)

    def __hash__(self):
        return self._hash


class NamedPi(Expr):
    """The named constant pi (kept symbolic for exactness)."""

    __slots__ = ()

    def __init__(self):
        self._seal((), ())

    def __eq__(self, other):
        return type(other) is NamedPi

    def __hash__(self):
        return self._hash


PI = NamedPi()


class Var(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("Var", name))
        self._size = 1
        self._vars = frozenset((name,))

    def __eq__(self, other):
        return self is other or (type(other) is Var and self.name == other.name)

    def __hash__(self):
        return self._hash


class Neg(Expr):
    __slots__ = ("operand",)

    def __init__(self, operand: Expr):
        self.operand = operand
        self._seal((), (operand,))

    def children(self):
        return (self.operand,)

    def __eq__(self, other):
        return self is other or (type(other) is Neg and
                                 self._hash == other._hash and
                                 self.operand == other.operand)

    def __hash__(self):
        return self._hash


class Sum(Expr):
    """n-ary sum (at least two terms)."""

    __slots__ = ("terms",)

    def __init__(self, terms: Sequence[Expr]):
        terms = tuple(terms)
        if len(terms) < 2:
            raise ValueError("Sum needs at least two terms")
        self.terms = terms
        self._seal((), terms)

    def children(self):
        return self.terms

    def __eq__(self, other):
        return self is other or (type(other) is Sum and
                                 self._hash == other._hash and
                                 self.terms == other.terms)

    def __hash__(self):
        return self._hash


class Prod(Expr):
    """n-ary product (at least two factors)."""

    __slots__ = ("factors",)

    def __init__(self, factors: Sequence[Expr]):
        factors = tuple(factors)
        if len(factors) < 2:
            raise ValueError("Prod needs at least two factors")
        self.factors = factors
        self._seal((), factors)

    def children(self):
        return self.factors

    def __eq__(self, other):
        return self is other or (type(other) is Prod and
                                 self._hash == other._hash and
                                 self.factors == other.factors)

    def __hash__(self):
        return self._hash


class Quot(Expr):
    __slots__ = ("num", "den")

    def __init__(self, num: Expr, den: Expr):
        self.num = num
        self.den = den
        self._seal((), (num, den))

    def children(self):
        return (self.num, self.den)

    def __eq__(self, other):
        return self is other or (type(other) is Quot and
                                 self._hash == other._hash and
                                 self.num == other.num and self.den == other.den)

    def __hash__(self):
        return self._hash


class Pow(Expr):
    """Power with an exact rational exponent."""

    __slots__ = ("base", "exponent")

    def __init__(self, base: Expr, exponent: RationalLike):
        self.base = base
        self.exponent = Fraction(exponent)
        self._seal((self.exponent,), (base,))

    def children(self):
        return (self.base,)

    def __eq__(self, other):
        return self is other or (type(other) is Pow and
                                 self._hash == other._hash and
                                 self.exponent == other.exponent and
                                 self.base == other.base)

    def __hash__(self):
        return self._hash


class Call(Expr):
    __slots__ = ("fn", "arg")

    def __init__(self, fn: str, arg: Expr):
        if fn not in BUILTINS:
            raise ValueError(f"unknown builtin function {fn!r}")
        self.fn = fn
        self.arg = arg
        self._seal((fn,), (arg,))

    def children(self):
        return (self.arg,)

    def __eq__(self, other):
        return self is other or (type(other) is Call and
                                 self._hash == other._hash and
                                 self.fn == other.fn and self.arg == other.arg)

    def __hash__(self):
        return self._hash


ZERO = Const(0)
ONE = Const(1)


def node_count(e: Expr) -> int:
    return e._size


def free_variables(e: Expr) -> frozenset:
    return e._vars


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_OPS = set("+-*/^()")


class _Token:
    __slots__ = ("kind", "text", "offset")

    def __init__(self, kind: str, text: str, offset: int):
        self.kind = kind        # 'num' | 'ident' | one of +-*/^() | 'end'
        self.text = text
        self.offset = offset


def _tokenize(text: str) -> list:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _TOKEN_OPS:
            tokens.append(_Token(ch, ch, i))
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            start = i
            while i < n and text[i].isdigit():
                i += 1
            if i < n and text[i] == ".":
                i += 1
                frac_start = i
                while i < n and text[i].isdigit():
                    i += 1
                if i == frac_start:
                    raise ParseError("malformed number", start)
            if i < n and (text[i] == "." or text[i].isalpha()):
                raise ParseError("malformed number", start)
            word = text[start:i]
            if word == ".":
                raise ParseError("malformed number", start)
            tokens.append(_Token("num", word, start))
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            tokens.append(_Token("ident", text[start:i], start))
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            found = repr(tok.text) if tok.text else "end of input"
            raise ParseError(f"expected {kind!r}, found {found}", tok.offset)
        return self.advance()

    def parse(self) -> Expr:
        e = self.parse_expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected trailing input {tok.text!r}", tok.offset)
        return e

    def parse_expr(self) -> Expr:
        terms = [self.parse_term()]
        while self.peek().kind in ("+", "-"):
            op = self.advance().kind
            rhs = self.parse_term()
            terms.append(Neg(rhs) if op == "-" else rhs)
        return terms[0] if len(terms) == 1 else Sum(terms)

    def parse_term(self) -> Expr:
        # Left-associative fold; '*' extends the running n-ary product, '/'
        # wraps the running value in a quotient.
        cur = self.parse_unary()
        building_prod = False
        while self.peek().kind in ("*", "/"):
            op = self.advance().kind
            rhs = self.parse_unary()
            if op == "*":
                if building_prod:
                    cur = Prod(cur.factors + (rhs,))
                else:
                    cur = Prod((cur, rhs))
                    building_prod = True
            else:
                cur = Quot(cur, rhs)
                building_prod = False
        return cur

    def parse_unary(self) -> Expr:
        if self.peek().kind == "-":
            self.advance()
            return Neg(self.parse_unary())
        return self.parse_power()

    def parse_power(self) -> Expr:
        base = self.parse_atom()
        if self.peek().kind == "^":
            self.advance()
            return Pow(base, self.parse_exponent())
        return base

    def parse_exponent(self) -> Fraction:
        tok = self.peek()
        if tok.kind == "-":
            self.advance()
            return -self.parse_exponent()
        if tok.kind == "num":
            self.advance()
            if "." in tok.text:
                raise ParseError("exponent must be an integer or (integer/integer)",
                                 tok.offset)
            return Fraction(int(tok.text))
        if tok.kind == "(":
            self.advance()
            num = self.expect("num")
            if "." in num.text:
                raise ParseError("exponent must be an integer or (integer/integer)",
                                 num.offset)
            self.expect("/")
            den = self.expect("num")
            if "." in den.text:
                raise ParseError("exponent must be an integer or (integer/integer)",
                                 den.offset)
            self.expect(")")
            if int(den.text) == 0:
                raise ParseError("zero denominator in exponent", den.offset)
            return Fraction(int(num.text), int(den.text))
        raise ParseError("expected an exponent", tok.offset)

    def parse_atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Const(_number_to_fraction(tok.text, tok.offset))
        if tok.kind == "ident":
            self.advance()
            if tok.text == "pi":
                return PI
            if self.peek().kind == "(":
                if tok.text not in BUILTINS:
                    raise ParseError(f"unknown function {tok.text!r}", tok.offset)
                self.advance()
                arg = self.parse_expr()
                self.expect(")")
                return Call(tok.text, arg)
            return Var(tok.text)
        if tok.kind == "(":
            self.advance()
            inner = self.parse_expr()
            self.expect(")")
            return inner
        found = repr(tok.text) if tok.text else "end of input"
        raise ParseError(f"unexpected token {found}", tok.offset)


def _number_to_fraction(text: str, offset: int) -> Fraction:
    try:
        if "." in text:
            whole, frac = text.split(".")
            scale = 10 ** len(frac)
            return Fraction(int(whole or "0") * scale + int(frac), scale)
        return Fraction(int(text))
    except ValueError:
        raise ParseError("malformed number", offset) from None


def parse(text: str) -> Expr:
    """Parse ``text`` into the unique tree under the published grammar."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Printing (inverse of parse: printing a parsed tree reparses identically)
# ---------------------------------------------------------------------------

_LEVEL_SUM, _LEVEL_TERM, _LEVEL_UNARY, _LEVEL_POWER, _LEVEL_ATOM = 1, 2, 3, 4, 5


def _precedence(e: Expr) -> int:
    if isinstance(e, Sum):
        return _LEVEL_SUM
    if isinstance(e, (Prod, Quot)):
        return _LEVEL_TERM
    if isinstance(e, Neg):
        return _LEVEL_UNARY
    if isinstance(e, Const) and e.value < 0:
        return _LEVEL_UNARY
    if isinstance(e, Pow):
        return _LEVEL_POWER
    return _LEVEL_ATOM


def _fraction_str(value: Fraction) -> str:
    num, den = value.numerator, value.denominator
    if den == 1:
        return str(num)
    # Exact decimal when the denominator divides a power of ten.
    d = den
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d == 1:
        k = max(twos, fives)
        scaled = abs(num) * 10 ** k // den
        digits = str(scaled).rjust(k + 1, "0")
        sign = "-" if num < 0 else ""
        return f"{sign}{digits[:-k]}.{digits[-k:]}"
    return f"{num}/{den}"


def _exponent_str(value: Fraction) -> str:
    if value < 0:
        return "-" + _exponent_str(-value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"({value.numerator}/{value.denominator})"


def _render(e: Expr, level: int) -> str:
    text = _render_bare(e)
    if _precedence(e) < level:
        return f"({text})"
    return text


def _render_bare(e: Expr) -> str:
    if isinstance(e, Const):
        return _fraction_str(e.value)
    if isinstance(e, NamedPi):
        return "pi"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return "-" + _render(e.operand, _LEVEL_UNARY)
    if isinstance(e, Call):
        return f"{e.fn}({_render(e.arg, _LEVEL_SUM)})"
    if isinstance(e, Pow):
        return f"{_render(e.base, _LEVEL_ATOM)}^{_exponent_str(e.exponent)}"
    if isinstance(e, Quot):
        return f"{_render(e.num, _LEVEL_TERM)}/{_render(e.den, _LEVEL_UNARY)}"
    if isinstance(e, Prod):
        if isinstance(e.factors[0], Const) and e.factors[0].value < 0:
            # Simplifier-made negative coefficient: lead with the sign.
            return "-" + _render(_strip_negation(e), _LEVEL_TERM)
        parts = [_render(e.factors[0], _LEVEL_TERM)]
        for f in e.factors[1:]:
            parts.append(_render(f, _LEVEL_UNARY))
        return "*".join(parts)
    if isinstance(e, Sum):
        first_neg = _strip_negation(e.terms[0])
        if first_neg is not None and not isinstance(e.terms[0], Neg):
            out = ["-" + _render(first_neg, _LEVEL_TERM)]
        else:
            out = [_render(e.terms[0], _LEVEL_SUM)]
        for t in e.terms[1:]:
            negated = _strip_negation(t)
            if negated is not None:
                out.append(" - " + _render(negated, _LEVEL_TERM))
            else:
                out.append(" + " + _render(t, _LEVEL_TERM))
        return "".join(out)
    raise TypeError(f"cannot print {e!r}")


def _strip_negation(t: Expr) -> Optional[Expr]:
    """Return u when t is literally -u, else None (for '-' rendering in sums)."""
    if isinstance(t, Neg):
        return t.operand
    if isinstance(t, Const) and t.value < 0:
        return Const(-t.value)
    if isinstance(t, Prod) and isinstance(t.factors[0], Const) and t.factors[0].value < 0:
        lead = Const(-t.factors[0].value)
        rest = t.factors[1:]
        if lead.value == 1:
            return rest[0] if len(rest) == 1 else Prod(rest)
        return Prod((lead,) + rest)
    if isinstance(t, Quot) and not isinstance(t.num, Neg):
        # Const-led negatives only: those never come out of the parser, so
        # rewriting them keeps printing/parsing a strict round trip.
        num = _strip_negation(t.num)
        if num is not None:
            return Quot(num, t.den)
    return None


def to_string(e: Expr) -> str:
    """Print ``e`` in the concrete grammar (round-trips through parse)."""
    return _render(e, _LEVEL_SUM)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _eval_call(fn: str, x: float) -> float:
    try:
        if fn == "sin":
            return math.sin(x)
        if fn == "cos":
            return math.cos(x)
        if fn == "tan":
            c = math.cos(x)
            if abs(c) < POLE_EPS:
                raise DomainError(f"tan pole at argument {x!r}")
            return math.sin(x) / c
        if fn == "cot":
            s = math.sin(x)
            if abs(s) < POLE_EPS:
                raise DomainError(f"cot pole at argument {x!r}")
            return math.cos(x) / s
        if fn == "sec":
            c = math.cos(x)
            if abs(c) < POLE_EPS:
                raise DomainError(f"sec pole at argument {x!r}")
            return 1.0 / c
        if fn == "csc":
            s = math.sin(x)
            if abs(s) < POLE_EPS:
                raise DomainError(f"csc pole at argument {x!r}")
            return 1.0 / s
        if fn == "sinh":
            return math.sinh(x)
        if fn == "cosh":
            return math.cosh(x)
        if fn == "tanh":
            return math.tanh(x)
        if fn == "coth":
            s = math.sinh(x)
            if abs(s) < POLE_EPS:
                raise DomainError(f"coth pole at argument {x!r}")
            return math.cosh(x) / s
        if fn == "exp":
            return math.exp(x)
        if fn == "ln":
            if x <= 0.0:
                raise DomainError(f"ln of non-positive value {x!r}")
            return math.log(x)
    except OverflowError:
        raise DomainError(f"overflow evaluating {fn}({x!r})") from None
    raise ValueError(f"unknown builtin {fn!r}")


def _eval_pow(base: float, exponent: Fraction) -> float:
    p, q = exponent.numerator, exponent.denominator
    try:
        if q == 1:
            if base == 0.0 and p < 0:
                raise DomainError("zero base with negative exponent")
            return base ** p
        if base < 0.0:
            if q % 2 == 1:
                sign = -1.0 if p % 2 == 1 else 1.0
                return sign * (-base) ** (p / q)
            raise DomainError("negative base with even-root exponent")
        if base == 0.0:
            if p < 0:
                raise DomainError("zero base with negative exponent")
            return 0.0
        return base ** (p / q)
    except OverflowError:
        raise DomainError("overflow in power") from None


def evaluate(e: Expr, assignment: Mapping[str, float]) -> float:
    """IEEE double-precision value of ``e`` under the given assignment."""
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, NamedPi):
        return math.pi
    if isinstance(e, Var):
        try:
            return float(assignment[e.name])
        except KeyError:
            raise UnboundVariable(e.name) from None
    if isinstance(e, Neg):
        return -evaluate(e.operand, assignment)
    if isinstance(e, Sum):
        return math.fsum(evaluate(t, assignment) for t in e.terms)
    if isinstance(e, Prod):
        out = 1.0
        for f in e.factors:
            out *= evaluate(f, assignment)
        return out
    if isinstance(e, Quot):
        den = evaluate(e.den, assignment)
        if abs(den) < POLE_EPS:
            raise DomainError(f"division by near-zero denominator {den!r}")
        return evaluate(e.num, assignment) / den
    if isinstance(e, Pow):
        return _eval_pow(evaluate(e.base, assignment), e.exponent)
    if isinstance(e, Call):
        return _eval_call(e.fn, evaluate(e.arg, assignment))
    raise TypeError(f"cannot evaluate {e!r}")


def substitute(e: Expr, var: str, replacement: Expr) -> Expr:
    """Replace every occurrence of the variable ``var`` by ``replacement``."""
    if var not in e._vars:
        return e
    if isinstance(e, Var):
        return replacement if e.name == var else e
    if isinstance(e, Neg):
        return Neg(substitute(e.operand, var, replacement))
    if isinstance(e, Sum):
        return Sum(tuple(substitute(t, var, replacement) for t in e.terms))
    if isinstance(e, Prod):
        return Prod(tuple(substitute(f, var, replacement) for f in e.factors))
    if isinstance(e, Quot):
        return Quot(substitute(e.num, var, replacement),
                    substitute(e.den, var, replacement))
    if isinstance(e, Pow):
        return Pow(substitute(e.base, var, replacement), e.exponent)
    if isinstance(e, Call):
        return Call(e.fn, substitute(e.arg, var, replacement))
    return e


# ---------------------------------------------------------------------------
# Structural ordering (canonical factor/term order inside the simplifier)
# ---------------------------------------------------------------------------

_KIND_RANK = {Const: 0, NamedPi: 1, Var: 2, Call: 3, Pow: 4,
              Prod: 5, Quot: 6, Sum: 7, Neg: 8}


def _sort_key(e: Expr):
    rank = _KIND_RANK[type(e)]
    if isinstance(e, Const):
        return (rank, e.value)
    if isinstance(e, NamedPi):
        return (rank,)
    if isinstance(e, Var):
        return (rank, e.name)
    if isinstance(e, Call):
        return (rank, e.fn, _sort_key(e.arg))
    if isinstance(e, Pow):
        return (rank, _sort_key(e.base), e.exponent)
    return (rank, len(e.children()), tuple(_sort_key(c) for c in e.children()))


# ---------------------------------------------------------------------------
# Simplification
# ---------------------------------------------------------------------------

_simplify_cache: dict = {}


def simplify(e: Expr) -> Expr:
    """Value-preserving normalization.

    Bottom-up: constant folding, sum/product flattening, like-term
    collection, power merging, quotient normalization.  No trigonometric
    identities are applied; value-level equality of transcendental forms is
    the zero test's job.
    """
    cached = _simplify_cache.get(e)
    if cached is not None:
        return cached
    result = _simplify_node(e)
    _simplify_cache[e] = result
    _simplify_cache[result] = result
    return result


def _simplify_node(e: Expr) -> Expr:
    if isinstance(e, (Const, NamedPi, Var)):
        return e
    if isinstance(e, Neg):
        return _combine([Const(-1), simplify(e.operand)], [])
    if isinstance(e, Sum):
        return _ssum([simplify(t) for t in e.terms])
    if isinstance(e, Prod):
        return _combine([simplify(f) for f in e.factors], [])
    if isinstance(e, Quot):
        return _squot(simplify(e.num), simplify(e.den))
    if isinstance(e, Pow):
        return _spow(simplify(e.base), e.exponent)
    if isinstance(e, Call):
        return _scall(e.fn, simplify(e.arg))
    raise TypeError(f"cannot simplify {e!r}")


def _ssum(terms: list) -> Expr:
    """Flatten, fold constants and collect like terms of a sum."""
    constant = Fraction(0)
    coeffs: dict = {}
    order: list = []
    stack = list(reversed(terms))
    while stack:
        t = stack.pop()
        if isinstance(t, Sum):
            stack.extend(reversed(t.terms))
            continue
        if isinstance(t, Const):
            constant += t.value
            continue
        coeff, core = _split_coefficient(t)
        if isinstance(core, Sum):
            # c*(a + b): distribute the rational coefficient and re-collect.
            stack.extend(_combine([Const(coeff), sub], []) for sub in core.terms)
            continue
        if core in coeffs:
            coeffs[core] += coeff
        else:
            coeffs[core] = coeff
            order.append(core)
    out = []
    for core in sorted(order, key=_sort_key):
        c = coeffs[core]
        if c == 0:
            continue
        out.append(core if c == 1 else _combine([Const(c), core], []))
    if constant != 0 or not out:
        out.insert(0, Const(constant))
    if len(out) == 1:
        return out[0]
    return Sum(out)


def _split_coefficient(t: Expr) -> tuple:
    """Decompose a (simplified) term into (rational coefficient, core)."""
    if isinstance(t, Const):
        return t.value, ONE
    if isinstance(t, Prod) and isinstance(t.factors[0], Const):
        rest = t.factors[1:]
        core = rest[0] if len(rest) == 1 else Prod(rest)
        return t.factors[0].value, core
    if isinstance(t, Quot):
        coeff, core = _split_coefficient(t.num)
        if coeff != 1:
            return coeff, Quot(core, t.den)
    return Fraction(1), t


def _combine(num_factors: list, den_factors: list) -> Expr:
    """Merge factor lists into coefficient * product-of-powers form.

    Inputs must already be simplified.  Powers of structurally equal bases
    merge; factors shared between numerator and denominator cancel.
    Denominators become negative exponents: each factor then evaluates at
    its own scale, so benign tiny products never trip the quotient pole
    threshold (genuine poles still surface as zero bases or overflow).
    """
    coeff = Fraction(1)
    exps: dict = {}
    order: list = []

    def entry(base: Expr, exponent: Fraction) -> None:
        if base in exps:
            exps[base] += exponent
        else:
            exps[base] = exponent
            order.append(base)

    def feed(factor: Expr, sign: int) -> None:
        nonlocal coeff
        if isinstance(factor, Const):
            if factor.value == 0:
                if sign > 0:
                    coeff = Fraction(0)
                else:
                    # Division by a literal zero: keep an undefined-everywhere
                    # atom (0^-1) instead of losing the information.
                    entry(factor, Fraction(sign))
                return
            coeff = coeff * factor.value if sign > 0 else coeff / factor.value
            return
        if isinstance(factor, Prod):
            for f in factor.factors:
                feed(f, sign)
            return
        if isinstance(factor, Quot):
            if isinstance(factor.den, Const) and factor.den.value == 0:
                entry(factor, Fraction(sign))  # undefined everywhere: opaque
                return
            feed(factor.num, sign)
            feed(factor.den, -sign)
            return
        base, exp = (factor.base, factor.exponent) if isinstance(factor, Pow) \
            else (factor, Fraction(1))
        entry(base, sign * exp)

    for f in num_factors:
        feed(f, +1)
    for f in den_factors:
        feed(f, -1)

    if coeff == 0:
        return ZERO

    parts = []
    rerun = False
    for base in sorted(order, key=_sort_key):
        exp = exps[base]
        if exp == 0:
            continue
        # Merged exponents can make a power foldable or distributable again
        # (e.g. 2^(1/2) * 2^(3/2), or (x*y)^(1/2) squared); route through
        # the power rules and re-collect when anything changed shape.
        piece = _spow(base, exp)
        if isinstance(piece, Const):
            if piece.value == 0:
                return ZERO
            coeff *= piece.value
            continue
        expected = base if exp == 1 else Pow(base, exp)
        if piece != expected:
            rerun = True
        parts.append(piece)

    if rerun:
        return _combine([Const(coeff)] + parts, [])

    if coeff != 1 or not parts:
        parts.insert(0, Const(coeff))
    return parts[0] if len(parts) == 1 else Prod(parts)


def _squot(num: Expr, den: Expr) -> Expr:
    if isinstance(den, Const) and den.value == 0:
        return Quot(num, den)  # undefined everywhere; left untouched
    if isinstance(num, Const) and num.value == 0:
        return ZERO
    return _combine([num], [den])


def _spow(base: Expr, exponent: Fraction) -> Expr:
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if isinstance(base, Const):
        folded = _fold_const_power(base.value, exponent)
        if folded is not None:
            return Const(folded)
        return Pow(base, exponent)
    if isinstance(base, Pow) and exponent.denominator == 1:
        return _spow(base.base, base.exponent * exponent)
    if isinstance(base, Prod) and exponent.denominator == 1:
        return _combine([_spow(f, exponent) for f in base.factors], [])
    if isinstance(base, Quot) and exponent.denominator == 1 \
            and not (isinstance(base.den, Const) and base.den.value == 0):
        return _combine([_spow(base.num, exponent)], [_spow(base.den, exponent)])
    return Pow(base, exponent)


def _fold_const_power(value: Fraction, exponent: Fraction) -> Optional[Fraction]:
    p, q = exponent.numerator, exponent.denominator
    if q == 1:
        if value == 0 and p < 0:
            return None
        return value ** p
    if value < 0 and q % 2 == 0:
        return None
    raised = value ** p if not (value == 0 and p < 0) else None
    if raised is None:
        return None
    num_root = _exact_root(raised.numerator, q)
    den_root = _exact_root(raised.denominator, q)
    if num_root is None or den_root is None:
        return None
    return Fraction(num_root, den_root)


def _exact_root(n: int, q: int) -> Optional[int]:
    if n < 0:
        if q % 2 == 0:
            return None
        r = _exact_root(-n, q)
        return None if r is None else -r
    root = round(n ** (1.0 / q))
    for candidate in (root - 1, root, root + 1):
        if candidate >= 0 and candidate ** q == n:
            return candidate
    return None


_EXACT_CALL_VALUES = {
    ("sin", Fraction(0)): ZERO, ("tan", Fraction(0)): ZERO,
    ("sinh", Fraction(0)): ZERO, ("tanh", Fraction(0)): ZERO,
    ("cos", Fraction(0)): ONE, ("cosh", Fraction(0)): ONE,
    ("sec", Fraction(0)): ONE, ("exp", Fraction(0)): ONE,
    ("ln", Fraction(1)): ZERO,
}


def _scall(fn: str, arg: Expr) -> Expr:
    if isinstance(arg, Const):
        exact = _EXACT_CALL_VALUES.get((fn, arg.value))
        if exact is not None:
            return exact
    return Call(fn, arg)


# ---------------------------------------------------------------------------
# Differentiation
# ---------------------------------------------------------------------------

_diff_cache: dict = {}


def differentiate(e: Expr, var: str) -> Expr:
    """Exact symbolic derivative of ``e`` with respect to ``var`` (simplified)."""
    key = (e, var)
    cached = _diff_cache.get(key)
    if cached is not None:
        return cached
    result = simplify(_diff(e, var))
    _diff_cache[key] = result
    return result


def _diff(e: Expr, var: str) -> Expr:
    if var not in e._vars:
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Neg):
        return Neg(_diff(e.operand, var))
    if isinstance(e, Sum):
        return Sum(tuple(_diff(t, var) for t in e.terms))
    if isinstance(e, Prod):
        terms = []
        for i, f in enumerate(e.factors):
            df = _diff(f, var)
            terms.append(Prod(e.factors[:i] + (df,) + e.factors[i + 1:]))
        return Sum(terms) if len(terms) > 1 else terms[0]
    if isinstance(e, Quot):
        n, d = e.num, e.den
        return Quot(Sum((Prod((_diff(n, var), d)),
                         Neg(Prod((n, _diff(d, var)))))),
                    Pow(d, 2))
    if isinstance(e, Pow):
        return Prod((Const(e.exponent), Pow(e.base, e.exponent - 1),
                     _diff(e.base, var)))
    if isinstance(e, Call):
        return Prod((_call_derivative(e.fn, e.arg), _diff(e.arg, var)))
    raise TypeError(f"cannot differentiate {e!r}")


def _call_derivative(fn: str, u: Expr) -> Expr:
    if fn == "sin":
        return Call("cos", u)
    if fn == "cos":
        return Neg(Call("sin", u))
    if fn == "tan":
        return Pow(Call("sec", u), 2)
    if fn == "cot":
        return Neg(Pow(Call("csc", u), 2))
    if fn == "sec":
        return Prod((Call("sec", u), Call("tan", u)))
    if fn == "csc":
        return Neg(Prod((Call("csc", u), Call("cot", u))))
    if fn == "sinh":
        return Call("cosh", u)
    if fn == "cosh":
        return Call("sinh", u)
    if fn == "tanh":
        return Quot(ONE, Pow(Call("cosh", u), 2))
    if fn == "coth":
        return Neg(Quot(ONE, Pow(Call("sinh", u), 2)))
    if fn == "exp":
        return Call("exp", u)
    if fn == "ln":
        return Quot(ONE, u)
    raise ValueError(f"unknown builtin {fn!r}")


# ---------------------------------------------------------------------------
# Zero testing
# ---------------------------------------------------------------------------

#: Default sampling box: the radial variable stays inside every catalog
#: domain; Cartesian variables dodge the coordinate hyperplanes.
DEFAULT_RADIAL_INTERVALS = ((0.05, 1.45),)
DEFAULT_CARTESIAN_INTERVALS = ((-2.0, -0.1), (0.1, 2.0))


@dataclass(frozen=True)
class ZeroTestConfig:
    """Sampling policy for the probabilistic tier of the zero test."""

    samples: int = 64
    tolerance: float = 1e-9
    seed: int = DEFAULT_SEED
    intervals: Mapping[str, tuple] = field(
        default_factory=lambda: {"r": DEFAULT_RADIAL_INTERVALS})
    default_intervals: tuple = DEFAULT_CARTESIAN_INTERVALS

    def __post_init__(self):
        if self.samples <= 0:
            raise ValueError("samples must be positive")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        for name, intervals in list(self.intervals.items()) + [("", self.default_intervals)]:
            for lo, hi in intervals:
                if not hi > lo:
                    raise ValueError(f"empty sampling interval for {name or 'default'!r}")

    def intervals_for(self, var: str) -> tuple:
        return tuple(self.intervals.get(var, self.default_intervals))


PROVEN_ZERO = "ProvenZero"
NUMERICALLY_ZERO = "NumericallyZero"
NON_ZERO = "NonZero"


@dataclass(frozen=True)
class ZeroVerdict:
    """Outcome of a zero test.

    ProvenZero: exact rational canonicalization produced the zero polynomial.
    NumericallyZero: every sampled value stayed within tolerance.
    NonZero: carries a witness assignment whose value exceeds tolerance.
    """

    kind: str
    witness: Optional[Mapping[str, float]] = None
    value: Optional[float] = None
    max_abs: Optional[float] = None
    samples: Optional[int] = None

    @property
    def is_zero(self) -> bool:
        return self.kind in (PROVEN_ZERO, NUMERICALLY_ZERO)

    def residual_magnitude(self) -> float:
        if self.kind == PROVEN_ZERO:
            return 0.0
        if self.kind == NUMERICALLY_ZERO:
            return self.max_abs or 0.0
        return abs(self.value) if self.value is not None else math.inf

    def __str__(self) -> str:
        if self.kind == PROVEN_ZERO:
            return "ProvenZero"
        if self.kind == NUMERICALLY_ZERO:
            return f"NumericallyZero(max|residual|={self.max_abs:.3e}, samples={self.samples})"
        points = ", ".join(f"{k}={v:.6g}" for k, v in sorted(self.witness.items()))
        return f"NonZero(value={self.value:.6g} at {{{points}}})"


def is_zero(e: Expr, cfg: Optional[ZeroTestConfig] = None) -> ZeroVerdict:
    """Two-tier zero test.

    Expressions built solely from +, -, *, / and integer powers are
    canonicalized to a single quotient with expanded polynomial numerator;
    a zero numerator is a proof.  Everything else (and canonically nonzero
    rational functions) falls back to seeded sampling.
    """
    cfg = cfg or ZeroTestConfig()
    e = simplify(e)
    rational = _to_poly_quotient(e)
    if rational is not None:
        num, den = rational
        if not num and den:
            return ZeroVerdict(PROVEN_ZERO)
    return _sampled_zero_test(e, cfg)


def _sampled_zero_test(e: Expr, cfg: ZeroTestConfig) -> ZeroVerdict:
    rng = random.Random(cfg.seed)
    variables = sorted(e._vars)
    max_abs = 0.0
    valid = 0
    for _ in range(cfg.samples):
        assignment = {v: _draw(rng, cfg.intervals_for(v)) for v in variables}
        try:
            value = evaluate(e, assignment)
        except DomainError:
            continue
        valid += 1
        if abs(value) > cfg.tolerance:
            return ZeroVerdict(NON_ZERO, witness=assignment, value=value)
        max_abs = max(max_abs, abs(value))
        if not variables:
            break  # closed expression: one evaluation decides
    if valid == 0:
        raise AllSamplesSingular(f"all {cfg.samples} samples singular for {e}")
    return ZeroVerdict(NUMERICALLY_ZERO, max_abs=max_abs, samples=valid)


def _draw(rng: random.Random, intervals: tuple) -> float:
    lengths = [hi - lo for lo, hi in intervals]
    total = sum(lengths)
    u = rng.uniform(0.0, total)
    for (lo, hi), length in zip(intervals, lengths):
        if u <= length:
            return lo + u
        u -= length
    lo, hi = intervals[-1]
    return hi


def draw_assignment(rng: random.Random, variables: Sequence[str],
                    cfg: "ZeroTestConfig") -> dict:
    """One random sample point under the config's per-variable intervals."""
    return {v: _draw(rng, cfg.intervals_for(v)) for v in sorted(variables)}


# --- exact tier: multivariate rational-function canonicalization -----------
#
# Polynomials are dicts {monomial: Fraction} with monomial a sorted tuple of
# (variable, positive exponent) pairs; pi is treated as an extra transcendent
# variable, which keeps the zero-numerator test sound.

_PI_NAME = "pi"

Poly = dict


def _p_const(c: Fraction) -> Poly:
    return {(): c} if c != 0 else {}


def _p_var(name: str) -> Poly:
    return {((name, 1),): Fraction(1)}


def _p_add(a: Poly, b: Poly) -> Poly:
    out = dict(a)
    for mono, coeff in b.items():
        new = out.get(mono, Fraction(0)) + coeff
        if new == 0:
            out.pop(mono, None)
        else:
            out[mono] = new
    return out


def _p_neg(a: Poly) -> Poly:
    return {m: -c for m, c in a.items()}


def _mono_mul(m1: tuple, m2: tuple) -> tuple:
    exps: dict = {}
    for var, exp in m1 + m2:
        exps[var] = exps.get(var, 0) + exp
    return tuple(sorted(exps.items()))


def _p_mul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            mono = _mono_mul(m1, m2)
            new = out.get(mono, Fraction(0)) + c1 * c2
            if new == 0:
                out.pop(mono, None)
            else:
                out[mono] = new
    return out


def _p_pow(a: Poly, n: int) -> Poly:
    out = _p_const(Fraction(1))
    base = a
    while n:
        if n & 1:
            out = _p_mul(out, base)
        base_next = _p_mul(base, base) if n > 1 else base
        base = base_next
        n >>= 1
    return out


def _to_poly_quotient(e: Expr) -> Optional[tuple]:
    """(numerator, denominator) polynomials, or None when ineligible."""
    if isinstance(e, Const):
        return _p_const(e.value), _p_const(Fraction(1))
    if isinstance(e, NamedPi):
        return _p_var(_PI_NAME), _p_const(Fraction(1))
    if isinstance(e, Var):
        return _p_var(e.name), _p_const(Fraction(1))
    if isinstance(e, Neg):
        inner = _to_poly_quotient(e.operand)
        if inner is None:
            return None
        return _p_neg(inner[0]), inner[1]
    if isinstance(e, Sum):
        num, den = _p_const(Fraction(0)), _p_const(Fraction(1))
        for t in e.terms:
            part = _to_poly_quotient(t)
            if part is None:
                return None
            tn, td = part
            num = _p_add(_p_mul(num, td), _p_mul(tn, den))
            den = _p_mul(den, td)
        return num, den
    if isinstance(e, Prod):
        num, den = _p_const(Fraction(1)), _p_const(Fraction(1))
        for f in e.factors:
            part = _to_poly_quotient(f)
            if part is None:
                return None
            num = _p_mul(num, part[0])
            den = _p_mul(den, part[1])
        return num, den
    if isinstance(e, Quot):
        n = _to_poly_quotient(e.num)
        d = _to_poly_quotient(e.den)
        if n is None or d is None:
            return None
        return _p_mul(n[0], d[1]), _p_mul(n[1], d[0])
    if isinstance(e, Pow):
        if e.exponent.denominator != 1:
            return None
        inner = _to_poly_quotient(e.base)
        if inner is None:
            return None
        n = e.exponent.numerator
        if n >= 0:
            return _p_pow(inner[0], n), _p_pow(inner[1], n)
        return _p_pow(inner[1], -n), _p_pow(inner[0], -n)
    return None


def clear_caches() -> None:
    """Drop the simplify/differentiate memo tables (mostly for tests)."""
    _simplify_cache.clear()
    _diff_cache.clear()
