"""Expression kernel: parsing, printing, calculus, simplification, zero test."""
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyharmonic import (AllSamplesSingular, Const, DomainError, ParseError,
                          PI, UnboundVariable, Var, ZeroTestConfig,
                          differentiate, evaluate, is_zero, parse, simplify,
                          substitute, to_string)
from polyharmonic.expr import (Call, NON_ZERO, NUMERICALLY_ZERO, Pow,
                               PROVEN_ZERO, Prod, Quot, Sum)

from helpers import (assert_simplified_form, central_difference, evaluable_at,
                     random_expression, sample_point)

CFG = ZeroTestConfig()


# ---------------------------------------------------------------------------
# parse
# ---------------------------------------------------------------------------

def test_parse_call_product():
    assert parse("sin(2*r)") == Call("sin", Prod((Const(2), Var("r"))))


def test_parse_counterexample_quotient():
    tree = parse("(4*r - sin(4*r)) / sin(2*r)^2")
    assert isinstance(tree, Quot)
    assert isinstance(tree.num, Sum)
    assert tree.den == Pow(Call("sin", Prod((Const(2), Var("r")))), 2)


def test_parse_signature_quotient():
    tree = parse("x/(x^2 - y^2)")
    assert isinstance(tree, Quot)
    assert tree.num == Var("x")


@pytest.mark.parametrize("text,offset_ok", [
    ("sin(", True), ("foo(x)", True), ("1.2.3", True), ("x^1.5", True),
    ("x +* y", True), ("", True), ("2..5", True), ("x^(1/0)", True),
])
def test_parse_errors_carry_offset(text, offset_ok):
    with pytest.raises(ParseError) as err:
        parse(text)
    assert isinstance(err.value.offset, int) and err.value.offset >= 0


def test_unknown_function_name():
    with pytest.raises(ParseError, match="unknown function"):
        parse("gamma(x)")


ROUND_TRIP_CORPUS = [
    "sin(2*r)", "(4*r - sin(4*r)) / sin(2*r)^2", "x/(x^2 - y^2)", "-x^2",
    "a - b*c", "a*b/c*d", "a/b/c", "a/(b/c)", "x^-2", "x^(1/2)", "x^-(1/2)",
    "1.5", "2 - 3", "pi*r^2", "-(a+b)", "cot(r)", "exp(-x) + ln(y)",
    "a + -b/c", "x*-y", "--x", "64*cot(2*r)*csc(2*r)^4*(sin(4*r) - 4*r)",
    "c1*r^2 + c2", "1/0", "0.25*x1^3", "tanh(coth(sec(csc(t))))",
]


@pytest.mark.parametrize("text", ROUND_TRIP_CORPUS)
def test_round_trip_corpus(text):
    once = parse(text)
    assert parse(to_string(once)) == once


def test_round_trip_random_trees():
    rng = random.Random(1234)
    for _ in range(200):
        tree = random_expression(rng, ("x", "y", "r"), depth=4)
        text = to_string(tree)      # grammar-valid by construction
        once = parse(text)
        assert parse(to_string(once)) == once


# ---------------------------------------------------------------------------
# differentiate
# ---------------------------------------------------------------------------

def test_derivative_power_rule():
    assert differentiate(parse("r^2"), "r") == simplify(parse("2*r"))


def test_derivative_cot_matches_central_difference():
    d = differentiate(parse("cot(2*r)"), "r")
    for rv in (0.3, 0.7, 1.1):
        got = evaluate(d, {"r": rv})
        oracle = central_difference(parse("cot(2*r)"), "r", {"r": rv})
        assert got == pytest.approx(oracle, abs=1e-6)
        # independent closed form: -2 csc^2(2r)
        assert got == pytest.approx(-2.0 / math.sin(2 * rv) ** 2, rel=1e-12)


def test_derivative_quotient_matches_central_difference():
    e = parse("x/(x^2 + y^2)")
    d = differentiate(e, "x")
    for point in ({"x": 0.5, "y": 1.0}, {"x": -1.2, "y": 0.7}, {"x": 2.0, "y": -0.4}):
        assert evaluate(d, point) == pytest.approx(
            central_difference(e, "x", point), abs=1e-6)


def test_derivative_free_variable_is_zero():
    assert differentiate(parse("sin(y) + 3"), "x") == Const(0)


def test_derivative_invariant_200_random():
    """Central-difference agreement on 200 random expressions of depth <= 5."""
    rng = random.Random(20240811)
    checked = 0
    while checked < 200:
        e = random_expression(rng, ("x", "y"), depth=5)
        d = differentiate(e, "x")
        point = None
        for _ in range(25):
            candidate = sample_point(rng, ("x", "y"))
            if evaluable_at(e, candidate) is None:
                continue
            value = evaluable_at(d, candidate, bound=1e3)
            if value is None:
                continue
            # central differences also need the neighbourhood
            try:
                oracle = central_difference(e, "x", candidate)
            except DomainError:
                continue
            point, got = candidate, value
            break
        if point is None:
            continue
        assert abs(got - oracle) <= 1e-5 * (1 + abs(got)), (to_string(e), point)
        checked += 1
    assert checked == 200


# ---------------------------------------------------------------------------
# simplify
# ---------------------------------------------------------------------------

def test_simplify_drops_zero_products():
    assert simplify(parse("0*sin(r) + r")) == Var("r")


def test_simplify_power_cancellation():
    assert simplify(parse("x^2/x")) == Var("x")


def test_simplify_cot_tan_equals_double_angle_by_sampling():
    diff = simplify(parse("2*cot(r) - 2*tan(r) - 4*cot(2*r)"))
    verdict = is_zero(diff, CFG)
    assert verdict.kind == NUMERICALLY_ZERO


def test_simplify_constant_folding():
    assert simplify(parse("2*3 + 4/2")) == Const(8)
    assert simplify(parse("4^(1/2)")) == Const(2)
    assert simplify(parse("(-8)^(1/3)")) == Const(-2)


def test_simplify_like_terms_cancel():
    assert simplify(parse("x*y - y*x")) == Const(0)
    assert simplify(parse("(x+y) - (y+x)")) == Const(0)
    assert simplify(parse("2*x/y - 2*(x/y)")) == Const(0)


def test_simplified_form_invariants():
    rng = random.Random(77)
    corpus = [parse(t) for t in ROUND_TRIP_CORPUS if t != "1/0"]
    corpus += [random_expression(rng, ("x", "y", "r"), depth=5)
               for _ in range(100)]
    for e in corpus:
        assert_simplified_form(simplify(e))


def test_simplify_idempotent():
    rng = random.Random(78)
    for _ in range(100):
        s = simplify(random_expression(rng, ("x", "y"), depth=5))
        assert simplify(s) == s


def test_simplify_soundness_200_random():
    """Value preservation at 16 random points per expression."""
    rng = random.Random(31415)
    checked = 0
    while checked < 200:
        e = random_expression(rng, ("x", "y"), depth=5)
        s = simplify(e)
        compared = 0
        for _ in range(16):
            point = sample_point(rng, ("x", "y"), low=-1.8, high=1.8)
            before = evaluable_at(e, point, bound=1e8)
            after = evaluable_at(s, point, bound=1e10)
            if before is None or after is None:
                continue
            assert abs(before - after) <= 1e-10 * (1 + abs(before)), \
                (to_string(e), to_string(s), point)
            compared += 1
        if compared:
            checked += 1
    assert checked == 200


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------

def test_evaluate_square():
    assert evaluate(parse("r^2"), {"r": 3.0}) == 9.0


def test_evaluate_counterexample_at_quarter_pi():
    value = evaluate(parse("(4*r - sin(4*r))/sin(2*r)^2"), {"r": math.pi / 4})
    assert value == pytest.approx(math.pi, abs=1e-9)


def test_evaluate_cot_pole():
    with pytest.raises(DomainError):
        evaluate(parse("cot(r)"), {"r": 0.0})


def test_evaluate_division_pole_threshold():
    with pytest.raises(DomainError):
        evaluate(parse("1/x"), {"x": 1e-15})
    assert evaluate(parse("1/x"), {"x": 1e-13}) == pytest.approx(1e13)


def test_evaluate_ln_domain():
    with pytest.raises(DomainError):
        evaluate(parse("ln(x)"), {"x": -1.0})
    with pytest.raises(DomainError):
        evaluate(parse("ln(x)"), {"x": 0.0})


def test_evaluate_unbound_variable():
    with pytest.raises(UnboundVariable):
        evaluate(parse("x + y"), {"x": 1.0})


def test_evaluate_pi():
    assert evaluate(PI, {}) == math.pi


# ---------------------------------------------------------------------------
# substitute
# ---------------------------------------------------------------------------

def test_substitute_square():
    assert substitute(parse("r^2"), "r", parse("2*r")) == parse("(2*r)^2")


def test_substitute_absent_variable():
    e = parse("sin(x) + 1")
    assert substitute(e, "q", parse("y")) is e


def test_substitute_into_quotient():
    got = substitute(parse("sin(r)/r"), "r", parse("x+y"))
    assert got == parse("sin(x+y)/(x+y)")


# ---------------------------------------------------------------------------
# is_zero
# ---------------------------------------------------------------------------

def test_is_zero_harmonic_quotient_proven():
    f = parse("x/(x^2 + y^2)")
    lap = simplify(Sum((differentiate(differentiate(f, "x"), "x"),
                        differentiate(differentiate(f, "y"), "y"))))
    assert is_zero(lap, CFG).kind == PROVEN_ZERO


def test_is_zero_counterexample_residual_nonzero():
    e = parse("64*cot(2*r)*csc(2*r)^4*(sin(4*r) - 4*r)")
    verdict = is_zero(e, CFG)
    assert verdict.kind == NON_ZERO
    assert abs(evaluate(e, verdict.witness)) > CFG.tolerance
    assert verdict.value == pytest.approx(evaluate(e, verdict.witness))


def test_is_zero_pythagorean_sampled():
    verdict = is_zero(parse("sin(r)^2 + cos(r)^2 - 1"), CFG)
    assert verdict.kind == NUMERICALLY_ZERO
    assert verdict.samples == CFG.samples
    assert verdict.max_abs <= CFG.tolerance


def test_is_zero_all_samples_singular():
    with pytest.raises(AllSamplesSingular):
        is_zero(parse("ln(-1 - x^2)"), CFG)


def test_is_zero_pi_is_transcendental_for_polynomials():
    # pi - 355/113 is a nonzero rational-function expression
    verdict = is_zero(parse("pi - 355/113"), CFG)
    assert verdict.kind == NON_ZERO


KNOWN_NONZERO = (
    ["x", "x + 1", "x - y", "x*y + 1", "x^2 - y", "pi", "pi*x", "2",
     "x^3 - x + 1", "1/x", "(x+1)/(x-3)", "x^2/(y^2+1)"]
    + [f"x^{k} - {k}" for k in range(1, 11)]
    + [f"{k} + x*y" for k in range(1, 11)]
    + [f"sin({k}*r)" for k in range(1, 6)]
    + [f"cot({k}*r) + r" for k in range(1, 6)]
    + ["exp(x)", "ln(x+3)", "cosh(x)", "tanh(x) - 2", "sec(r)", "csc(r)",
     "sin(r) + 2", "cos(r)*x"]
)


def test_is_zero_never_proves_known_nonzero():
    assert len(KNOWN_NONZERO) >= 50
    for text in KNOWN_NONZERO:
        verdict = is_zero(parse(text), CFG)
        assert verdict.kind == NON_ZERO, text


def test_zero_config_validation():
    with pytest.raises(ValueError):
        ZeroTestConfig(samples=0)
    with pytest.raises(ValueError):
        ZeroTestConfig(tolerance=-1.0)
    with pytest.raises(ValueError):
        ZeroTestConfig(intervals={"r": ((2.0, 1.0),)})


# ---------------------------------------------------------------------------
# hypothesis properties
# ---------------------------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 31 - 1))
def test_print_parse_round_trip_property(seed):
    rng = random.Random(seed)
    tree = random_expression(rng, ("x", "y", "r"), depth=4)
    once = parse(to_string(tree))
    assert parse(to_string(once)) == once


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=-1000, max_value=1000),
       st.integers(min_value=1, max_value=1000))
def test_constants_survive_exactly(num, den):
    c = Fraction(num, den)
    text = to_string(Const(c))
    assert simplify(parse(text)) == Const(c)
