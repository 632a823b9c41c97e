"""Laplacian operators: examples plus the algebraic invariants."""
import math
import random
from fractions import Fraction

import pytest

from polyharmonic import (Const, ForeignVariable, Model, SemiEuclidean,
                          SeparatedFunction, Var, ZeroTestConfig,
                          cartesian_laplacian, catalog, config_for_geometry,
                          euler_pairing, evaluate, is_zero,
                          iterated_laplacian, laplacian_product_rule, parse,
                          pq_gradient, radial_laplacian, separated_laplacian,
                          simplify, substitute, tension,
                          warped_radial_laplacian)
from polyharmonic.expr import PROVEN_ZERO, Pow, Prod, Sum

from helpers import random_polynomial, random_radial_smooth

CFG = ZeroTestConfig()
R = Var("r")


def zero_diff(a, b, cfg=CFG):
    return is_zero(simplify(Sum((a, Prod((Const(-1), b))))), cfg)


# ---------------------------------------------------------------------------
# radial_laplacian / tension
# ---------------------------------------------------------------------------

def test_radial_flat_square():
    assert radial_laplacian(parse("r^2"), catalog("euclidean", 3)) == Const(6)


def test_radial_constant():
    assert radial_laplacian(Const(7), catalog("euclidean", 3)) == Const(0)


def test_radial_sinh_m2_against_fd():
    g = Model(parse("sinh(r)"), 2)
    got = radial_laplacian(parse("r^2"), g)
    for rv in (0.5, 1.0, 1.5):
        want = 2 + 2 * rv / math.tanh(rv)
        assert evaluate(got, {"r": rv}) == pytest.approx(want, rel=1e-12)


def test_tension_is_radial_laplacian():
    g = catalog("euclidean", 4)
    f = parse("r^3 + sin(r)")
    assert tension(f, g) == radial_laplacian(f, g)


def test_tension_of_quadratic_is_constant():
    for m in (2, 3, 4, 5):
        g = catalog("euclidean", m)
        assert tension(parse("r^2"), g) == Const(2 * m)
        # c1 r^2 + c2 has constant tension 2 m c1
        assert tension(parse("3*r^2 + 5"), g) == Const(6 * m)


def test_tension_of_radial_harmonic_vanishes():
    from polyharmonic import radial_harmonic
    g = catalog("euclidean", 3)
    f = radial_harmonic(g, 2)
    assert is_zero(tension(f, g), CFG).is_zero


# ---------------------------------------------------------------------------
# warped_radial_laplacian
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("p", [2, 3, 4, 5])
@pytest.mark.parametrize("q", [2, 3, 4, 5])
def test_warped_distance_laplacian_formula(p, q):
    g = catalog("spherical-join", p, q)
    got = warped_radial_laplacian(R, g)
    expected = parse(f"({p} - 1)*cot(r) - ({q} - 1)*tan(r)")
    assert zero_diff(got, expected, config_for_geometry(g, CFG)).is_zero


def test_warped_distance_laplacian_double_angle():
    g = catalog("spherical-join", 3, 3)
    got = warped_radial_laplacian(R, g)
    assert zero_diff(got, parse("4*cot(2*r)"),
                     config_for_geometry(g, CFG)).is_zero


def test_warped_constant():
    g = catalog("hyperbolic-join", 3, 3)
    assert warped_radial_laplacian(Const(5), g) == Const(0)


# ---------------------------------------------------------------------------
# separated_laplacian
# ---------------------------------------------------------------------------

def test_separated_zero_eigenvalues_match_warped():
    g = catalog("spherical-join", 3, 3)
    f = parse("r^3 + r")
    sf = SeparatedFunction(f, 0, 0)
    assert zero_diff(separated_laplacian(sf, g),
                     warped_radial_laplacian(f, g)).is_zero


def test_separated_counterexample_solution():
    g = catalog("spherical-join", 3, 3)
    sf = SeparatedFunction(parse("(4*r - sin(4*r))/sin(2*r)^2"), -2, -2,
                           sphere_spectral=True)
    import dataclasses
    cfg = dataclasses.replace(CFG, intervals={"r": ((0.05, math.pi / 2 - 0.05),)})
    verdict = is_zero(separated_laplacian(sf, g), cfg)
    assert verdict.is_zero


def test_separated_eigenvalue_term_only():
    g = catalog("spherical-join", 3, 3)
    sf = SeparatedFunction(Const(1), -2, 0)
    got = separated_laplacian(sf, g)
    assert zero_diff(got, parse("-2/sin(r)^2"),
                     config_for_geometry(g, CFG)).is_zero


def test_separated_eigenvalue_validation():
    SeparatedFunction(R, -2, -6, sphere_spectral=True)     # k = 1, 2
    with pytest.raises(ValueError):
        SeparatedFunction(R, -3, 0, sphere_spectral=True)  # -3 is not -k(k+1)
    with pytest.raises(ValueError):
        SeparatedFunction(R, 1, 0)                          # positive


# ---------------------------------------------------------------------------
# cartesian_laplacian
# ---------------------------------------------------------------------------

def test_cartesian_harmonic_quotient():
    g = SemiEuclidean(2, 0)
    verdict = is_zero(cartesian_laplacian(parse("x1/(x1^2 + x2^2)"), g), CFG)
    assert verdict.kind == PROVEN_ZERO


def test_cartesian_signature_example():
    g = SemiEuclidean(1, 1)
    assert cartesian_laplacian(parse("-(x1^2 + y1^2)"), g) == Const(0)


def test_cartesian_laplacian_of_H():
    for p, q in ((2, 0), (1, 1), (2, 1), (3, 0)):
        g = SemiEuclidean(p, q)
        h_terms = " + ".join(f"x{i}^2" for i in range(1, p + 1))
        if q:
            h_terms += " - " + " - ".join(f"y{j}^2" for j in range(1, q + 1))
        assert cartesian_laplacian(parse(h_terms), g) == Const(2 * (p + q))


def test_cartesian_foreign_variable():
    with pytest.raises(ForeignVariable):
        cartesian_laplacian(parse("x1 + z"), SemiEuclidean(2, 0))


# ---------------------------------------------------------------------------
# iterated_laplacian
# ---------------------------------------------------------------------------

def test_iterated_join33_distance_biharmonic():
    g = catalog("spherical-join", 3, 3)
    verdict = is_zero(iterated_laplacian(R, g, 2), config_for_geometry(g, CFG))
    assert verdict.is_zero


def test_iterated_join23_residual_value():
    g = catalog("spherical-join", 2, 3)
    got = iterated_laplacian(R, g, 2)
    # -(p-3)(p-1) cot r csc^2 r + (q-3)(q-1) tan r sec^2 r at p=2, q=3
    assert zero_diff(got, parse("cot(r)*csc(r)^2"),
                     config_for_geometry(g, CFG)).is_zero


def test_iterated_order_zero_is_identity():
    f = parse("sin(r) + r^2")
    assert iterated_laplacian(f, catalog("euclidean", 3), 0) == simplify(f)


def test_iterated_rejects_negative_order():
    with pytest.raises(ValueError):
        iterated_laplacian(R, catalog("euclidean", 3), -1)


def test_composition_invariant():
    rng = random.Random(5150)
    geoms = [catalog("euclidean", 3), catalog("spherical-join", 3, 3)]
    for g in geoms:
        cfg = config_for_geometry(g, CFG)
        for _ in range(3):
            f = random_radial_smooth(rng)
            for a in (1, 2):
                for b in (1, 2):
                    whole = iterated_laplacian(f, g, a + b)
                    steps = iterated_laplacian(iterated_laplacian(f, g, a), g, b)
                    assert zero_diff(whole, steps, cfg).is_zero, (str(f), a, b)


def test_iterated_separated_reapplies_eigenvalue_term():
    g = catalog("spherical-join", 3, 3)
    sf = SeparatedFunction(R, -2, -2)
    once = separated_laplacian(sf, g)
    twice = separated_laplacian(SeparatedFunction(once, -2, -2), g)
    assert zero_diff(iterated_laplacian(sf, g, 2), twice).is_zero


# ---------------------------------------------------------------------------
# laplacian_product_rule
# ---------------------------------------------------------------------------

def test_product_rule_flat_squares():
    g = catalog("euclidean", 3)
    got = laplacian_product_rule(R, R, g)
    assert got == radial_laplacian(parse("r^2"), g) == Const(6)


def test_product_rule_constant_factor():
    g = catalog("hyperbolic", 3)
    f = parse("r^2 + sin(r)")
    assert zero_diff(laplacian_product_rule(Const(1), f, g),
                     radial_laplacian(f, g)).is_zero


def test_product_rule_signature_cross_term():
    g = SemiEuclidean(1, 1)
    got = laplacian_product_rule(parse("x1"), parse("y1"), g)
    assert got == Const(0)
    assert cartesian_laplacian(parse("x1*y1"), g) == Const(0)


def test_product_rule_invariant_radial():
    rng = random.Random(8080)
    for g in (catalog("euclidean", 3), Model(parse("sinh(r)"), 2),
              catalog("spherical-join", 3, 3)):
        cfg = config_for_geometry(g, CFG)
        lap = radial_laplacian if isinstance(g, Model) else warped_radial_laplacian
        count = 0
        while count < 50:
            f1 = random_radial_smooth(rng)
            f2 = random_radial_smooth(rng)
            lhs = lap(simplify(Prod((f1, f2))), g)
            rhs = laplacian_product_rule(f1, f2, g)
            assert zero_diff(lhs, rhs, cfg).is_zero, (str(f1), str(f2))
            count += 1


def test_product_rule_invariant_semieuclidean():
    rng = random.Random(9090)
    g = SemiEuclidean(2, 1)
    count = 0
    while count < 50:
        f1 = random_polynomial(rng, g.coordinates, max_degree=3)
        f2 = random_polynomial(rng, g.coordinates, max_degree=3)
        lhs = cartesian_laplacian(simplify(Prod((f1, f2))), g)
        rhs = laplacian_product_rule(f1, f2, g)
        verdict = zero_diff(lhs, rhs)
        assert verdict.kind == PROVEN_ZERO, (str(f1), str(f2))
        count += 1


def test_linearity_invariant():
    rng = random.Random(4242)
    cases = [
        (catalog("euclidean", 3), lambda: random_radial_smooth(rng)),
        (catalog("spherical-join", 3, 3), lambda: random_radial_smooth(rng)),
        (SemiEuclidean(2, 1),
         lambda: random_polynomial(rng, ("x1", "x2", "y1"), max_degree=4)),
    ]
    for g, gen in cases:
        cfg = config_for_geometry(g, CFG)
        for _ in range(50):
            f1, f2 = gen(), gen()
            a = Const(Fraction(rng.randint(-3, 3)))
            b = Const(Fraction(rng.randint(-3, 3)))
            combo = simplify(Sum((Prod((a, f1)), Prod((b, f2)))))
            lhs = iterated_laplacian(combo, g, 1)
            rhs = simplify(Sum((Prod((a, iterated_laplacian(f1, g, 1))),
                                Prod((b, iterated_laplacian(f2, g, 1))))))
            assert zero_diff(lhs, rhs, cfg).is_zero


# ---------------------------------------------------------------------------
# flat consistency: radial operator vs Cartesian operator at matching radius
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("m", [2, 3, 4])
def test_flat_consistency(m):
    rng = random.Random(1000 + m)
    g_radial = Model(parse("r"), m)
    g_cart = SemiEuclidean(m, 0)
    radius_sq = " + ".join(f"x{i}^2" for i in range(1, m + 1))
    for _ in range(10):
        f = parse(f"{rng.randint(1, 3)}*r^2 + {rng.randint(1, 3)}*r^4")
        radial = radial_laplacian(f, g_radial)
        lifted = substitute(f, "r", parse(f"({radius_sq})^(1/2)"))
        cart = cartesian_laplacian(lifted, g_cart)
        direction = [rng.gauss(0, 1) for _ in range(m)]
        norm = math.sqrt(sum(d * d for d in direction))
        radius = rng.uniform(0.3, 1.8)
        point = {f"x{i + 1}": radius * d / norm for i, d in enumerate(direction)}
        want = evaluate(radial, {"r": radius})
        got = evaluate(cart, point)
        assert got == pytest.approx(want, rel=1e-6)


def test_degree_bound():
    rng = random.Random(2024)
    for g in (SemiEuclidean(2, 0), SemiEuclidean(1, 1), SemiEuclidean(2, 1)):
        for _ in range(10):
            p = random_polynomial(rng, g.coordinates, max_degree=6)
            s = 4  # 2s = 8 > 6 >= deg p
            verdict = is_zero(iterated_laplacian(p, g, s), CFG)
            assert verdict.kind == PROVEN_ZERO


# ---------------------------------------------------------------------------
# pq_gradient and euler_pairing
# ---------------------------------------------------------------------------

def test_gradient_of_H_is_2w():
    g = SemiEuclidean(2, 1)
    grad = pq_gradient(parse("x1^2 + x2^2 - y1^2"), g)
    assert [str(c) for c in grad] == ["2*x1", "2*x2", "2*y1"]


def test_gradient_of_constant():
    grad = pq_gradient(Const(3), SemiEuclidean(2, 2))
    assert all(c == Const(0) for c in grad)


def test_gradient_signature_sign():
    grad = pq_gradient(parse("x1*y1"), SemiEuclidean(1, 1))
    assert grad == (parse("y1"), simplify(parse("-x1")))


def test_euler_pairing_homogeneous():
    g = SemiEuclidean(1, 0)
    assert euler_pairing(parse("x1^3"), g) == simplify(parse("3*x1^3"))


def test_euler_pairing_all_plus_signs():
    g = SemiEuclidean(1, 1)
    got = euler_pairing(parse("x1*y1"), g)
    assert got == simplify(parse("2*x1*y1"))


def test_euler_pairing_constant():
    assert euler_pairing(Const(9), SemiEuclidean(2, 1)) == Const(0)


# ---------------------------------------------------------------------------
# first-order identity invariants on R^{p,q}
# ---------------------------------------------------------------------------

SIGNATURES = [SemiEuclidean(2, 0), SemiEuclidean(1, 1), SemiEuclidean(2, 1),
              SemiEuclidean(3, 0)]


def test_commutator_identity_first_order():
    rng = random.Random(41)
    count = 0
    while count < 50:
        g = SIGNATURES[count % len(SIGNATURES)]
        f = random_polynomial(rng, g.coordinates, max_degree=6)
        lhs = cartesian_laplacian(euler_pairing(f, g), g)
        lap = cartesian_laplacian(f, g)
        rhs = simplify(Sum((Prod((Const(2), lap)), euler_pairing(lap, g))))
        assert zero_diff(lhs, rhs).kind == PROVEN_ZERO
        count += 1


@pytest.mark.parametrize("s", [2, 3])
def test_commutator_identity_iterated(s):
    rng = random.Random(42 + s)
    for g in SIGNATURES:
        for _ in range(6):
            f = random_polynomial(rng, g.coordinates, max_degree=6)
            lhs = iterated_laplacian(euler_pairing(f, g), g, s)
            lap_s = iterated_laplacian(f, g, s)
            rhs = simplify(Sum((Prod((Const(2 * s), lap_s)),
                                euler_pairing(lap_s, g))))
            assert zero_diff(lhs, rhs).kind == PROVEN_ZERO
