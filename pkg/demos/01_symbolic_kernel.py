"""Tour of the expression kernel: parse, differentiate, simplify, test zero.

Run with:  python demos/01_symbolic_kernel.py
"""
import math

from polyharmonic import (ZeroTestConfig, differentiate, evaluate, is_zero,
                          parse, simplify, substitute, to_string)

# Expressions are exact immutable trees; constants are stored as rationals.
f = parse("(4*r - sin(4*r)) / sin(2*r)^2")
print("parsed       :", to_string(f))
print("at r = pi/4  :", evaluate(f, {"r": math.pi / 4}), "(exactly pi in the limit)")

# Differentiation is exact; simplification collects like terms and merges
# powers but deliberately applies no trigonometric identities.
df = differentiate(f, "r")
print("d/dr         :", to_string(df))

g = simplify(parse("0*sin(r) + x^2/x + 2*3"))
print("simplified   :", to_string(g), "   (0*sin r dropped, x^2/x -> x, 2*3 folded)")

# Equality of transcendental forms is the zero test's job, not the
# simplifier's.  Rational functions get an exact proof; anything else is
# sampled with a seeded, reproducible configuration.
cfg = ZeroTestConfig()
print()
print("2cot r - 2tan r = 4cot 2r ?",
      is_zero(parse("2*cot(r) - 2*tan(r) - 4*cot(2*r)"), cfg))
print("x*y - y*x = 0 ?            ",
      is_zero(parse("x*y - y*x"), cfg))
print("x/(x^2+y^2) harmonic?      ")
lap = simplify(
    differentiate(differentiate(parse("x/(x^2+y^2)"), "x"), "x")
    + differentiate(differentiate(parse("x/(x^2+y^2)"), "y"), "y"))
print("  Laplacian zero test      :", is_zero(lap, cfg))

# A genuinely nonzero expression comes back with a concrete witness point.
residual = parse("64*cot(2*r)*csc(2*r)^4*(sin(4*r) - 4*r)")
print("counterexample residual    :", is_zero(residual, cfg))

# Substitution is plain capture-free replacement.
print()
print("substitute r -> x + y      :",
      to_string(substitute(parse("sin(r)/r"), "r", parse("x + y"))))
