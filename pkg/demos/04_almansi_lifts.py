"""Classification and the order-raising lift G = H F.

Run with:  python demos/04_almansi_lifts.py
"""
from polyharmonic import (SemiEuclidean, almansi_lift, almansi_tower, build_H,
                          catalog, classify, lemma43_check, parse,
                          properness_identity_check, radial_harmonic,
                          to_string)

# classify computes Delta^0 F ... Delta^s F and zero-tests every order.
euc = catalog("euclidean", 3)
print(classify(parse("r^2"), euc, 3))

# Multiplying an s-harmonic function by H = c1 |w|^2 + c2 raises the order
# by one on flat signature space; towers H^s F raise it by s.
plane = SemiEuclidean(2, 0)
print()
print("H on R^2                :", to_string(build_H(plane, 1, 0)))
lift = almansi_lift(parse("x1"), plane, 1, 0)
print("lift of x1              :", to_string(lift), "->",
      classify(lift, plane, 3).classification)
tower = almansi_tower(parse("x1"), plane, 2, 1, 0)
print("tower H^2 x1            :", to_string(tower), "->",
      classify(tower, plane, 4).classification)

# Properness can be lost for locally defined functions: H * (x1 / |w|^2)
# collapses to the coordinate x1, which is harmonic already.
quotient = parse("x1/(x1^2 + x2^2)")
lifted = almansi_lift(quotient, plane, 1, 0)
print("lift of x1/|w|^2        :", to_string(lifted), "->",
      classify(lifted, plane, 2).classification,
      "(biharmonic, but not properly)")

# Radial harmonics solve f^(m-1) F' = c; closed forms exist for the catalog
# profiles and the solutions back-substitute exactly.
print()
for name, dims in [("euclidean", (3,)), ("hyperbolic", (3,)),
                   ("spherical-join", (3, 3))]:
    g = catalog(name, *dims)
    print(f"radial harmonic on {name:15s}: {to_string(radial_harmonic(g, 1))}")

# On R^{p,q}, s-harmonic functions satisfy two exact identities used in the
# properness argument; the two constants are fitted numerically.
print()
f = almansi_lift(parse("x1"), plane, 1, 0)       # proper 2-harmonic
print("Delta^2(H Delta F) check:", lemma43_check(f, plane, 2))
print("properness identity     :", properness_identity_check(f, plane, 2))
