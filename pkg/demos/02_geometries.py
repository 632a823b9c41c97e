"""The three geometry families and their validation machinery.

Run with:  python demos/02_geometries.py
"""
from polyharmonic import (Model, catalog, check_pole_smoothness, parse,
                          radial_curvature, to_string, validate_model)

# The catalog covers the standard profiles.  A model is a rotationally
# symmetric metric f(r)^2 g_{S^{m-1}} + dr^2 with a pole at r = 0.
for name, dims in [("euclidean", (3,)), ("hyperbolic", (3,)), ("sphere", (3,)),
                   ("spherical-join", (3, 3)), ("hyperbolic-join", (3, 3)),
                   ("cylinder", (2, 3)), ("semi-euclidean", (2, 1))]:
    g = catalog(name, *dims)
    print(f"{name:16s} -> {g.describe()}")

# Model profiles must vanish at the pole with unit slope and have vanishing
# even derivatives; the sphere additionally satisfies the mirrored
# conditions at the far pole.
print()
print("validate sphere(3):")
print(validate_model(catalog("sphere", 3)))

print()
print("f = r^2 is not a valid profile:")
report = validate_model(Model(parse("r^2"), 3))
for c in report.failures():
    print(" ", c)

# Radial functions extend smoothly across the pole only when their odd
# derivatives vanish there: r^2 does, r does not.
print()
print("pole smoothness of r^2:", check_pole_smoothness(parse("r^2")).passed)
print("pole smoothness of r  :", check_pole_smoothness(parse("r")).passed)

# The radial curvature comes out of the Jacobi equation f'' + K f = 0.
print()
for name in ("euclidean", "sphere", "hyperbolic"):
    g = catalog(name, 3)
    print(f"radial curvature of {name}(3):", to_string(radial_curvature(g)))
