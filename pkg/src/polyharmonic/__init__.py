"""Symbolic and numerical toolkit for iterated Laplace-Beltrami operators,
polyharmonic function classification and Almansi-type lifts on rotationally
symmetric models, doubly warped products and semi-Euclidean space."""

__version__ = "0.1.0"

from .expr import (AllSamplesSingular, Const, DomainError, Expr, ParseError,
                   PI, UnboundVariable, Var, ZeroTestConfig, ZeroVerdict,
                   differentiate, evaluate, free_variables, is_zero,
                   node_count, parse, simplify, substitute, to_string)
from .geometry import (Geometry, GeometrySpecError, Model, SemiEuclidean,
                       ValidationReport, WarpedProduct, catalog,
                       check_pole_smoothness, load_geometry_file,
                       parse_geometry_spec, radial_curvature, validate_model)
from .operators import (ExpressionBlowup, ForeignVariable, SeparatedFunction,
                        cartesian_laplacian, euler_pairing, iterated_laplacian,
                        laplacian_orders, laplacian_product_rule, pq_gradient,
                        radial_laplacian, separated_laplacian, tension,
                        warped_radial_laplacian)
from .almansi import (Classification, FitDegenerate, HarmonicityReport,
                      HARMONIC_CORPUS, PreconditionViolated, ProbeReport,
                      ZeroLeadingCoefficient, almansi_lift, almansi_tower,
                      build_H, classify, config_for_geometry, conjecture_probe,
                      lemma43_check, properness_identity_check,
                      radial_harmonic, weak_almansi_probe)
from .oracle import (FDConfig, OutOfDomain, QuadratureFailure, StencilSingular,
                     cross_check, fd_cartesian_laplacian, fd_radial_laplacian,
                     quadrature)
from .verify import CheckRecord, run_suite, suite_passed

__all__ = [name for name in dir() if not name.startswith("_")]
