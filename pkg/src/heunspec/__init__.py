"""Spectral polynomials of the Heun equation and their limiting root geometry.

A small numerical laboratory: build the tridiagonal matrix whose determinant
roots are the admissible linear coefficients of the polynomial-solution
problem, find those roots, construct the averaged arcsine measures and their
ellipses, verify the transform ODE and the balayage identities, and trace the
limiting root tree.
"""

from .cubics import (
    ConvexHull,
    CubicConfig,
    DuplicateRoot,
    LowDegreePoly,
    ShiftedCubic,
    convex_hull,
    cubic_from_roots,
    hull_distance,
    in_hull_neighborhood,
    lame_derivative_poly,
    shift_to_root,
)
from .geometry import (
    ComplexSegment,
    DegenerateEllipse,
    EllipseGeometry,
    LimitProfile,
    ZeroW,
    ellipse_form_residual,
    ellipse_geometry,
    gamma_param,
    is_strictly_outside,
    segment_at,
    segment_direction,
)
from .quadrature import QuadratureNonConvergence, QuadratureRule, agm_elliptic_k
from .roottree import (
    BranchJump,
    LeftHull,
    Mismatch,
    PeriodIntegral,
    RootTree,
    TracedCurve,
    assemble_tree,
    build_tree,
    distance_to_tree,
    indicator,
    indicator_gradient,
    period_integral,
    trace_curve,
    trace_tree_curves,
)
from .spectral import (
    AtomHit,
    DegenerateTheta,
    EmpiricalMeasure,
    NullSpaceFailure,
    PolynomialSolution,
    RootFindingFailure,
    ScaledValue,
    SpectralMatrix,
    build_matrix,
    cauchy_transform_empirical,
    coefficient_limit_deviation,
    log_potential_empirical,
    operator_residual,
    recover_solution,
    sp_eval,
    spectral_roots,
    theta_n,
)
from .transforms import (
    DivergentIntegral,
    OnOrInsideSupport,
    OnSupport,
    PointInsideEllipse,
    ResonantCubic,
    SpecialCaseVars,
    StepSizeUnderflow,
    TransformSample,
    cauchy_arcsine,
    cauchy_averaged,
    cauchy_averaged_derivatives,
    check_general_relations,
    check_special_relations,
    compare_transforms,
    heun_ode_residual,
    log_potential_averaged,
    moment_general,
    moment_special,
    solve_special_ode,
    special_der1_residual,
    special_ode_residual,
    special_vars,
    transform_sample,
    y1_homogeneous_check,
    y1_value,
)

__version__ = "0.1.0"
