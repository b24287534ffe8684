"""Symmetric-function inequalities, curvature pinching and self-similar
solutions of fully nonlinear curvature flows, with numerical checks on
hypersurfaces of revolution."""

from .errors import ConstraintError, DomainError, GeometryError, NumericalError
from .symfun import (
    CurvatureSpectrum,
    cone_membership,
    sigma,
    sigma_all,
    sigma_gradient,
    sigma_hessian,
    sigma_omit1,
    sigma_omit2,
    sigma_restricted,
)
from .ineq import corollary23_value, interlace, lemma21_k2_oracle, lemma21_value
from .pinch import (
    CertificateParams,
    PinchingReport,
    Theta_constant,
    certify_quadratic_inequality,
    check_condition,
    check_section5_ratios,
    condition_ratio,
    delta_constant,
    theta_constant,
)
from .shrinker import (
    GradientTensor,
    SigmaPower,
    SigmaRatio,
    SigmaSum,
    SpeedFunction,
    TestFunction,
    parse_speed,
    sphere_radius,
    term1_general,
    term2_general,
)
from .geom import ProfileCurve, curvatures_of_revolution, minkowski_residual, shrinker_residual
from .flow import FlowOptions, FlowState, run, run_normalized, selfsimilar_rescale_check, step

__version__ = "0.1.0"
