"""Planar piecewise-smooth flows near sewed (two-fold invisible-tangency) singularities."""

from .analysis import (
    CENTRE,
    CENTRE_FOCUS,
    STABLE_FOCUS,
    UNSTABLE_FOCUS,
    Classification,
    Timing,
    chi,
    classify,
    estimate_chi_order,
    harmonic_lower_bound_check,
    periodic_orbit_stability,
    sample_chi_profile,
    sign_propagation_check,
    time_to_origin,
)
from .eset import (
    CompactSymmetricSet,
    bump_psi,
    bump_psi_prime,
    decompose_gaps,
    distance_to_E0,
    f_E,
    f_E_prime,
    g_E,
)
from .fields import (
    FAMILIES,
    HalfField,
    PiecewiseSystem,
    ValidationReport,
    eval_field,
    from_spec,
    make_family,
    mirror_time_reversal,
    poly_system,
    validate_sewed_focus,
)
from .flow import (
    Crossing,
    CrossingSequence,
    CurveUnderflowError,
    FlowError,
    IntegralCurve,
    LeftWindowError,
    NoReturnError,
    StepUnderflowError,
    TangencyError,
    crossing_sequence,
    integral_curve,
    integrate_generic,
    sigma_minus,
    sigma_plus,
    trajectory_points,
)

__version__ = "0.1.0"
