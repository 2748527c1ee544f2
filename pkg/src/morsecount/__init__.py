"""Morse-theoretic solution counting for prescribed scalar curvature on spheres.

Exact blow-up index tables and multiplicity bounds from co-index parities, plus
a numerical lab for the variational side: analytic curvature candidates, bubble
energies, reduced gradient flows, and finite-difference Morse indices.
"""
from .bubbles import (
    Bubble,
    BubbleSum,
    FlowOptions,
    FlowReport,
    JEvaluation,
    MorseIndexEstimate,
    QuadratureNoiseWarning,
    I_from_J,
    canonical_bubble,
    constant_one,
    equilibrium_scale,
    eval_bubble,
    eval_bubble_sum,
    flow_to_critical,
    functional_J,
    functional_J_detailed,
    norm_squared,
    reduced_gradient,
    reduced_morse_index,
    sobolev_constant,
    weighted_power_integral,
)
from .indexcount import (
    ConsistencyError,
    H3Warning,
    IndexTable,
    LevelBound,
    ParityConfig,
    SolutionBoundReport,
    all_parity_patterns,
    classify_case,
    euler_poincare_check,
    index_K,
    mu_closed_form,
    mu_direct,
    mu_recurrence,
    solution_bounds,
)
from .kfunc import (
    BumpTerm,
    CriticalPoint,
    H1ViolationError,
    KFunction,
    admissible_epsilon,
    check_positive,
    epsilon_membership,
    eval_K,
    euler_characteristic_diagnostic,
    extract_K_infinity,
    find_critical_points,
    grad_K,
    hess_K,
    k_infinity_points,
    k_range,
    laplace_K,
)
from .presets import available_presets, load_preset, preset_description
from .quadrature import (
    QuadratureConvergenceError,
    QuadratureScheme,
    integrate_radial,
    integrate_two_point_s3,
    mc_integrate,
)

__version__ = "0.1.0"

__all__ = [
    "Bubble",
    "BubbleSum",
    "BumpTerm",
    "ConsistencyError",
    "CriticalPoint",
    "FlowOptions",
    "FlowReport",
    "H1ViolationError",
    "H3Warning",
    "IndexTable",
    "I_from_J",
    "JEvaluation",
    "KFunction",
    "LevelBound",
    "MorseIndexEstimate",
    "ParityConfig",
    "QuadratureConvergenceError",
    "QuadratureNoiseWarning",
    "QuadratureScheme",
    "SolutionBoundReport",
    "admissible_epsilon",
    "all_parity_patterns",
    "available_presets",
    "canonical_bubble",
    "check_positive",
    "classify_case",
    "constant_one",
    "epsilon_membership",
    "equilibrium_scale",
    "euler_characteristic_diagnostic",
    "euler_poincare_check",
    "eval_K",
    "eval_bubble",
    "eval_bubble_sum",
    "extract_K_infinity",
    "find_critical_points",
    "flow_to_critical",
    "functional_J",
    "functional_J_detailed",
    "grad_K",
    "hess_K",
    "index_K",
    "integrate_radial",
    "integrate_two_point_s3",
    "k_infinity_points",
    "k_range",
    "laplace_K",
    "load_preset",
    "mc_integrate",
    "mu_closed_form",
    "mu_direct",
    "mu_recurrence",
    "norm_squared",
    "preset_description",
    "reduced_gradient",
    "reduced_morse_index",
    "sobolev_constant",
    "solution_bounds",
    "weighted_power_integral",
    "__version__",
]
