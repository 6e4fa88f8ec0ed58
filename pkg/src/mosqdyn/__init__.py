"""Discrete-time larvae/adult mosquito population dynamics and their analysis."""

from .core import (
    ORIGIN,
    ModelParams,
    State2,
    Trajectory,
    WStep,
    iterate_w,
    iterate_w0,
    step_w,
    step_w0,
    validate_params,
)
from .errors import *  # noqa: F401,F403
from .harness import (
    ConvergenceReport,
    GridSpec,
    SweepRow,
    Verdict,
    converges_to_origin,
    monotone_tail,
    sweep_regimes,
    verify_eventual_bounds,
)
from .simplex import (
    MonotonicityProfile,
    Period2Certificate,
    budan_fourier_variations,
    omega_limit,
    period2_certificate,
    step_u,
    t_derivative,
    t_fixed_point,
    t_fixed_point_stability,
    t_map,
    t_monotonicity_profile,
)
from .spectral import (
    FixedPointReport,
    Stability,
    classify_fixed_point,
    eigenvalues_2x2,
    fixed_points_w0,
    jacobian_w0,
    origin_regime,
)

__version__ = "0.1.0"
