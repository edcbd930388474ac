"""Delayed Mittag-Leffler matrix functions and delayed Hilfer-type fractional systems."""

from .delayed_ml import (
    SeriesParams,
    YQuery,
    build_kernel_for,
    delayed_cos_frac,
    delayed_sin_frac,
    depth_for_horizon,
    y_eval,
    y_eval_grid,
    y_eval_many,
)
from .errors import (
    ApplicabilityError,
    ConvergenceError,
    DimensionError,
    DomainError,
    FracDelayError,
    KernelDepthError,
    QuadratureError,
    SingularityError,
)
from .fractional import GridFunction, gl_caputo_deriv, hilfer_deriv_numeric, rl_integral
from .kernel import KernelTable, SumFormReport, kernel_build, kernel_check_sum_form, kernel_entry
from .oracles import (
    VerifyReport,
    compare_with_steps,
    laplace_check,
    laplace_margin,
    method_of_steps_oracle,
    residual_check_caputo,
)
from .problem import FunctionSpec, ProblemSpec, Term
from .quadrature import QuadParams
from .solver import (
    PerturbationReport,
    Trajectory,
    forcing_term,
    history_term,
    homogeneous_term,
    perturbation_bound_check,
    solve,
    uh_constant,
)
from .special import MLParams, gamma_fn, ml2, ml2_matrix

__version__ = "0.1.0"
