"""Identification of linear dynamical systems from noisy state observations."""

from .bounds import (
    BoundConfig,
    SystemConstants,
    bc_error_bound,
    bc_sample_threshold,
    iv_error_bound,
    iv_sample_threshold,
    kappa_constants,
    system_constants,
)
from .estimators import (
    BiasDecomposition,
    Estimate,
    bc_estimate,
    bc_estimate_autonomous,
    estimation_error,
    ho_kalman_estimate,
    iv_estimate,
    iv_estimate_autonomous,
    ls_bias_decomposition,
    ls_estimate,
    ls_estimate_autonomous,
)
from .experiment import ExperimentConfig, ExperimentResult, builtin_config, emit_csv, run_experiment
from .numerics import RngStream, draw_gaussian, min_singular_value, operator_norm, psd_factor, solve_right
from .plot import emit_svg_plot
from .system import (
    AssumptionReport,
    LinearSystem,
    Trajectory,
    check_assumptions,
    controllability_matrix,
    simulate,
    stability_constants,
)

__version__ = "0.1.0"
