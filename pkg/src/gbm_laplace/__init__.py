"""Geometric Brownian Motion in the Laplace domain.

Simulation of GBM trajectories, numerical Laplace transforms with Monte
Carlo verification of their closed-form expectation and variance bound,
Fourier-series inverse Laplace transforms, and a small Laplace-domain
forecasting surrogate benchmarked against analytic baselines.
"""

from .ilt import IltConfig, ilt_fourier, ilt_grid, query_points
from .laplace import (
    BoundReport,
    McEstimate,
    check_bound,
    expected_laplace_gbm,
    expected_truncated_laplace,
    laplace_numeric,
    mc_mean_laplace,
    mc_var_abs_laplace,
    variance_bound_abs_laplace,
)
from .processes import (
    GbmParams,
    TimeGrid,
    Trajectory,
    gbm_mean,
    gbm_variance,
    mgf_standard_normal,
    sample_brownian_increments,
    sample_gbm_euler,
    sample_gbm_euler_paths,
    sample_gbm_exact,
    sample_gbm_exact_paths,
    sample_standard_normals,
)
from .rng import SeededRng
from .surrogate import (
    SurrogateModel,
    TrainConfig,
    TrainReport,
    TrainingDivergedError,
    baseline_constant_last,
    baseline_exponential_fit,
    grad,
    load_model,
    loss_rmse,
    normalize_prefix,
    predict,
    save_model,
    train,
)

__version__ = "0.1.0"
