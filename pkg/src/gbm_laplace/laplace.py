"""Numerical Laplace transform of trajectories and its GBM closed forms.

The transform of a sampled trajectory is computed by trapezoidal
quadrature of e^(-s t) x(t) over the observed window, plus a leading
segment [0, t_1] with x held at its first observed value (observation
grids here typically start at T/N, not 0; the resulting bias is O(T/N)).
No tail extrapolation is attempted: what finite data estimates is the
transform truncated at the last observation time, and the Monte Carlo
checks therefore target the truncated closed form.

For a GBM with Re(s) > mu the expectation of the full transform is
x0 / (s - mu); if additionally Re(s) > 0 and mu - sigma^2/2 > 0, the
variance of |F(s)| is bounded by x0^2 / (4 Re(s) (mu - sigma^2/2)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .processes import GbmParams, TimeGrid, Trajectory, sample_gbm_exact_paths
from .rng import SeededRng


@dataclass(frozen=True)
class McEstimate:
    """A Monte Carlo estimate with its standard error.

    For complex estimates the standard error is the norm of the
    componentwise standard errors, sqrt(se_re^2 + se_im^2).
    """

    mean: complex
    std_error: float
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"Monte Carlo estimate needs n >= 2, got {self.n}")
        if self.std_error < 0:
            raise ValueError("standard error must be >= 0")


@dataclass(frozen=True)
class BoundReport:
    """Empirical variance of |F(s)| against its analytic upper bound."""

    empirical_variance: float
    bound: float
    holds: bool
    margin: float

    def __post_init__(self):
        if self.holds != (self.empirical_variance <= self.bound):
            raise ValueError("holds flag inconsistent with variance/bound")


def _trapezoid_weights(t: np.ndarray) -> np.ndarray:
    w = np.empty_like(t)
    w[0] = 0.5 * (t[1] - t[0])
    w[-1] = 0.5 * (t[-1] - t[-2])
    w[1:-1] = 0.5 * (t[2:] - t[:-2])
    return w


def _leading_factor(t1: float, s: complex) -> complex:
    # integral of e^{-s t} over [0, t1]
    if s == 0:
        return t1
    return -np.expm1(-s * t1) / s


def laplace_numeric(traj: Trajectory, s: complex) -> complex:
    """Truncated Laplace transform of a sampled trajectory at one point s."""
    t = traj.grid.times
    if t.size < 2:
        raise ValueError("laplace_numeric needs at least 2 observations")
    x = traj.values
    integrand = np.exp(-s * t) * x
    w = _trapezoid_weights(t)
    value = np.sum(w * integrand)
    if t[0] > 0:
        value += x[0] * _leading_factor(t[0], s)
    return complex(value)


def _laplace_numeric_paths(paths: np.ndarray, grid: TimeGrid, s: complex) -> np.ndarray:
    """Vectorized laplace_numeric over the rows of a path matrix."""
    t = grid.times
    if t.size < 2:
        raise ValueError("laplace_numeric needs at least 2 observations")
    weights = _trapezoid_weights(t) * np.exp(-s * t)
    values = paths @ weights
    if t[0] > 0:
        values = values + paths[:, 0] * _leading_factor(t[0], s)
    return values


def expected_laplace_gbm(params: GbmParams, s: complex) -> complex:
    """E[F(s)] = x0 / (s - mu), valid for Re(s) > mu."""
    s = complex(s)
    if s.real <= params.mu:
        raise ValueError(
            f"expectation of the Laplace transform requires Re(s) > mu "
            f"(Re(s)={s.real}, mu={params.mu})"
        )
    return params.x0 / (s - params.mu)


def expected_truncated_laplace(params: GbmParams, s: complex, horizon: float) -> complex:
    """E of the transform truncated at `horizon`: x0 (1 - e^((mu-s)h)) / (s - mu).

    This is what laplace_numeric estimates in expectation, and the target
    of the Monte Carlo mean checks. At the removable singularity s = mu
    the value is x0 * horizon.
    """
    if horizon <= 0:
        raise ValueError(f"horizon must be > 0, got {horizon}")
    s = complex(s)
    if s == params.mu:
        return complex(params.x0 * horizon)
    return params.x0 * -np.expm1((params.mu - s) * horizon) / (s - params.mu)


def variance_bound_abs_laplace(params: GbmParams, s: complex) -> float:
    """Upper bound on Var[|F(s)|]: x0^2 / (4 Re(s) (mu - sigma^2/2))."""
    s = complex(s)
    if s.real <= 0:
        raise ValueError(f"variance bound requires Re(s) > 0, got {s.real}")
    growth = params.mu - 0.5 * params.sigma**2
    if growth <= 0:
        raise ValueError(
            f"variance bound inapplicable: requires mu - sigma^2/2 > 0, got {growth}"
        )
    return params.x0**2 / (4 * s.real * growth)


def mc_mean_laplace(
    params: GbmParams, s: complex, n_paths: int, grid: TimeGrid, rng: SeededRng
) -> McEstimate:
    """Monte Carlo mean of the numerical Laplace transform over GBM paths."""
    if n_paths < 2:
        raise ValueError(f"n_paths must be >= 2, got {n_paths}")
    paths = sample_gbm_exact_paths(params, grid, n_paths, rng)
    f = _laplace_numeric_paths(paths, grid, complex(s))
    mean = complex(f.mean())
    se = np.sqrt((np.var(f.real, ddof=1) + np.var(f.imag, ddof=1)) / n_paths)
    return McEstimate(mean, float(se), n_paths)


def mc_var_abs_laplace(
    params: GbmParams, s: complex, n_paths: int, grid: TimeGrid, rng: SeededRng
) -> McEstimate:
    """Unbiased sample variance of |F(s)| over GBM paths.

    The standard error uses the normal-theory approximation
    s^2 * sqrt(2 / (n - 1)) and is therefore itself approximate.
    """
    if n_paths < 2:
        raise ValueError(f"n_paths must be >= 2, got {n_paths}")
    paths = sample_gbm_exact_paths(params, grid, n_paths, rng)
    a = np.abs(_laplace_numeric_paths(paths, grid, complex(s)))
    v = float(np.var(a, ddof=1))
    se = v * np.sqrt(2.0 / (n_paths - 1))
    return McEstimate(v, float(se), n_paths)


def check_bound(
    params: GbmParams, s: complex, n_paths: int, grid: TimeGrid, rng: SeededRng
) -> BoundReport:
    """Compare the empirical variance of |F(s)| against its analytic bound."""
    bound = variance_bound_abs_laplace(params, s)
    est = mc_var_abs_laplace(params, s, n_paths, grid, rng)
    v = float(est.mean.real) if isinstance(est.mean, complex) else float(est.mean)
    return BoundReport(
        empirical_variance=v,
        bound=bound,
        holds=v <= bound,
        margin=bound - v,
    )
