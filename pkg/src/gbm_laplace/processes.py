"""Sampling and closed-form moments of Geometric Brownian Motion.

A GBM with drift mu, volatility sigma and initial value x0 solves
dX = mu*X dt + sigma*X dB and has the explicit solution

    X_t = x0 * exp((mu - sigma^2/2) t + sigma B_t)

which is what the exact sampler draws from. An Euler-Maruyama sampler on a
fine internal grid serves as an independent distributional cross-check.
All processes here are scalar (one state dimension).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import as_generator


@dataclass(frozen=True)
class GbmParams:
    """The (x0, mu, sigma) triple parameterizing one GBM."""

    x0: float
    mu: float
    sigma: float

    def __post_init__(self):
        if not np.isfinite([self.x0, self.mu, self.sigma]).all():
            raise ValueError("GBM parameters must be finite")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.x0 <= 0:
            raise ValueError(f"x0 must be > 0, got {self.x0}")


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing, nonnegative observation times."""

    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", t)
        if t.ndim != 1 or t.size < 1:
            raise ValueError("time grid must be a nonempty 1-d array")
        if not np.isfinite(t).all():
            raise ValueError("time grid contains non-finite entries")
        if t[0] < 0:
            raise ValueError("time grid entries must be >= 0")
        if t.size > 1 and not (np.diff(t) > 0).all():
            raise ValueError("time grid must be strictly increasing")

    def __len__(self) -> int:
        return self.times.size


@dataclass(frozen=True)
class Trajectory:
    """Observed values of one path on a time grid."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.shape != (len(self.grid),):
            raise ValueError(
                f"values shape {v.shape} does not match grid length {len(self.grid)}"
            )
        if not np.isfinite(v).all():
            raise ValueError("trajectory values must be finite")


def sample_standard_normals(rng, n: int) -> np.ndarray:
    """n independent N(0,1) draws, deterministic in (seed, stream)."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    return as_generator(rng).standard_normal(n)


def sample_brownian_increments(grid: TimeGrid, rng) -> np.ndarray:
    """Increments B_{t_k} - B_{t_{k-1}} over the grid, with t_0 = 0.

    The k-th entry is N(0, t_k - t_{k-1}); cumulative sums give B at the
    grid times.
    """
    t = grid.times
    gaps = np.diff(t, prepend=0.0)
    z = sample_standard_normals(rng, t.size)
    return np.sqrt(gaps) * z


def _brownian_paths(grid: TimeGrid, n_paths: int, gen: np.random.Generator) -> np.ndarray:
    """(n_paths, n_times) matrix of B evaluated at the grid times."""
    t = grid.times
    gaps = np.diff(t, prepend=0.0)
    z = gen.standard_normal((n_paths, t.size))
    return np.cumsum(np.sqrt(gaps) * z, axis=1)


def sample_gbm_exact(params: GbmParams, grid: TimeGrid, rng) -> Trajectory:
    """One GBM path drawn from the explicit solution."""
    values = sample_gbm_exact_paths(params, grid, 1, rng)[0]
    return Trajectory(grid, values)


def sample_gbm_exact_paths(params: GbmParams, grid: TimeGrid, n_paths: int, rng) -> np.ndarray:
    """(n_paths, n_times) matrix of independent exact GBM paths.

    Vectorized form of sample_gbm_exact for Monte Carlo loops; path i of a
    call with n_paths=m uses the same draws as a sequence of single-path
    calls would only when m == 1, so treat each call as one stream.
    """
    if n_paths < 1:
        raise ValueError(f"n_paths must be >= 1, got {n_paths}")
    gen = as_generator(rng)
    b = _brownian_paths(grid, n_paths, gen)
    t = grid.times
    drift = (params.mu - 0.5 * params.sigma**2) * t
    return params.x0 * np.exp(drift + params.sigma * b)


def sample_gbm_euler(params: GbmParams, grid: TimeGrid, step: float, rng) -> Trajectory:
    """One GBM path from Euler-Maruyama on a fine internal grid.

    The internal grid refines every observation gap (starting from t=0) to
    spacing <= step and lands exactly on the requested observation times.
    Used as a distributional oracle for the exact sampler.
    """
    values = sample_gbm_euler_paths(params, grid, step, 1, rng)[0]
    return Trajectory(grid, values)


def sample_gbm_euler_paths(
    params: GbmParams, grid: TimeGrid, step: float, n_paths: int, rng
) -> np.ndarray:
    """(n_paths, n_times) matrix of independent Euler-Maruyama GBM paths."""
    if step <= 0:
        raise ValueError(f"step must be > 0, got {step}")
    if n_paths < 1:
        raise ValueError(f"n_paths must be >= 1, got {n_paths}")
    gen = as_generator(rng)
    t = grid.times

    x = np.full(n_paths, params.x0)
    out = np.empty((n_paths, t.size))
    t_prev = 0.0
    for j, t_obs in enumerate(t):
        gap = t_obs - t_prev
        if gap > 0:
            n_sub = int(np.ceil(gap / step - 1e-12))
            h = gap / n_sub
            sqrt_h = np.sqrt(h)
            for _ in range(n_sub):
                db = sqrt_h * gen.standard_normal(n_paths)
                x = x + params.mu * x * h + params.sigma * x * db
        out[:, j] = x
        t_prev = t_obs
    return out


def gbm_mean(params: GbmParams, t: float) -> float:
    """E[X_t] = x0 * e^(mu t)."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    return params.x0 * np.exp(params.mu * t)


def gbm_variance(params: GbmParams, t: float) -> float:
    """V[X_t] = x0^2 * e^(2 mu t) * (e^(sigma^2 t) - 1)."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    return params.x0**2 * np.exp(2 * params.mu * t) * np.expm1(params.sigma**2 * t)


def mgf_standard_normal(lam: float) -> float:
    """E[e^(lam Z)] for Z ~ N(0,1), i.e. e^(lam^2 / 2)."""
    return float(np.exp(0.5 * lam * lam))
