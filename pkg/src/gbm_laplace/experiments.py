"""Dataset generation, the multi-seed benchmark, and verification suites.

Datasets of GBM trajectories are generated with parameters drawn per
trajectory (x0 ~ U(0.1, 1), mu ~ U(4, 8), sigma ~ U(0.1, 1) by default)
on observation grids spanning [T/N, T]. Every trajectory's randomness is
keyed by (seed, trajectory index), so generation is reproducible
regardless of execution order.

The benchmark trains the Laplace-domain surrogate and evaluates it
against two analytic baselines (exponential fit, constant-last) on held
out trajectories: each method sees the pre-split prefix and is scored by
RMSE, pooled over all post-split test points, in per-trajectory
normalized units (values divided by the prefix maximum). Means and
standard deviations across seeds form the report.

The verification suites re-run the statistical checks of the closed
forms (Gaussian MGF, GBM moments, Laplace-transform expectation and
variance bound) and the inversion self-test, each case comparing a
measurement against an independent analytic target at an explicit
tolerance.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

import numpy as np

from . import surrogate as sg
from .ilt import IltConfig, ilt_grid, query_points
from .laplace import (
    check_bound,
    expected_truncated_laplace,
    mc_mean_laplace,
    variance_bound_abs_laplace,
)
from .processes import (
    GbmParams,
    TimeGrid,
    Trajectory,
    gbm_mean,
    gbm_variance,
    mgf_standard_normal,
    sample_gbm_exact,
    sample_gbm_exact_paths,
    sample_standard_normals,
)
from .rng import SeededRng

METHODS = ("surrogate", "exp-fit", "constant-last")
DATASET_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ExperimentConfig:
    n_trajectories: int = 200
    n_samples: int = 200
    t_max: float = 1.0
    x0_range: tuple[float, float] = (0.1, 1.0)
    mu_range: tuple[float, float] = (4.0, 8.0)
    sigma_range: tuple[float, float] = (0.1, 1.0)
    epochs: int = 100
    seeds: tuple[int, ...] = (0, 1, 2)
    test_fraction: float = 0.2
    split_time: float = 0.5
    grid_mode: str = "equispaced"

    def __post_init__(self):
        for name in ("x0_range", "mu_range", "sigma_range"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"{name} must satisfy low <= high, got ({lo}, {hi})")
        if self.n_trajectories < 1 or self.n_samples < 1:
            raise ValueError("n_trajectories and n_samples must be >= 1")
        if not 0 < self.test_fraction < 1:
            raise ValueError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if not 0 < self.split_time < self.t_max:
            raise ValueError(
                f"split_time must be in (0, t_max), got {self.split_time} vs {self.t_max}"
            )
        if self.grid_mode not in ("equispaced", "uniform-random"):
            raise ValueError(f"unknown grid_mode {self.grid_mode!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("x0_range", "mu_range", "sigma_range", "seeds"):
            d[key] = list(d[key])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        for key in ("x0_range", "mu_range", "sigma_range"):
            if key in d:
                d[key] = tuple(d[key])
        if "seeds" in d:
            d["seeds"] = tuple(d["seeds"])
        return cls(**d)

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class DatasetRecord:
    params: GbmParams
    trajectory: Trajectory


@dataclass(frozen=True)
class Dataset:
    records: tuple[DatasetRecord, ...]
    header: dict

    def __len__(self) -> int:
        return len(self.records)


def generate_dataset(config: ExperimentConfig, seed: int) -> Dataset:
    """Sample n_trajectories GBM paths, one (seed, i) sub-stream each."""
    n, t_max = config.n_samples, config.t_max
    records = []
    for i in range(config.n_trajectories):
        gen = SeededRng(seed, i).generator()
        params = GbmParams(
            x0=gen.uniform(*config.x0_range),
            mu=gen.uniform(*config.mu_range),
            sigma=gen.uniform(*config.sigma_range),
        )
        if config.grid_mode == "equispaced":
            times = np.arange(1, n + 1) * (t_max / n)
        else:
            times = np.sort(gen.uniform(t_max / n, t_max, n))
        grid = TimeGrid(times)
        records.append(DatasetRecord(params, sample_gbm_exact(params, grid, gen)))
    header = {
        "format_version": DATASET_FORMAT_VERSION,
        "config_hash": config.hash(),
        "seed": seed,
    }
    return Dataset(tuple(records), header)


def save_dataset(ds: Dataset, path) -> None:
    """JSON Lines: a header line, then one self-describing record per line."""
    with open(path, "w") as fh:
        fh.write(json.dumps(ds.header, sort_keys=True) + "\n")
        for rec in ds.records:
            fh.write(json.dumps({
                "x0": rec.params.x0,
                "mu": rec.params.mu,
                "sigma": rec.params.sigma,
                "times": rec.trajectory.grid.times.tolist(),
                "values": rec.trajectory.values.tolist(),
            }) + "\n")


def load_dataset(path) -> Dataset:
    with open(path) as fh:
        header = json.loads(fh.readline())
        records = []
        for line in fh:
            d = json.loads(line)
            params = GbmParams(d["x0"], d["mu"], d["sigma"])
            records.append(DatasetRecord(
                params, Trajectory(TimeGrid(np.array(d["times"])), np.array(d["values"]))
            ))
    return Dataset(tuple(records), header)


def split_dataset(ds: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded shuffle, then a disjoint exhaustive train/test partition."""
    if len(ds) == 0:
        raise ValueError("dataset is empty")
    if not 0 < test_fraction < 1:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    n_test = int(round(len(ds) * test_fraction))
    perm = np.random.default_rng(seed).permutation(len(ds))
    test_idx = set(perm[:n_test].tolist())
    train = tuple(r for i, r in enumerate(ds.records) if i not in test_idx)
    test = tuple(r for i, r in enumerate(ds.records) if i in test_idx)
    header = dict(ds.header)
    return Dataset(train, {**header, "split": "train"}), Dataset(test, {**header, "split": "test"})


def _pooled_rmse(predict_one, test: Dataset, split_time: float, scale_grid_size: int) -> float:
    """RMSE over all post-split test points, in prefix-normalized units."""
    sq, count = 0.0, 0
    for rec in test.records:
        traj = rec.trajectory
        post = traj.grid.times > split_time
        if not post.any():
            raise ValueError("test trajectory has no observations after split_time")
        pred = predict_one(traj, traj.grid.times[post])
        _, scale = sg.normalize_prefix(traj, split_time, scale_grid_size)
        err = (np.asarray(pred, dtype=float) - traj.values[post]) / scale
        sq += float(np.sum(err**2))
        count += err.size
    return float(np.sqrt(sq / count))


def evaluate_method(method: str, train: Dataset, test: Dataset,
                    config: ExperimentConfig, seed: int) -> float:
    """Test RMSE of one method: train (surrogate only), predict, pool."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    st = config.split_time

    if method == "surrogate":
        train_cfg = sg.TrainConfig(epochs=config.epochs, seed=seed, split_time=st)
        model, _ = sg.train(train.records, train_cfg)

        def predict_one(traj, t):
            return sg.predict(model, traj, st, t)
        m = train_cfg.input_grid_size
    elif method == "exp-fit":
        def predict_one(traj, t):
            x0_hat, mu_hat = sg.baseline_exponential_fit(traj, st)
            return x0_hat * np.exp(mu_hat * t)
        m = 64
    else:
        def predict_one(traj, t):
            return np.full(t.size, sg.baseline_constant_last(traj, st))
        m = 64
    return _pooled_rmse(predict_one, test, st, m)


@dataclass(frozen=True)
class MethodResult:
    method: str
    per_seed: tuple[float, ...] = ()
    error: str | None = None

    @property
    def mean(self) -> float:
        return float(np.mean(self.per_seed))

    @property
    def std(self) -> float:
        return float(np.std(self.per_seed, ddof=1))


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[MethodResult, ...]
    config: ExperimentConfig


def run_experiment(config: ExperimentConfig) -> EvalReport:
    """Per seed: regenerate, split, evaluate every method; aggregate."""
    if len(config.seeds) < 2:
        raise ValueError("run_experiment needs at least 2 seeds")
    per_method: dict[str, list[float]] = {m: [] for m in METHODS}
    errors: dict[str, str] = {}
    for seed in config.seeds:
        ds = generate_dataset(config, seed)
        train, test = split_dataset(ds, config.test_fraction, seed)
        for method in METHODS:
            if method in errors:
                continue
            try:
                per_method[method].append(evaluate_method(method, train, test, config, seed))
            except Exception as exc:
                errors[method] = f"{type(exc).__name__}: {exc}"
    rows = []
    for method in METHODS:
        if method in errors:
            rows.append(MethodResult(method, (), errors[method]))
        else:
            rows.append(MethodResult(method, tuple(per_method[method])))
    return EvalReport(tuple(rows), config)


def emit_report(report: EvalReport, path) -> None:
    """CSV with header method,mean_rmse,std_rmse plus a JSON sidecar.

    The sidecar (<path>.sidecar.json) carries per-seed RMSE values and
    the full config. Refuses to write if a row's mean/std do not
    recompute from its per-seed values.
    """
    lines = ["method,mean_rmse,std_rmse"]
    for row in report.rows:
        if row.error is not None:
            lines.append(f"{row.method},error,error")
            continue
        mean, std = row.mean, row.std
        if not (np.isclose(mean, np.mean(row.per_seed)) and np.isclose(std, np.std(row.per_seed, ddof=1))):
            raise ValueError(f"row {row.method}: mean/std inconsistent with per-seed values")
        lines.append(f"{row.method},{mean:.6f},{std:.6f}")
    sidecar = {
        "config": report.config.to_dict(),
        "per_seed": {
            row.method: (list(row.per_seed) if row.error is None else row.error)
            for row in report.rows
        },
    }
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    with open(str(path) + ".sidecar.json", "w") as fh:
        json.dump(sidecar, fh, sort_keys=True, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Verification suites
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VerifyCase:
    name: str
    measured: float
    expected: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return abs(self.measured - self.expected) <= self.tolerance


@dataclass(frozen=True)
class VerifyReport:
    suite: str
    cases: tuple[VerifyCase, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "cases": [
                {
                    "name": c.name,
                    "measured": c.measured,
                    "expected": c.expected,
                    "tolerance": c.tolerance,
                    "passed": c.passed,
                }
                for c in self.cases
            ],
        }


def verify_mgf(n_draws: int = 10**7, seed: int = 0, tolerance_scale: float = 1.0) -> VerifyReport:
    """MC mean of e^(lam Z) against e^(lam^2/2) within 1% relative."""
    cases = []
    for i, lam in enumerate((0.25, 0.5, 1.0)):
        z = sample_standard_normals(SeededRng(seed, i), n_draws)
        measured = float(np.mean(np.exp(lam * z)))
        expected = mgf_standard_normal(lam)
        cases.append(VerifyCase(
            f"mgf lambda={lam}", measured, expected, 0.01 * expected * tolerance_scale
        ))
    return VerifyReport("mgf", tuple(cases))


def verify_moments(n_cases: int = 10, n_mean_paths: int = 10**5, n_var_paths: int = 10**6,
                   seed: int = 0, tolerance_scale: float = 1.0) -> VerifyReport:
    """GBM mean within 4 MC standard errors; variance within 5% relative.

    Half of the random parameter draws take sigma <= 0.5; only those get
    the variance check (the heavy-tailed larger sigmas would need far
    more paths for a 5% target).
    """
    gen = SeededRng(seed, 10**6).generator()
    t = 1.0
    grid = TimeGrid(np.array([t]))
    cases = []
    for i in range(n_cases):
        low_sigma = i % 2 == 0
        params = GbmParams(
            x0=gen.uniform(0.1, 1.0),
            mu=gen.uniform(0.0, 4.0),
            sigma=gen.uniform(0.1, 0.5) if low_sigma else gen.uniform(0.5, 1.0),
        )
        x = sample_gbm_exact_paths(params, grid, n_mean_paths, SeededRng(seed, 2 * i))[:, 0]
        se = float(np.std(x, ddof=1) / np.sqrt(n_mean_paths))
        cases.append(VerifyCase(
            f"mean case {i} (mu={params.mu:.2f}, sigma={params.sigma:.2f})",
            float(np.mean(x)), gbm_mean(params, t), 4 * se * tolerance_scale,
        ))
        if low_sigma:
            xv = sample_gbm_exact_paths(params, grid, n_var_paths, SeededRng(seed, 2 * i + 1))[:, 0]
            expected = gbm_variance(params, t)
            cases.append(VerifyCase(
                f"variance case {i} (sigma={params.sigma:.2f})",
                float(np.var(xv, ddof=1)), expected, 0.05 * expected * tolerance_scale,
            ))
    return VerifyReport("moments", tuple(cases))


def verify_laplace_mean(n_paths: int = 2000, n_grid: int = 2000, seed: int = 0,
                        tolerance_scale: float = 1.0) -> VerifyReport:
    """MC mean of the numerical transform against the truncated closed form.

    Tolerance per case: 3 MC standard errors plus a 1e-3 relative
    quadrature budget.
    """
    params = GbmParams(x0=0.5, mu=4.0, sigma=0.5)
    grid = TimeGrid(np.arange(1, n_grid + 1) / n_grid)
    cases = []
    for i, s in enumerate((6 + 0j, 8 + 0j, 8 + 4j)):
        est = mc_mean_laplace(params, s, n_paths, grid, SeededRng(seed, i))
        target = expected_truncated_laplace(params, s, horizon=1.0)
        tol = (3 * est.std_error + 1e-3 * abs(target)) * tolerance_scale
        cases.append(VerifyCase(f"E[F({s})]", abs(complex(est.mean) - target), 0.0, tol))
    return VerifyReport("laplace-mean", tuple(cases))


def variance_bound_sweep(n_cases: int = 20, seed: int = 0) -> list[tuple[GbmParams, complex]]:
    """Random (params, s) satisfying the variance-bound conditions."""
    gen = SeededRng(seed, 10**6 + 1).generator()
    sweep = []
    while len(sweep) < n_cases:
        mu = gen.uniform(2.0, 8.0)
        sigma = gen.uniform(0.1, 1.0)
        if mu - 0.5 * sigma**2 <= 0:
            continue
        params = GbmParams(x0=gen.uniform(0.1, 1.0), mu=mu, sigma=sigma)
        s = complex(gen.uniform(mu + 1, mu + 4))
        sweep.append((params, s))
    return sweep


def verify_variance_bound(n_paths: int = 2000, n_grid: int = 2000, n_cases: int = 20,
                          seed: int = 0, tolerance_scale: float = 1.0) -> VerifyReport:
    """Empirical Var[|F(s)|] under its analytic bound on a random sweep.

    Reported as measured = empirical variance, expected = 0, tolerance =
    bound, so the pass condition is exactly variance <= bound.
    """
    grid = TimeGrid(np.arange(1, n_grid + 1) / n_grid)
    cases = []
    for i, (params, s) in enumerate(variance_bound_sweep(n_cases, seed)):
        report = check_bound(params, s, n_paths, grid, SeededRng(seed, 100 + i))
        cases.append(VerifyCase(
            f"bound case {i} (mu={params.mu:.2f}, sigma={params.sigma:.2f}, s={s.real:.2f})",
            report.empirical_variance, 0.0, report.bound * tolerance_scale,
        ))
    return VerifyReport("variance-bound", tuple(cases))


def verify_ilt_selftest(n_terms: int = 1024, tolerance_scale: float = 1.0) -> VerifyReport:
    """Analytic transform pairs recovered within 1e-2 max relative error."""
    t = np.linspace(0.05, 0.95, 91)
    pairs = [
        ("1/s <-> 1", lambda s: 1 / s, np.ones_like(t), 2.0),
        ("1/s^2 <-> t", lambda s: 1 / s**2, t, 3.0),
        ("1/(s-4) <-> e^(4t)", lambda s: 1 / (s - 4), np.exp(4 * t), 6.0),
    ]
    cases = []
    for name, f, truth, sigma0 in pairs:
        config = IltConfig(sigma0=sigma0, n_terms=n_terms, horizon=2.0)
        rec = ilt_grid(f(query_points(config)), t, config)
        max_rel = float(np.max(np.abs(rec - truth) / np.abs(truth)))
        cases.append(VerifyCase(name, max_rel, 0.0, 1e-2 * tolerance_scale))
    return VerifyReport("ilt-selftest", tuple(cases))


VERIFY_SUITES = {
    "mgf": verify_mgf,
    "moments": verify_moments,
    "laplace-mean": verify_laplace_mean,
    "variance-bound": verify_variance_bound,
    "ilt-selftest": verify_ilt_selftest,
}
