"""Laplace-domain forecasting surrogate and analytic baselines.

The surrogate maps an observed trajectory prefix to predictions of its
future values through a Laplace-domain bottleneck:

    prefix -> normalize -> encoder MLP -> latent
           -> head MLP  -> F values at the K fixed inversion query points
           -> Fourier-series inverse Laplace transform -> predictions

The inverse transform is a fixed linear map of the F values (see
gbm_laplace.ilt), so the whole pipeline is a small feed-forward network
with an analytic final layer, trained by minibatch gradient descent on
mean squared error over normalized values. RMSE is reported; MSE is
optimized (same minimizer, smooth at zero).

Each trajectory is normalized by the maximum absolute value observed on
its prefix. Losses and reported RMSE are in these normalized units.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .ilt import IltConfig, decode_matrices
from .processes import Trajectory
from .rng import SeededRng

SCALE_FLOOR = 1e-12

_WEIGHT_KEYS = (
    "enc_w1", "enc_b1", "enc_w2", "enc_b2",
    "head_w1", "head_b1", "head_w2", "head_b2",
)


class TrainingDivergedError(RuntimeError):
    """Raised when the training loss becomes non-finite."""

    def __init__(self, epoch: int):
        super().__init__(f"training diverged (non-finite loss) at epoch {epoch}")
        self.epoch = epoch


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of the surrogate and its training loop."""

    epochs: int = 100
    learning_rate: float = 3e-5
    batch_size: int = 32
    latent_dim: int = 16
    hidden_width: int = 64
    query_count: int = 64
    seed: int = 0
    input_grid_size: int = 64
    split_time: float = 0.5
    sigma0: float = 10.0
    horizon: float = 2.0
    optimizer: str = "adam"

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if min(self.latent_dim, self.hidden_width, self.input_grid_size) < 1:
            raise ValueError("latent_dim, hidden_width, input_grid_size must be >= 1")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"optimizer must be 'sgd' or 'adam', got {self.optimizer!r}")

    def ilt_config(self) -> IltConfig:
        return IltConfig(sigma0=self.sigma0, n_terms=self.query_count, horizon=self.horizon)


@dataclass
class SurrogateModel:
    """Encoder and Laplace-head weights plus the fixed inversion setup."""

    weights: dict[str, np.ndarray]
    ilt_config: IltConfig
    input_grid_size: int

    @property
    def n_terms(self) -> int:
        return self.ilt_config.n_terms


@dataclass(frozen=True)
class TrainReport:
    """Per-epoch mean training loss (MSE in normalized units)."""

    train_losses: list[float]
    final_test_rmse: float | None = None


def init_model(config: TrainConfig) -> SurrogateModel:
    """Weights drawn uniformly in +-1/sqrt(fan_in), seeded by config.seed.

    The final head layer starts at zero: the inversion envelope
    e^(sigma0 t) amplifies head outputs by up to four orders of magnitude,
    so a random initial output layer would start the optimizer from
    astronomically large forecasts.
    """
    gen = SeededRng(config.seed).generator()
    m, h, p, k = config.input_grid_size, config.hidden_width, config.latent_dim, config.query_count

    def layer(n_out, n_in):
        bound = 1.0 / np.sqrt(n_in)
        return gen.uniform(-bound, bound, (n_out, n_in)), gen.uniform(-bound, bound, n_out)

    w = {}
    w["enc_w1"], w["enc_b1"] = layer(h, 2 * m)
    w["enc_w2"], w["enc_b2"] = layer(p, h)
    w["head_w1"], w["head_b1"] = layer(h, p)
    w["head_w2"] = np.zeros((2 * k, h))
    w["head_b2"] = np.zeros(2 * k)
    return SurrogateModel(w, config.ilt_config(), m)


def normalize_prefix(traj: Trajectory, split_time: float, input_grid_size: int):
    """Interpolate the prefix onto an equispaced grid and normalize it.

    Returns (features, scale): values interpolated at the M points
    j * split_time / M (j = 1..M) divided by scale, where scale is the
    maximum |value| among the observations with time <= split_time.
    """
    mask = traj.grid.times <= split_time
    if mask.sum() < 2:
        raise ValueError("prefix needs at least 2 observations at or before split_time")
    t_obs = traj.grid.times[mask]
    x_obs = traj.values[mask]
    m = input_grid_size
    t_eq = np.arange(1, m + 1) * (split_time / m)
    interp = np.interp(t_eq, t_obs, x_obs)
    scale = max(float(np.max(np.abs(x_obs))), SCALE_FLOOR)
    return interp / scale, scale


def _prefix_times(split_time: float, m: int) -> np.ndarray:
    return np.arange(1, m + 1) * (split_time / m)


def _forward(weights: dict[str, np.ndarray], inp: np.ndarray) -> dict[str, np.ndarray]:
    """Forward pass through encoder and head, caching activations."""
    h1 = np.tanh(weights["enc_w1"] @ inp + weights["enc_b1"])
    z = weights["enc_w2"] @ h1 + weights["enc_b2"]
    h2 = np.tanh(weights["head_w1"] @ z + weights["head_b1"])
    out = weights["head_w2"] @ h2 + weights["head_b2"]
    return {"inp": inp, "h1": h1, "z": z, "h2": h2, "out": out}


def _split_head_output(out: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    re = out[:k]
    im = out[k:].copy()
    im[0] = 0.0  # k = 0 query point is real; its F value is forced real too
    return re, im


def predict(model: SurrogateModel, traj: Trajectory, split_time: float, query_times) -> np.ndarray:
    """Forecast trajectory values at query_times from its prefix."""
    features, scale = normalize_prefix(traj, split_time, model.input_grid_size)
    inp = np.concatenate([features, _prefix_times(split_time, model.input_grid_size)])
    cache = _forward(model.weights, inp)
    re, im = _split_head_output(cache["out"], model.n_terms)
    t = np.asarray(getattr(query_times, "times", query_times), dtype=float)
    d_re, d_im = decode_matrices(t, model.ilt_config)
    return scale * (d_re @ re + d_im @ im)


def loss_rmse(pred, target) -> float:
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape or pred.size == 0:
        raise ValueError(f"shape mismatch or empty: {pred.shape} vs {target.shape}")
    return float(np.sqrt(np.mean((pred - target) ** 2)))


@dataclass
class _PreparedItem:
    """Per-trajectory arrays reused across epochs."""

    inp: np.ndarray
    d_re: np.ndarray
    d_im: np.ndarray
    target_norm: np.ndarray


def _prepare_item(model: SurrogateModel, traj: Trajectory, split_time: float,
                  query_times, targets) -> _PreparedItem:
    features, scale = normalize_prefix(traj, split_time, model.input_grid_size)
    inp = np.concatenate([features, _prefix_times(split_time, model.input_grid_size)])
    t = np.asarray(getattr(query_times, "times", query_times), dtype=float)
    d_re, d_im = decode_matrices(t, model.ilt_config)
    return _PreparedItem(inp, d_re, d_im, np.asarray(targets, dtype=float) / scale)


def _item_loss_grad(weights, k, item: _PreparedItem, want_grad: bool):
    """MSE (normalized units) of one item, optionally with its gradient."""
    cache = _forward(weights, item.inp)
    re, im = _split_head_output(cache["out"], k)
    pred = item.d_re @ re + item.d_im @ im
    resid = pred - item.target_norm
    loss = float(np.mean(resid**2))
    if not want_grad:
        return loss, None

    dpred = 2.0 * resid / resid.size
    dout = np.concatenate([item.d_re.T @ dpred, item.d_im.T @ dpred])
    dout[k] = 0.0  # imaginary part at k = 0 is clamped

    g = {}
    g["head_w2"] = np.outer(dout, cache["h2"])
    g["head_b2"] = dout
    dh2 = weights["head_w2"].T @ dout
    dpre2 = dh2 * (1.0 - cache["h2"] ** 2)
    g["head_w1"] = np.outer(dpre2, cache["z"])
    g["head_b1"] = dpre2
    dz = weights["head_w1"].T @ dpre2
    g["enc_w2"] = np.outer(dz, cache["h1"])
    g["enc_b2"] = dz
    dh1 = weights["enc_w2"].T @ dz
    dpre1 = dh1 * (1.0 - cache["h1"] ** 2)
    g["enc_w1"] = np.outer(dpre1, cache["inp"])
    g["enc_b1"] = dpre1
    return loss, g


def _prepare_batch(model, batch):
    return [_prepare_item(model, traj, st, qt, tg) for traj, st, qt, tg in batch]


def batch_loss(model: SurrogateModel, batch) -> float:
    """Mean over the batch of per-item MSE in normalized units."""
    if not batch:
        raise ValueError("batch must be nonempty")
    items = _prepare_batch(model, batch)
    return float(np.mean([
        _item_loss_grad(model.weights, model.n_terms, it, False)[0] for it in items
    ]))


def grad(model: SurrogateModel, batch) -> dict[str, np.ndarray]:
    """Exact reverse-mode gradient of batch_loss with respect to all weights.

    Batch items are (trajectory, split_time, query_times, targets) with
    targets in original units; both sides of the loss are divided by the
    per-trajectory prefix scale before squaring.
    """
    if not batch:
        raise ValueError("batch must be nonempty")
    items = _prepare_batch(model, batch)
    total = {key: np.zeros_like(val) for key, val in model.weights.items()}
    for it in items:
        _, g = _item_loss_grad(model.weights, model.n_terms, it, True)
        for key in total:
            total[key] += g[key]
    for key in total:
        total[key] /= len(items)
    return total


def train(dataset, config: TrainConfig, rng: SeededRng | None = None,
          test_set=None) -> tuple[SurrogateModel, TrainReport]:
    """Minibatch gradient descent for exactly config.epochs epochs.

    `dataset` is a sequence of trajectories (or records with a
    .trajectory attribute). Each trajectory is split at config.split_time:
    the prefix feeds the encoder and the post-split observations are the
    targets. Deterministic in (dataset, config): initialization and batch
    order both derive from config.seed unless an explicit rng is given.
    """
    trajs = [getattr(item, "trajectory", item) for item in dataset]
    if not trajs:
        raise ValueError("dataset must be nonempty")
    model = init_model(config)
    k = config.query_count

    items = []
    for traj in trajs:
        post = traj.grid.times > config.split_time
        if not post.any():
            raise ValueError("trajectory has no observations after split_time")
        items.append(_prepare_item(
            model, traj, config.split_time, traj.grid.times[post], traj.values[post]
        ))

    order_gen = (rng or SeededRng(config.seed, stream=1)).generator()
    opt_state = None
    if config.optimizer == "adam":
        opt_state = {
            key: (np.zeros_like(val), np.zeros_like(val))
            for key, val in model.weights.items()
        }
    step = 0
    losses = []
    for epoch in range(config.epochs):
        perm = order_gen.permutation(len(items))
        epoch_losses = []
        for start in range(0, len(items), config.batch_size):
            batch = [items[i] for i in perm[start:start + config.batch_size]]
            total = {key: np.zeros_like(val) for key, val in model.weights.items()}
            batch_loss_sum = 0.0
            for it in batch:
                loss, g = _item_loss_grad(model.weights, k, it, True)
                batch_loss_sum += loss
                for key in total:
                    total[key] += g[key]
            n = len(batch)
            epoch_losses.append(batch_loss_sum / n)
            step += 1
            for key in model.weights:
                g_mean = total[key] / n
                if config.optimizer == "sgd":
                    model.weights[key] -= config.learning_rate * g_mean
                else:
                    m1, m2 = opt_state[key]
                    m1 *= 0.9
                    m1 += 0.1 * g_mean
                    m2 *= 0.999
                    m2 += 0.001 * g_mean**2
                    m1_hat = m1 / (1 - 0.9**step)
                    m2_hat = m2 / (1 - 0.999**step)
                    model.weights[key] -= config.learning_rate * m1_hat / (np.sqrt(m2_hat) + 1e-8)
        mean_loss = float(np.mean(epoch_losses))
        if not np.isfinite(mean_loss):
            raise TrainingDivergedError(epoch)
        losses.append(mean_loss)

    final_rmse = None
    if test_set is not None:
        sq, count = 0.0, 0
        for item in test_set:
            traj = getattr(item, "trajectory", item)
            post = traj.grid.times > config.split_time
            pred = predict(model, traj, config.split_time, traj.grid.times[post])
            _, scale = normalize_prefix(traj, config.split_time, model.input_grid_size)
            err = (pred - traj.values[post]) / scale
            sq += float(np.sum(err**2))
            count += err.size
        final_rmse = float(np.sqrt(sq / count))
    return model, TrainReport(losses, final_rmse)


def baseline_exponential_fit(traj: Trajectory, split_time: float) -> tuple[float, float]:
    """OLS of log(value) on time over the prefix; returns (x0_hat, mu_hat).

    Predict at time t with x0_hat * exp(mu_hat * t).
    """
    mask = traj.grid.times <= split_time
    if mask.sum() < 2:
        raise ValueError("prefix needs at least 2 observations")
    t = traj.grid.times[mask]
    x = traj.values[mask]
    if (x <= 0).any():
        raise ValueError("exponential fit requires strictly positive prefix values")
    mu_hat, log_x0 = np.polyfit(t, np.log(x), 1)
    return float(np.exp(log_x0)), float(mu_hat)


def baseline_constant_last(traj: Trajectory, split_time: float) -> float:
    """Last observed prefix value, used as a constant forecast."""
    mask = traj.grid.times <= split_time
    if not mask.any():
        raise ValueError("prefix is empty")
    return float(traj.values[mask][-1])


FORMAT_VERSION = 1


def save_model(model: SurrogateModel, path) -> None:
    """Serialize config and weights; round-trips bit-identically."""
    meta = {
        "format_version": FORMAT_VERSION,
        "sigma0": model.ilt_config.sigma0,
        "n_terms": model.ilt_config.n_terms,
        "horizon": model.ilt_config.horizon,
        "smoothing": model.ilt_config.smoothing,
        "input_grid_size": model.input_grid_size,
    }
    arrays = {key: model.weights[key] for key in _WEIGHT_KEYS}
    with open(path, "wb") as fh:
        np.savez(fh, meta=json.dumps(meta, sort_keys=True), **arrays)


def load_model(path) -> SurrogateModel:
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta["format_version"] != FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {meta['format_version']}")
        weights = {key: data[key] for key in _WEIGHT_KEYS}
    ilt_config = IltConfig(
        sigma0=meta["sigma0"], n_terms=meta["n_terms"],
        horizon=meta["horizon"], smoothing=meta["smoothing"],
    )
    return SurrogateModel(weights, ilt_config, meta["input_grid_size"])
