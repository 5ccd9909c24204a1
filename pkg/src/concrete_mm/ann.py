"""Feed-forward ReLU regressor trained by plain minibatch SGD with backprop.

Loss is the batch MSE plus ``l2 * sum(W**2)`` over weight matrices only.
Targets stay in MPa; inputs are z-scored by a training-set ``Scaler``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .data import Dataset, Scaler

log = logging.getLogger(__name__)

ARCHITECTURE = (8, 64, 64, 32, 16, 16, 1)


class DivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 1000
    learning_rate: float = 1e-4
    batch_size: int = 16
    l2: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.epochs <= 0 or self.batch_size <= 0:
            raise ValueError("epochs and batch_size must be positive")
        if self.learning_rate <= 0 or self.l2 < 0:
            raise ValueError("learning_rate must be positive and l2 non-negative")


@dataclass(eq=False)
class AnnParameters:
    """``weights[l]`` has shape (fan_in, fan_out); ``biases[l]`` has shape (fan_out,)."""

    weights: list
    biases: list

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("need one bias vector per weight matrix")
        for l, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.ndim != 2 or b.shape != (W.shape[1],):
                raise ValueError(f"layer {l}: bias shape {b.shape} does not match W {W.shape}")
            if l and W.shape[0] != self.weights[l - 1].shape[1]:
                raise ValueError(f"layer {l}: fan-in {W.shape[0]} does not match previous layer")
            if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {l}: non-finite parameters")

    @property
    def widths(self) -> tuple:
        return (self.weights[0].shape[0],) + tuple(W.shape[1] for W in self.weights)

    def copy(self) -> "AnnParameters":
        return AnnParameters([W.copy() for W in self.weights], [b.copy() for b in self.biases])

    def to_dict(self) -> dict:
        return {
            "widths": list(self.widths),
            "weights": [W.tolist() for W in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, d) -> "AnnParameters":
        return cls(
            [np.array(W, dtype=float).reshape(len(W), -1) for W in d["weights"]],
            [np.array(b, dtype=float) for b in d["biases"]],
        )


def ann_init(widths=ARCHITECTURE, seed: int = 0) -> AnnParameters:
    """Uniform weights with variance 2/fan_in, zero biases."""
    widths = tuple(int(w) for w in widths)
    if len(widths) < 2 or any(w <= 0 for w in widths):
        raise ValueError(f"invalid layer widths {widths}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        limit = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return AnnParameters(weights, biases)


def _forward(params: AnnParameters, Z: np.ndarray) -> list:
    # activations[0] is the input, activations[-1] the linear output
    activations = [Z]
    h = Z
    last = len(params.weights) - 1
    for l, (W, b) in enumerate(zip(params.weights, params.biases)):
        a = h @ W + b
        h = a if l == last else np.maximum(a, 0.0)
        activations.append(h)
    return activations


def ann_forward(params: AnnParameters, Z) -> np.ndarray | float:
    """Predict from standardized inputs; a single 8-vector gives a float."""
    Z = np.asarray(Z, dtype=float)
    single = Z.ndim == 1
    Z2 = np.atleast_2d(Z)
    if Z2.shape[1] != params.widths[0]:
        raise ValueError(f"expected {params.widths[0]} inputs, got {Z2.shape[1]}")
    if not np.all(np.isfinite(Z2)):
        raise ValueError("non-finite network input")
    out = _forward(params, Z2)[-1][:, 0]
    return float(out[0]) if single else out


def ann_loss(params: AnnParameters, Z, y, l2: float) -> float:
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if len(y) == 0:
        raise ValueError("empty batch")
    residual = _forward(params, Z)[-1][:, 0] - y
    penalty = sum(float(np.sum(W * W)) for W in params.weights)
    return float(np.mean(residual**2)) + l2 * penalty


def ann_gradients(params: AnnParameters, Z, y, l2: float):
    """Loss and its gradients with respect to every weight matrix and bias vector."""
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    acts = _forward(params, Z)
    residual = acts[-1][:, 0] - y
    n = len(y)
    loss = float(np.mean(residual**2)) + l2 * sum(float(np.sum(W * W)) for W in params.weights)

    grad_W = [None] * len(params.weights)
    grad_b = [None] * len(params.weights)
    delta = (2.0 / n) * residual[:, None]
    for l in range(len(params.weights) - 1, -1, -1):
        grad_W[l] = acts[l].T @ delta + 2.0 * l2 * params.weights[l]
        grad_b[l] = delta.sum(axis=0)
        if l:
            delta = (delta @ params.weights[l].T) * (acts[l] > 0)
    return loss, grad_W, grad_b


def ann_train(train: Dataset, scaler: Scaler, cfg: TrainConfig = TrainConfig(), widths=ARCHITECTURE):
    """Fit by SGD; returns the parameters and per-epoch training-set MSE.

    Initialization and shuffling draw from independent streams derived from
    ``cfg.seed``. The last partial batch of each epoch is kept.
    """
    if len(train) == 0:
        raise ValueError("empty training set")
    Z = scaler.transform(train.X)
    y = train.y
    init_seed, shuffle_seed = np.random.SeedSequence(cfg.seed).spawn(2)
    params = ann_init(widths, seed=init_seed)
    rng = np.random.default_rng(shuffle_seed)
    n = len(y)
    history = np.empty(cfg.epochs)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        # overflow shows up as a non-finite epoch loss, checked below
        with np.errstate(over="ignore", invalid="ignore"):
            for start in range(0, n, cfg.batch_size):
                batch = order[start:start + cfg.batch_size]
                _, gW, gb = ann_gradients(params, Z[batch], y[batch], cfg.l2)
                for l in range(len(params.weights)):
                    params.weights[l] -= cfg.learning_rate * gW[l]
                    params.biases[l] -= cfg.learning_rate * gb[l]
            mse = float(np.mean((_forward(params, Z)[-1][:, 0] - y) ** 2))
        if not np.isfinite(mse):
            raise DivergenceError(
                f"ANN training diverged at epoch {epoch + 1}: loss is {mse}; "
                f"try a smaller learning rate than {cfg.learning_rate}"
            )
        history[epoch] = mse
        if (epoch + 1) % 100 == 0:
            log.debug("epoch %d training MSE %.4f", epoch + 1, mse)
    return params, history


class AnnRegressor:
    """Trained network bundled with its input scaler; predicts from raw features."""

    name = "ANN"

    def __init__(self, params: AnnParameters, scaler: Scaler, history=None):
        self.params = params
        self.scaler = scaler
        self.history = history

    @classmethod
    def fit(cls, train: Dataset, scaler: Scaler, cfg: TrainConfig = TrainConfig()):
        params, history = ann_train(train, scaler, cfg)
        return cls(params, scaler, history)

    def predict(self, X) -> np.ndarray:
        return np.atleast_1d(ann_forward(self.params, self.scaler.transform(np.atleast_2d(X))))
