"""Float-domain MLP training by mini-batch gradient descent.

Networks are tanh-activated and bias-free so the trained weights drop
straight into the scaled stream-domain form.  Targets are one-hot vectors
at +-0.9, which keeps the tanh outputs off their saturated tails.  The
learning rate halves whenever an epoch fails to reduce the full training
loss (the epoch is rolled back), so the recorded loss history never
increases.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .datasets import Dataset
from .network import LayerSpec, NetworkSpec

TARGET_HIGH = 0.9
TARGET_LOW = -0.9


@dataclass(frozen=True)
class TrainConfig:
    eta: float = 0.1
    epochs: int = 40
    batch_size: int = 32
    seed: int = 0
    add_constant_feature: bool = False  # optional bias-like +1 input, off by default

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("learning rate must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch size must be >= 1")


@dataclass(frozen=True)
class RawNetwork:
    """Unscaled trained weights plus the per-epoch training record."""

    weights: tuple[np.ndarray, ...]
    history: tuple[dict, ...] = ()
    feature_scaling: tuple | None = None


def one_hot_targets(labels: np.ndarray, n_classes: int) -> np.ndarray:
    y = np.full((labels.size, n_classes), TARGET_LOW)
    y[np.arange(labels.size), labels] = TARGET_HIGH
    return y


def forward_raw(weights, x: np.ndarray) -> list[np.ndarray]:
    """Per-layer tanh activations for a batch of bipolar inputs.

    Each layer's weighted sum runs over the unipolar view (v + 1) / 2 of the
    incoming bipolar signal, which is exactly the function the scaled
    (M/2)-form network computes, so trained weights transfer unchanged.
    """
    outs = []
    h = np.asarray(x, dtype=float)
    for w in weights:
        h = np.tanh(((h + 1.0) * 0.5) @ w)
        outs.append(h)
    return outs


def loss_and_gradients(weights, x: np.ndarray, y: np.ndarray):
    """Mean squared error (0.5 * sum over outputs) and its weight gradients."""
    acts = forward_raw(weights, x)
    batch = x.shape[0]
    loss = 0.5 * float(np.sum((acts[-1] - y) ** 2)) / batch
    grads = []
    delta = (acts[-1] - y) * (1.0 - acts[-1] ** 2)
    for k in range(len(weights) - 1, -1, -1):
        below = acts[k - 1] if k > 0 else np.asarray(x, dtype=float)
        grads.append(((below + 1.0) * 0.5).T @ delta / batch)
        if k > 0:
            delta = 0.5 * (delta @ weights[k].T) * (1.0 - acts[k - 1] ** 2)
    grads.reverse()
    return loss, grads


def _init_weights(dims, rng) -> list[np.ndarray]:
    weights = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
    return weights


def _train_accuracy(weights, x, labels) -> float:
    outputs = forward_raw(weights, x)[-1]
    return float(np.mean(np.argmax(outputs, axis=1) == labels))


def train_backprop(dims, dataset: Dataset, config: TrainConfig,
                   validation: Dataset | None = None) -> RawNetwork:
    """Gradient-descent training of a tanh MLP on [-1, 1] features.

    dims is (I, J) or (I, L, J) and must match the dataset; a divergent run
    (non-finite loss) aborts with a diagnostic.
    """
    dims = tuple(dims)
    x = dataset.features
    if config.add_constant_feature:
        x = np.hstack([x, np.ones((x.shape[0], 1))])
    if dims[0] != x.shape[1]:
        raise ValueError(f"dims {dims} do not match {x.shape[1]} features")
    if dims[-1] < dataset.n_classes:
        raise ValueError("output layer smaller than the number of classes")
    y = one_hot_targets(dataset.labels, dims[-1])
    rng = np.random.default_rng(config.seed)
    weights = _init_weights(dims, rng)
    eta = config.eta
    history = []
    prev_loss, _ = loss_and_gradients(weights, x, y)
    for epoch in range(config.epochs):
        snapshot = [w.copy() for w in weights]
        order = rng.permutation(x.shape[0])
        for start in range(0, x.shape[0], config.batch_size):
            idx = order[start:start + config.batch_size]
            _, grads = loss_and_gradients(weights, x[idx], y[idx])
            for w, g in zip(weights, grads):
                w -= eta * g
        loss, _ = loss_and_gradients(weights, x, y)
        if not np.isfinite(loss):
            raise RuntimeError(
                f"training diverged at epoch {epoch} (loss = {loss}); "
                f"lower eta (currently {eta})")
        if loss > prev_loss:
            weights = snapshot
            eta *= 0.5
            loss = prev_loss
            if eta < 1e-12:
                break
        record = {"epoch": epoch, "loss": loss, "eta": eta,
                  "train_accuracy": _train_accuracy(weights, x, dataset.labels)}
        if validation is not None:
            vx = validation.features
            if config.add_constant_feature:
                vx = np.hstack([vx, np.ones((vx.shape[0], 1))])
            record["val_accuracy"] = _train_accuracy(weights, vx,
                                                     validation.labels)
        history.append(record)
        prev_loss = loss
    scaling = None
    if dataset.scaling_lo is not None:
        scaling = (dataset.scaling_lo, dataset.scaling_hi)
    return RawNetwork(tuple(weights), tuple(history), scaling)


def scale_weights(raw: RawNetwork) -> NetworkSpec:
    """Map each layer into [-1, 1] with M = max(1, max|w|) pulled out."""
    layers = []
    for w in raw.weights:
        m = max(1.0, float(np.max(np.abs(w))))
        layers.append(LayerSpec(w / m, m))
    scaling = None
    if raw.feature_scaling is not None:
        scaling = (np.asarray(raw.feature_scaling[0]),
                   np.asarray(raw.feature_scaling[1]))
    return NetworkSpec(tuple(layers), scaling)
