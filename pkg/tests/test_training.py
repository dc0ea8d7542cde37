"""Tests for gradient-descent training and weight scaling."""

import numpy as np
import pytest

from mtjsc.datasets import Dataset
from mtjsc.network import network_forward_float
from mtjsc.training import (
    RawNetwork,
    TrainConfig,
    forward_raw,
    loss_and_gradients,
    one_hot_targets,
    scale_weights,
    train_backprop,
)


def toy_dataset():
    # linearly separable two-point problem
    feats = np.array([[0.8, -0.8], [-0.8, 0.8]])
    labels = np.array([0, 1])
    return Dataset(feats, labels, n_classes=2)


def blob_dataset(n=120, seed=0):
    rng = np.random.default_rng(seed)
    centers = np.array([[0.6, 0.6], [-0.6, 0.0], [0.2, -0.7]])
    feats, labels = [], []
    for k, c in enumerate(centers):
        feats.append(np.clip(c + rng.normal(scale=0.18, size=(n // 3, 2)), -1, 1))
        labels.append(np.full(n // 3, k))
    return Dataset(np.vstack(feats), np.concatenate(labels), n_classes=3)


class TestGradients:
    def test_matches_central_differences(self):
        """Analytic gradients vs finite differences on a 3-2-2 net."""
        rng = np.random.default_rng(0)
        weights = [rng.uniform(-0.8, 0.8, (3, 2)), rng.uniform(-0.8, 0.8, (2, 2))]
        x = rng.uniform(-1, 1, (5, 3))
        y = one_hot_targets(rng.integers(0, 2, 5), 2)
        _, grads = loss_and_gradients(weights, x, y)
        h = 1e-5
        for k, w in enumerate(weights):
            for idx in np.ndindex(w.shape):
                orig = w[idx]
                w[idx] = orig + h
                up, _ = loss_and_gradients(weights, x, y)
                w[idx] = orig - h
                dn, _ = loss_and_gradients(weights, x, y)
                w[idx] = orig
                numeric = (up - dn) / (2 * h)
                scale = max(abs(numeric), abs(grads[k][idx]), 1e-8)
                assert abs(grads[k][idx] - numeric) / scale < 1e-4

    def test_every_experiment_shape(self):
        rng = np.random.default_rng(1)
        for dims in [(6, 2), (6, 4, 2), (10, 3, 5)]:
            weights = [rng.uniform(-0.5, 0.5, (a, b))
                       for a, b in zip(dims[:-1], dims[1:])]
            x = rng.uniform(-1, 1, (4, dims[0]))
            y = one_hot_targets(rng.integers(0, dims[-1], 4), dims[-1])
            _, grads = loss_and_gradients(weights, x, y)
            h = 1e-5
            w = weights[0]
            idx = (0, 0)
            orig = w[idx]
            w[idx] = orig + h
            up, _ = loss_and_gradients(weights, x, y)
            w[idx] = orig - h
            dn, _ = loss_and_gradients(weights, x, y)
            w[idx] = orig
            numeric = (up - dn) / (2 * h)
            assert grads[0][idx] == pytest.approx(numeric, rel=1e-4, abs=1e-8)


class TestTrainBackprop:
    def test_separable_toy_converges(self):
        raw = train_backprop((2, 2), toy_dataset(),
                             TrainConfig(eta=0.5, epochs=200, batch_size=2, seed=1))
        assert raw.history[-1]["train_accuracy"] == 1.0

    def test_loss_history_nonincreasing(self):
        raw = train_backprop((2, 4, 3), blob_dataset(),
                             TrainConfig(eta=0.8, epochs=60, batch_size=16, seed=2))
        losses = [rec["loss"] for rec in raw.history]
        assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))

    def test_hidden_layer_learns_blobs(self):
        data = blob_dataset()
        raw = train_backprop((2, 6, 3), data,
                             TrainConfig(eta=0.3, epochs=120, batch_size=8, seed=3))
        assert raw.history[-1]["train_accuracy"] >= 0.9

    def test_deterministic(self):
        cfg = TrainConfig(eta=0.3, epochs=10, batch_size=8, seed=4)
        r1 = train_backprop((2, 3), blob_dataset(), cfg)
        r2 = train_backprop((2, 3), blob_dataset(), cfg)
        for a, b in zip(r1.weights, r2.weights):
            assert np.array_equal(a, b)

    def test_validation_history(self):
        data = blob_dataset()
        raw = train_backprop((2, 3), data,
                             TrainConfig(epochs=5, seed=5), validation=data)
        assert all("val_accuracy" in rec for rec in raw.history)

    def test_dims_must_match(self):
        with pytest.raises(ValueError):
            train_backprop((3, 2), toy_dataset(), TrainConfig())

    def test_divergence_detected(self):
        data = blob_dataset()
        with pytest.raises(RuntimeError, match="diverged"):
            train_backprop((2, 3), data, TrainConfig(eta=1e9, epochs=3, seed=6))


class TestScaleWeights:
    def test_within_unit_range_unchanged(self):
        w = np.array([[0.5, -0.8], [0.1, 0.9]])
        net = scale_weights(RawNetwork((w,)))
        assert net.layers[0].m_scale == 1.0
        assert np.array_equal(net.layers[0].weights, w)

    def test_large_weight_sets_scale(self):
        w = np.array([[3.0, -1.5]])
        net = scale_weights(RawNetwork((w,)))
        assert net.layers[0].m_scale == 3.0
        assert net.layers[0].weights[0, 0] == 1.0
        assert np.max(np.abs(net.layers[0].weights)) <= 1.0

    def test_round_trip(self):
        rng = np.random.default_rng(7)
        w = rng.uniform(-4, 4, (6, 3))
        net = scale_weights(RawNetwork((w,)))
        back = net.layers[0].weights * net.layers[0].m_scale
        assert back == pytest.approx(w, rel=1e-15, abs=0.0)

    def test_preserves_network_function(self):
        """Scaling then evaluating through the M/2 form equals the raw net."""
        rng = np.random.default_rng(8)
        raw_w = [rng.uniform(-3, 3, (5, 4)), rng.uniform(-2, 2, (4, 2))]
        net = scale_weights(RawNetwork(tuple(raw_w)))
        for _ in range(20):
            x = rng.uniform(-1, 1, 5)
            ref = forward_raw(raw_w, x[None, :])[-1][0]
            assert network_forward_float(net, x) == pytest.approx(ref, abs=1e-12)
