"""Tests for float and stream-domain network evaluation."""

import math

import numpy as np
import pytest

from mtjsc.network import (
    EvalConfig,
    LayerSpec,
    NetworkSpec,
    accuracy,
    child_seed,
    classify,
    load_network,
    network_forward,
    network_forward_float,
    neuron_forward_float,
    neuron_forward_isc,
    save_network,
)
from mtjsc.streams import Format, StochasticStream, value_of


def bip_stream(v, n, seed):
    rng = np.random.default_rng(seed)
    return StochasticStream((rng.random(n) < (v + 1) / 2).astype(np.uint8),
                            Format.BIPOLAR)


class TestFloatNeuron:
    def test_cancellation(self):
        a, t = neuron_forward_float([1.0, -1.0], [1.0, 1.0], 2.0)
        assert a == 0.0 and t == 0.0

    def test_single_weight(self):
        a, t = neuron_forward_float([0.5], [1.0], 2.0)
        assert a == pytest.approx(1.0)
        assert t == pytest.approx(math.tanh(1.0))

    def test_zero_weights(self):
        a, t = neuron_forward_float(np.zeros(5), np.ones(5), 3.0)
        assert a == 0.0 and t == 0.0

    def test_scaled_form_matches_unipolar_sum(self):
        """(M/2)(w.x + w.1) equals the plain weighted sum of (x+1)/2 inputs
        under the unscaled weights M*w."""
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = rng.integers(1, 20)
            w = rng.uniform(-1, 1, n)
            x = rng.uniform(-1, 1, n)
            m = rng.uniform(1, 5)
            a, _ = neuron_forward_float(w, x, m)
            direct = np.sum((m * w) * ((x + 1) / 2))
            assert a == pytest.approx(direct, abs=1e-12)


class TestIscNeuron:
    def test_cancellation_statistical(self):
        ones = StochasticStream(np.ones(512, dtype=np.uint8), Format.BIPOLAR)
        vals = []
        for s in range(48):
            rng = child_seed(s, 1)
            out = neuron_forward_isc(np.array([1.0, -1.0]), [ones, ones], 2.0,
                                     EvalConfig(stream_length=512), rng)
            vals.append(value_of(out))
        assert abs(np.mean(vals)) <= 0.05

    def test_zero_weights_statistical(self):
        cfg = EvalConfig(stream_length=512)
        vals = []
        for s in range(48):
            rng = child_seed(100 + s, 1)
            xs = [bip_stream(0.0, 512, 500 + 8 * s + i) for i in range(8)]
            vals.append(value_of(neuron_forward_isc(np.zeros(8), xs, 2.0, cfg, rng)))
        assert abs(np.mean(vals)) <= 0.05

    def test_tracks_float_reference(self):
        """Mean |delta t| across random 8-input neurons stays within 0.08."""
        cfg = EvalConfig(stream_length=512)
        errs = []
        for trial in range(100):
            rng = np.random.default_rng(trial)
            w = rng.uniform(-1, 1, 8)
            x = rng.uniform(-1, 1, 8)
            _, t_ref = neuron_forward_float(w, x, 2.0)
            srng = child_seed(trial, 2)
            xs = [bip_stream(xi, 512, 900 + 16 * trial + i)
                  for i, xi in enumerate(x)]
            errs.append(abs(value_of(
                neuron_forward_isc(w, xs, 2.0, cfg, srng)) - t_ref))
        assert np.mean(errs) <= 0.08

    def test_stream_length_mismatch(self):
        xs = [bip_stream(0.0, 128, 1), bip_stream(0.0, 256, 2)]
        with pytest.raises(ValueError):
            neuron_forward_isc(np.zeros(2), xs, 1.0, EvalConfig(stream_length=128),
                               child_seed(0))


class TestNetworkForward:
    def net_1layer(self, weights, m=1.0):
        return NetworkSpec((LayerSpec(np.asarray(weights, dtype=float), m),))

    def test_zero_network(self):
        net = self.net_1layer(np.zeros((4, 3)))
        out = network_forward_float(net, np.array([0.5, -0.5, 1.0, 0.0]))
        assert np.all(out == 0.0)

    def test_float_path_composes(self):
        rng = np.random.default_rng(1)
        w1 = rng.uniform(-1, 1, (4, 3))
        w2 = rng.uniform(-1, 1, (3, 2))
        net = NetworkSpec((LayerSpec(w1, 2.0), LayerSpec(w2, 1.5)))
        x = rng.uniform(-1, 1, 4)
        h = np.tanh(0.5 * 2.0 * (w1.T @ x + w1.sum(axis=0)))
        expect = np.tanh(0.5 * 1.5 * (w2.T @ h + w2.sum(axis=0)))
        assert network_forward(net, x, EvalConfig()) == pytest.approx(expect)

    def test_isc_deterministic_given_seed(self):
        rng = np.random.default_rng(2)
        net = self.net_1layer(rng.uniform(-1, 1, (6, 2)), m=2.0)
        x = rng.uniform(-1, 1, 6)
        cfg = EvalConfig(stream_length=128, seed=5)
        out1 = network_forward(net, x, cfg, sample_key=(0,))
        out2 = network_forward(net, x, cfg, sample_key=(0,))
        assert np.array_equal(out1, out2)

    def test_precision_monotonicity(self):
        """Mean abs deviation from float shrinks from n=128 to n=2048."""
        rng = np.random.default_rng(3)
        net = self.net_1layer(rng.uniform(-1, 1, (6, 3)), m=2.0)
        devs = {128: [], 2048: []}
        for trial in range(100):
            x = np.random.default_rng(50 + trial).uniform(-1, 1, 6)
            ref = network_forward_float(net, x)
            for n in devs:
                cfg = EvalConfig(stream_length=n, seed=trial)
                out = network_forward(net, x, cfg, sample_key=(trial,))
                devs[n].append(np.mean(np.abs(out - ref)))
        assert np.mean(devs[2048]) < np.mean(devs[128])

    def test_dimension_mismatch(self):
        net = self.net_1layer(np.zeros((4, 2)))
        with pytest.raises(ValueError):
            network_forward(net, np.zeros(3), EvalConfig())


class TestClassify:
    def test_argmax(self):
        assert classify(np.array([0.9, -0.2])) == 0
        assert classify(np.array([-0.5, 0.1, 0.9])) == 2

    def test_tie_breaks_low(self):
        assert classify(np.array([0.3, 0.3, 0.3])) == 0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            classify(np.array([]))

    def test_single_sample_accuracy(self):
        net = NetworkSpec((LayerSpec(np.array([[1.0, -1.0]]), 1.0),))
        feats = np.array([[1.0]])
        assert accuracy(net, feats, np.array([0]), EvalConfig()) == 1.0

    def test_empty_dataset_rejected(self):
        net = NetworkSpec((LayerSpec(np.array([[1.0, -1.0]]), 1.0),))
        with pytest.raises(ValueError):
            accuracy(net, np.zeros((0, 1)), np.array([]), EvalConfig())


class TestPersistence:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(4)
        net = NetworkSpec(
            (LayerSpec(rng.uniform(-1, 1, (5, 4)), 2.25),
             LayerSpec(rng.uniform(-1, 1, (4, 2)), 1.0)),
            feature_scaling=(rng.uniform(-3, 0, 5), rng.uniform(1, 4, 5)))
        path = tmp_path / "weights.json"
        save_network(net, path)
        back = load_network(path)
        assert back.dims == net.dims
        for a, b in zip(back.layers, net.layers):
            assert a.m_scale == b.m_scale
            assert np.array_equal(a.weights, b.weights)
        assert np.array_equal(back.feature_scaling[0], net.feature_scaling[0])
        assert np.array_equal(back.feature_scaling[1], net.feature_scaling[1])

    def test_validation(self):
        with pytest.raises(ValueError):
            LayerSpec(np.array([[1.5]]), 1.0)
        with pytest.raises(ValueError):
            LayerSpec(np.array([[0.5]]), 0.5)
        with pytest.raises(ValueError):
            NetworkSpec((LayerSpec(np.zeros((3, 2)), 1.0),
                         LayerSpec(np.zeros((4, 1)), 1.0)))

    def test_eval_config_lengths(self):
        with pytest.raises(ValueError):
            EvalConfig(stream_length=100)
        EvalConfig(stream_length=512)
