import math

import numpy as np
import pytest

from twinae.nn import (Adam, DenseLayer, Mlp, TrainingError, dense,
                       glorot_init, minibatch_iter, mlp_backward, mlp_forward)


def finite_difference_grads(loss_fn, params, h=1e-5):
    """Central-difference gradient of a scalar loss over parameter arrays."""
    grads = []
    for p in params:
        g = np.zeros_like(p)
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            i = it.multi_index
            old = p[i]
            p[i] = old + h
            up = loss_fn()
            p[i] = old - h
            down = loss_fn()
            p[i] = old
            g[i] = (up - down) / (2 * h)
        grads.append(g)
    return grads


def assert_grads_close(analytic, numeric, rtol=1e-4):
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-8)
        assert np.max(np.abs(a - n) / denom) < rtol


class TestGlorotInit:
    def test_bound_2_3(self):
        w = glorot_init(2, 3, np.random.default_rng(7))
        assert w.shape == (3, 2)
        limit = math.sqrt(6.0 / 5.0)
        assert np.all(np.abs(w) <= limit)

    def test_bound_1_1(self):
        w = glorot_init(1, 1, np.random.default_rng(0))
        assert w.shape == (1, 1)
        assert abs(w[0, 0]) <= math.sqrt(3.0)

    def test_deterministic(self):
        a = glorot_init(4, 5, np.random.default_rng(42))
        b = glorot_init(4, 5, np.random.default_rng(42))
        assert np.array_equal(a, b)

    def test_zero_dims_rejected(self):
        with pytest.raises(ValueError):
            glorot_init(0, 3, np.random.default_rng(0))
        with pytest.raises(ValueError):
            glorot_init(3, 0, np.random.default_rng(0))

    def test_bound_holds_for_many_shapes(self):
        rng = np.random.default_rng(3)
        for fan_in, fan_out in [(1, 7), (9, 2), (6, 6), (30, 4)]:
            w = glorot_init(fan_in, fan_out, rng)
            assert np.all(np.abs(w) <= math.sqrt(6.0 / (fan_in + fan_out)))


class TestForward:
    def test_identity_layer(self):
        net = Mlp([DenseLayer(np.eye(2), np.zeros(2), "identity")])
        out = mlp_forward(net, np.array([3.0, 4.0])).output
        assert np.array_equal(out, [3.0, 4.0])

    def test_relu(self):
        net = Mlp([DenseLayer(np.array([[1.0], [-1.0]]), np.zeros(2), "relu")])
        out = mlp_forward(net, np.array([2.0])).output
        assert np.array_equal(out, [2.0, 0.0])

    def test_tanh_scalar_oracle(self):
        # independent scalar evaluation of tanh(0.5 * 1.0 + 0.1)
        net = Mlp([DenseLayer(np.array([[0.5]]), np.array([0.1]), "tanh")])
        out = mlp_forward(net, np.array([1.0])).output
        assert out[0] == pytest.approx(math.tanh(0.6), abs=1e-15)

    def test_batch_matches_per_sample(self):
        rng = np.random.default_rng(11)
        net = Mlp([dense(3, 5, "relu", rng), dense(5, 2, "tanh", rng)])
        X = rng.normal(size=(6, 3))
        batch = mlp_forward(net, X).output
        for i, x in enumerate(X):
            # batched and single-row matmuls may differ in the last ulp
            np.testing.assert_allclose(batch[i], mlp_forward(net, x).output, atol=1e-12)

    def test_dimension_mismatch(self):
        net = Mlp([DenseLayer(np.eye(2), np.zeros(2), "identity")])
        with pytest.raises(ValueError):
            mlp_forward(net, np.array([1.0, 2.0, 3.0]))

    def test_activation_ranges(self):
        rng = np.random.default_rng(5)
        X = rng.normal(scale=3.0, size=(50, 4))
        relu_net = Mlp([dense(4, 6, "relu", rng)])
        tanh_net = Mlp([dense(4, 6, "tanh", rng)])
        assert np.all(mlp_forward(relu_net, X).output >= 0.0)
        out = mlp_forward(tanh_net, X).output
        assert np.all(out > -1.0) and np.all(out < 1.0)

    def test_forward_deterministic(self):
        rng = np.random.default_rng(9)
        net = Mlp([dense(4, 4, "tanh", rng)])
        x = np.arange(4.0)
        a = mlp_forward(net, x).output
        b = mlp_forward(net, x).output
        assert np.array_equal(a, b)


class TestBackward:
    def test_identity_layer_hand_derivation(self):
        # loss = 0.5 * |y|^2 with y = W x: dL/dW = y x^T, dL/dx = W^T y
        w = np.array([[1.0, 2.0], [-1.0, 0.5]])
        net = Mlp([DenseLayer(w, np.zeros(2), "identity")])
        x = np.array([3.0, -2.0])
        fwd = mlp_forward(net, x)
        y = fwd.output
        grads, gx = mlp_backward(net, fwd, y)
        np.testing.assert_allclose(grads[0][0], np.outer(y, x), atol=1e-15)
        np.testing.assert_allclose(grads[0][1], y, atol=1e-15)
        np.testing.assert_allclose(gx, w.T @ y, atol=1e-15)

    def test_two_layer_finite_difference(self):
        rng = np.random.default_rng(21)
        net = Mlp([dense(3, 4, "tanh", rng), dense(4, 2, "identity", rng)])
        x = rng.normal(size=3)
        target = rng.normal(size=2)

        def loss():
            out = mlp_forward(net, x).output
            return 0.5 * float(np.sum((out - target) ** 2))

        fwd = mlp_forward(net, x)
        grads, _ = mlp_backward(net, fwd, fwd.output - target)
        params = [p for layer in net.layers for p in (layer.weights, layer.bias)]
        flat = [g for gw_gb in grads for g in gw_gb]
        assert_grads_close(flat, finite_difference_grads(loss, params))

    def test_zero_output_gradient(self):
        rng = np.random.default_rng(2)
        net = Mlp([dense(3, 3, "relu", rng)])
        fwd = mlp_forward(net, rng.normal(size=3))
        grads, gx = mlp_backward(net, fwd, np.zeros(3))
        assert np.all(grads[0][0] == 0.0) and np.all(grads[0][1] == 0.0)
        assert np.all(gx == 0.0)

    def test_random_small_nets_match_finite_differences(self):
        # gradient-correctness property over random architectures
        rng = np.random.default_rng(123)
        activations = ["relu", "tanh", "identity"]
        for trial in range(8):
            depth = int(rng.integers(1, 4))
            dims = [int(rng.integers(1, 9)) for _ in range(depth + 1)]
            layers = [dense(dims[i], dims[i + 1], activations[int(rng.integers(3))], rng)
                      for i in range(depth)]
            net = Mlp(layers)
            x = rng.normal(size=dims[0])
            target = rng.normal(size=dims[-1])

            def loss():
                out = mlp_forward(net, x).output
                return 0.5 * float(np.sum((out - target) ** 2))

            fwd = mlp_forward(net, x)
            grads, _ = mlp_backward(net, fwd, fwd.output - target)
            params = [p for layer in net.layers for p in (layer.weights, layer.bias)]
            flat = [g for gw_gb in grads for g in gw_gb]
            assert_grads_close(flat, finite_difference_grads(loss, params))

    def test_stale_cache_rejected(self):
        rng = np.random.default_rng(1)
        net = Mlp([dense(2, 3, "relu", rng), dense(3, 2, "identity", rng)])
        other = Mlp([dense(2, 2, "identity", rng)])
        fwd = mlp_forward(other, np.zeros(2))
        with pytest.raises(ValueError):
            mlp_backward(net, fwd, np.zeros(2))


class TestLayerValidation:
    def test_bias_length_mismatch(self):
        with pytest.raises(ValueError):
            DenseLayer(np.eye(3), np.zeros(2), "relu")

    def test_unknown_activation(self):
        with pytest.raises(ValueError):
            DenseLayer(np.eye(2), np.zeros(2), "sigmoid")

    def test_incompatible_chain(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            Mlp([dense(2, 3, "relu", rng), dense(4, 2, "relu", rng)])

    def test_empty_mlp(self):
        with pytest.raises(ValueError):
            Mlp([])


class TestAdam:
    def test_zero_gradient_keeps_params(self):
        p = np.array([1.0, -2.0, 3.0])
        adam = Adam([p], learning_rate=0.1)
        adam.step([p], [np.zeros(3)])
        assert np.array_equal(p, [1.0, -2.0, 3.0])

    def test_single_step_hand_value(self):
        # with constant unit gradient the bias-corrected step is ~learning_rate
        p = np.array([0.5])
        adam = Adam([p], learning_rate=0.1)
        adam.step([p], [np.ones(1)])
        assert p[0] == pytest.approx(0.4, abs=1e-8)
        assert adam.step_count == 1

    def test_identical_runs_identical_trajectories(self):
        def run():
            rng = np.random.default_rng(17)
            p = np.array([1.0, 2.0])
            adam = Adam([p], learning_rate=0.05)
            for _ in range(20):
                adam.step([p], [rng.normal(size=2)])
            return p

        assert np.array_equal(run(), run())

    def test_non_finite_gradient_raises(self):
        p = np.zeros(2)
        adam = Adam([p], learning_rate=0.1)
        with pytest.raises(TrainingError):
            adam.step([p], [np.array([1.0, np.nan])])

    def test_shape_mismatch(self):
        p = np.zeros(2)
        adam = Adam([p], learning_rate=0.1)
        with pytest.raises(ValueError):
            adam.step([p], [np.zeros(3)])


class TestMinibatchIter:
    def test_sizes_and_union(self):
        batches = list(minibatch_iter(5, 2, np.random.default_rng(0)))
        assert [len(b) for b in batches] == [2, 2, 1]
        assert sorted(np.concatenate(batches).tolist()) == [0, 1, 2, 3, 4]

    def test_single_batch(self):
        batches = list(minibatch_iter(100, 100, np.random.default_rng(0)))
        assert len(batches) == 1 and len(batches[0]) == 100

    def test_seed_reproducible(self):
        a = list(minibatch_iter(20, 6, np.random.default_rng(4)))
        b = list(minibatch_iter(20, 6, np.random.default_rng(4)))
        for x, y in zip(a, b):
            assert np.array_equal(x, y)

    def test_each_epoch_is_a_permutation(self):
        rng = np.random.default_rng(8)
        for _ in range(3):
            idx = np.concatenate(list(minibatch_iter(17, 4, rng)))
            assert sorted(idx.tolist()) == list(range(17))

    def test_invalid_batch_size(self):
        with pytest.raises(ValueError):
            list(minibatch_iter(5, 0, np.random.default_rng(0)))
