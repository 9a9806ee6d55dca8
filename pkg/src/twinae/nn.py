"""Minimal dense neural-network substrate.

Plain float64 numpy throughout: affine layers with elementwise activations,
hand-written reverse-mode gradients, the Adam optimizer, and shuffled
mini-batch iteration. Gradients are analytic so they can be checked against
finite differences in tests.

Inputs may be a single vector ``(d,)`` or a batch ``(n, d)``; batch rows are
independent samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ACTIVATIONS = ("relu", "tanh", "identity")


class TrainingError(RuntimeError):
    """Optimization produced non-finite numbers."""


def _activate(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    return z


def _activation_grad(name: str, out: np.ndarray) -> np.ndarray:
    # Derivative w.r.t. the pre-activation, expressed through the layer output.
    if name == "relu":
        return (out > 0.0).astype(np.float64)
    if name == "tanh":
        return 1.0 - out * out
    return np.ones_like(out)


@dataclass
class DenseLayer:
    """One affine layer ``x -> act(weights @ x + bias)``.

    ``weights`` has shape (out, in); ``bias`` has length out.
    """

    weights: np.ndarray
    bias: np.ndarray
    activation: str = "identity"

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2:
            raise ValueError("weights must be 2-d (out x in)")
        if self.bias.shape != (self.weights.shape[0],):
            raise ValueError(
                f"bias length {self.bias.shape} does not match "
                f"{self.weights.shape[0]} output units"
            )
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    @property
    def fan_in(self) -> int:
        return self.weights.shape[1]

    @property
    def fan_out(self) -> int:
        return self.weights.shape[0]


class Mlp:
    """An ordered stack of DenseLayers with compatible dimensions."""

    def __init__(self, layers):
        layers = list(layers)
        if not layers:
            raise ValueError("Mlp needs at least one layer")
        for i, (prev, nxt) in enumerate(zip(layers, layers[1:])):
            if nxt.fan_in != prev.fan_out:
                raise ValueError(
                    f"layer {i} outputs {prev.fan_out} units but "
                    f"layer {i + 1} expects {nxt.fan_in}"
                )
        self.layers = layers

    @property
    def input_dim(self) -> int:
        return self.layers[0].fan_in

    @property
    def output_dim(self) -> int:
        return self.layers[-1].fan_out


def glorot_init(fan_in: int, fan_out: int, rng: np.random.Generator) -> np.ndarray:
    """Glorot-uniform matrix of shape (fan_out, fan_in).

    Entries are uniform on +-sqrt(6 / (fan_in + fan_out)); deterministic for
    a given generator state.
    """
    if fan_in < 1 or fan_out < 1:
        raise ValueError("fan_in and fan_out must be >= 1")
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


def dense(fan_in: int, fan_out: int, activation: str, rng: np.random.Generator) -> DenseLayer:
    """Glorot-initialized layer with zero bias."""
    return DenseLayer(glorot_init(fan_in, fan_out, rng), np.zeros(fan_out), activation)


def _as_batch(x, dim: int, what: str = "input"):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return x[None, :], True
    if x.ndim == 2:
        if x.shape[1] != dim:
            raise ValueError(f"{what} has dimension {x.shape[1]}, expected {dim}")
        return x, False
    raise ValueError(f"{what} must be 1-d or 2-d, got shape {x.shape}")


@dataclass
class ForwardPass:
    """Cached activations of one forward evaluation.

    ``activations[0]`` is the (batched) input; ``activations[i]`` is the
    output of layer i-1 and the input of layer i; ``activations[-1]`` is the
    network output. The cache is what backpropagation consumes.
    """

    activations: list
    squeezed: bool

    @property
    def output(self) -> np.ndarray:
        out = self.activations[-1]
        return out[0] if self.squeezed else out


def mlp_forward(net: Mlp, x) -> ForwardPass:
    """Evaluate the network, caching every layer activation."""
    a, squeezed = _as_batch(x, net.input_dim)
    if a.shape[1] != net.input_dim:
        raise ValueError(f"input has dimension {a.shape[1]}, expected {net.input_dim}")
    acts = [a]
    for layer in net.layers:
        z = acts[-1] @ layer.weights.T + layer.bias
        acts.append(_activate(layer.activation, z))
    return ForwardPass(acts, squeezed)


def mlp_backward(net: Mlp, fwd: ForwardPass, output_grad):
    """Reverse-mode gradients for a scalar loss.

    ``output_grad`` is dLoss/dOutput, shaped like ``fwd.output``. Returns
    ``(grads, input_grad)`` where grads is a list of (dweights, dbias) per
    layer and input_grad is dLoss/dInput. Parameter gradients are summed over
    batch rows.
    """
    if len(fwd.activations) != len(net.layers) + 1:
        raise ValueError("forward cache does not match this network")
    g = np.asarray(output_grad, dtype=np.float64)
    if g.ndim == 1:
        g = g[None, :]
    if g.shape != fwd.activations[-1].shape:
        raise ValueError(
            f"output_grad shape {g.shape} does not match cached output "
            f"{fwd.activations[-1].shape}"
        )
    grads = [None] * len(net.layers)
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        a_in, a_out = fwd.activations[i], fwd.activations[i + 1]
        gz = g * _activation_grad(layer.activation, a_out)
        grads[i] = (gz.T @ a_in, gz.sum(axis=0))
        g = gz @ layer.weights
    return grads, (g[0] if fwd.squeezed else g)


class Adam:
    """Adam state over a flat list of parameter arrays.

    Bias-corrected first/second moments; ``step`` updates the parameters in
    place. One trainer owns the state at a time.
    """

    def __init__(self, params, learning_rate: float = 1e-4,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params, grads) -> None:
        if len(params) != len(self.m) or len(grads) != len(self.m):
            raise ValueError("parameter/gradient list does not match optimizer state")
        for p, g in zip(params, grads):
            if p.shape != g.shape:
                raise ValueError(f"gradient shape {g.shape} does not match parameter {p.shape}")
            if not np.all(np.isfinite(g)):
                raise TrainingError("non-finite gradient encountered")
        self.step_count += 1
        t = self.step_count
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g
            m_hat = self.m[i] / (1.0 - self.beta1 ** t)
            v_hat = self.v[i] / (1.0 - self.beta2 ** t)
            p -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)


def minibatch_iter(n: int, batch_size: int, rng: np.random.Generator):
    """Yield shuffled index batches covering ``range(n)`` exactly once.

    The last batch may be short. Order is deterministic for a given
    generator state.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]
