"""Small fully connected network trained with momentum SGD.

The loss/gradient pair is exposed as a pure function of the parameter list
so tests can check the analytic gradients against finite differences.
"""

from __future__ import annotations

import numpy as np

from ..rng import substream
from .base import ModelSpec
from .simple import MlpPayload, _softmax

MOMENTUM = 0.9


def init_params(
    layer_sizes: list[int], rng: np.random.Generator
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Uniform He-style init: W ~ U(-sqrt(6/fan_in), +sqrt(6/fan_in)), b = 0."""
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def loss_and_grads(
    weights: list[np.ndarray],
    biases: list[np.ndarray],
    X: np.ndarray,
    y: np.ndarray,
    l2: float = 0.0,
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Mean softmax cross-entropy and its gradients w.r.t. every parameter."""
    n = X.shape[0]
    last = len(weights) - 1
    activations = [X]
    pre: list[np.ndarray] = []
    a = X
    for i, (W, b) in enumerate(zip(weights, biases)):
        z = a @ W + b
        pre.append(z)
        a = np.maximum(z, 0.0) if i < last else z
        activations.append(a)
    probs = _softmax(activations[-1])
    eps = 1e-12
    loss = float(-np.log(probs[np.arange(n), y] + eps).mean())
    if l2:
        loss += 0.5 * l2 * sum(float((W * W).sum()) for W in weights)

    delta = probs.copy()
    delta[np.arange(n), y] -= 1.0
    delta /= n
    grads_w: list[np.ndarray] = [np.empty(0)] * len(weights)
    grads_b: list[np.ndarray] = [np.empty(0)] * len(weights)
    for i in range(last, -1, -1):
        grads_w[i] = activations[i].T @ delta + (l2 * weights[i] if l2 else 0.0)
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ weights[i].T) * (pre[i - 1] > 0.0)
    return loss, grads_w, grads_b


def train_mlp(spec: ModelSpec, X: np.ndarray, y: np.ndarray, n_classes: int) -> MlpPayload:
    n, n_features = X.shape
    hidden = list(spec.hidden or (64, 64, 64))
    sizes = [n_features] + hidden + [n_classes]
    lr = float(spec.learning_rate or 1e-3)
    l2 = float(spec.l2 or 0.0)
    epochs = int(spec.epochs or 200)
    batch = int(spec.batch_size or 32)

    weights, biases = init_params(sizes, substream(spec.seed, "init"))
    vel_w = [np.zeros_like(W) for W in weights]
    vel_b = [np.zeros_like(b) for b in biases]
    shuffle_rng = substream(spec.seed, "shuffle")
    for _ in range(epochs):
        order = shuffle_rng.permutation(n)
        for start in range(0, n, batch):
            rows = order[start:start + batch]
            _, gw, gb = loss_and_grads(weights, biases, X[rows], y[rows], l2)
            for i in range(len(weights)):
                vel_w[i] = MOMENTUM * vel_w[i] - lr * gw[i]
                vel_b[i] = MOMENTUM * vel_b[i] - lr * gb[i]
                weights[i] += vel_w[i]
                biases[i] += vel_b[i]
    return MlpPayload(weights=weights, biases=biases)
