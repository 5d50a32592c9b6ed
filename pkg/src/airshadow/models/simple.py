"""k-nearest-neighbour, Gaussian naive Bayes, and multinomial logistic
regression."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import ModelSpec

#: Relative variance floor for naive Bayes, sized from the overall spread.
VAR_SMOOTHING = 1e-9


@dataclass
class KnnPayload:
    """Stored exemplars (already normalized); votes are neighbor fractions.

    Distance ties resolve to the lower training index via stable argsort.
    """

    X: np.ndarray
    y: np.ndarray
    k: int
    n_classes: int

    def scores(self, X: np.ndarray) -> np.ndarray:
        k = min(self.k, self.X.shape[0])
        out = np.empty((X.shape[0], self.n_classes))
        for i, x in enumerate(X):
            d2 = ((self.X - x) ** 2).sum(axis=1)
            neighbors = np.argsort(d2, kind="stable")[:k]
            out[i] = np.bincount(self.y[neighbors], minlength=self.n_classes) / k
        return out


@dataclass
class GnbPayload:
    """Class priors and per-class Gaussian moments (variances smoothed)."""

    priors: np.ndarray      # (C,)
    means: np.ndarray       # (C, F)
    variances: np.ndarray   # (C, F), already includes the smoothing term

    def scores(self, X: np.ndarray) -> np.ndarray:
        log_post = np.log(self.priors)[None, :] - 0.5 * (
            np.log(2.0 * np.pi * self.variances).sum(axis=1)[None, :]
            + (
                (X[:, None, :] - self.means[None, :, :]) ** 2 / self.variances[None, :, :]
            ).sum(axis=2)
        )
        log_post -= log_post.max(axis=1, keepdims=True)
        post = np.exp(log_post)
        return post / post.sum(axis=1, keepdims=True)


@dataclass
class LogRegPayload:
    """Softmax regression weights; last column is the bias."""

    W: np.ndarray  # (C, F+1)

    def scores(self, X: np.ndarray) -> np.ndarray:
        Xb = np.hstack([X, np.ones((X.shape[0], 1))])
        return _softmax(Xb @ self.W.T)


@dataclass
class MlpPayload:
    """Fully connected ReLU network ending in softmax."""

    weights: list[np.ndarray]  # (fan_in, fan_out) per layer
    biases: list[np.ndarray]

    def scores(self, X: np.ndarray) -> np.ndarray:
        a = X
        last = len(self.weights) - 1
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            a = a @ W + b
            if i < last:
                a = np.maximum(a, 0.0)
        return _softmax(a)


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def train_knn(spec: ModelSpec, X: np.ndarray, y: np.ndarray, n_classes: int) -> KnnPayload:
    return KnnPayload(X=X.copy(), y=y.copy(), k=int(spec.k or 10), n_classes=n_classes)


def train_gnb(spec: ModelSpec, X: np.ndarray, y: np.ndarray, n_classes: int) -> GnbPayload:
    n = X.shape[0]
    priors = np.bincount(y, minlength=n_classes) / n
    means = np.empty((n_classes, X.shape[1]))
    variances = np.empty_like(means)
    for c in range(n_classes):
        Xc = X[y == c]
        means[c] = Xc.mean(axis=0)
        variances[c] = Xc.var(axis=0)
    epsilon = max(VAR_SMOOTHING * float(X.var(axis=0).max()), 1e-12)
    variances += epsilon
    return GnbPayload(priors=priors, means=means, variances=variances)


def train_logreg(spec: ModelSpec, X: np.ndarray, y: np.ndarray, n_classes: int) -> LogRegPayload:
    """Full-batch gradient descent on the softmax cross-entropy.

    Deterministic: zero init, fixed learning rate, stop on gradient norm
    below 1e-6 or after the epoch budget.
    """
    n, n_features = X.shape
    lr = float(spec.learning_rate or 0.1)
    l2 = float(spec.l2 or 0.0)
    epochs = int(spec.epochs or 5000)
    Xb = np.hstack([X, np.ones((n, 1))])
    Y = np.zeros((n, n_classes))
    Y[np.arange(n), y] = 1.0
    W = np.zeros((n_classes, n_features + 1))
    penalty_mask = np.ones_like(W)
    penalty_mask[:, -1] = 0.0  # bias is not penalized
    for _ in range(epochs):
        P = _softmax(Xb @ W.T)
        grad = (P - Y).T @ Xb / n + l2 * W * penalty_mask
        if float(np.linalg.norm(grad)) < 1e-6:
            break
        W -= lr * grad
    return LogRegPayload(W=W)
