"""Lightweight classifiers, all implemented from scratch and deterministic
for a fixed (spec, data, seed)."""

from __future__ import annotations

import warnings
from typing import Sequence

import numpy as np

from ..errors import EmptyDataset, LengthMismatch, NonFiniteFeature
from .base import (
    FAMILIES,
    ConstantPayload,
    ModelSpec,
    TrainedModel,
    encode_labels,
    normalization_stats,
)
from .io import load_model, model_from_text, model_to_text, save_model
from .mlp import train_mlp
from .simple import train_gnb, train_knn, train_logreg
from .trees import train_forest, train_tree

__all__ = [
    "FAMILIES",
    "ModelSpec",
    "TrainedModel",
    "train",
    "predict",
    "predict_scores",
    "save_model",
    "load_model",
    "model_to_text",
    "model_from_text",
    "table1_grid",
]

_TRAINERS = {
    "decision_tree": train_tree,
    "random_forest": train_forest,
    "knn": train_knn,
    "gaussian_nb": train_gnb,
    "logistic_regression": train_logreg,
    "mlp": train_mlp,
}


def train(spec: ModelSpec, X: np.ndarray, y: Sequence[str]) -> TrainedModel:
    """Fit one classifier; z-scores features first when the family calls
    for it (stats from the training data only).

    Single-class training degenerates to a constant predictor with a
    warning rather than an error.
    """
    spec = spec.resolved()
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyDataset("training needs a non-empty 2-D feature matrix")
    if X.shape[0] != len(y):
        raise LengthMismatch(f"{X.shape[0]} feature rows vs {len(y)} labels")
    if not np.isfinite(X).all():
        raise NonFiniteFeature("training features contain NaN or infinity")

    y_idx, classes = encode_labels(y)
    norm_mean = norm_std = None
    if spec.normalize:
        norm_mean, norm_std = normalization_stats(X)
        X = (X - norm_mean) / norm_std

    if len(classes) == 1:
        warnings.warn(
            f"training data has a single class {classes[0]!r}; "
            "returning a constant predictor",
            stacklevel=2,
        )
        payload = ConstantPayload(n_classes=1)
    else:
        payload = _TRAINERS[spec.family](spec, X, y_idx, len(classes))

    return TrainedModel(
        family=spec.family,
        classes=classes,
        n_features=X.shape[1],
        payload=payload,
        norm_mean=norm_mean,
        norm_std=norm_std,
        spec=spec,
    )


def predict(model: TrainedModel, x) -> np.ndarray | str:
    return model.predict(x)


def predict_scores(model: TrainedModel, x) -> np.ndarray:
    return model.predict_scores(x)


def table1_grid(seed: int = 0) -> list[ModelSpec]:
    """The benchmark grid: every non-SVM configuration of the model table."""
    return [
        ModelSpec("gaussian_nb", seed=seed),
        ModelSpec("decision_tree", max_depth=10, seed=seed),
        ModelSpec("decision_tree", max_depth=20, seed=seed),
        ModelSpec("decision_tree", max_depth=30, seed=seed),
        ModelSpec("decision_tree", max_depth=40, seed=seed),
        ModelSpec("knn", k=10, seed=seed),
        ModelSpec("knn", k=20, seed=seed),
        ModelSpec("knn", k=30, seed=seed),
        ModelSpec("knn", k=40, seed=seed),
        ModelSpec("logistic_regression", seed=seed),
        ModelSpec("random_forest", n_estimators=30, max_depth=10, seed=seed),
        ModelSpec("random_forest", n_estimators=50, max_depth=10, seed=seed),
        ModelSpec("random_forest", n_estimators=100, max_depth=10, seed=seed),
        ModelSpec("mlp", hidden=(64, 64), seed=seed),
        ModelSpec("mlp", hidden=(64, 64, 64), seed=seed),
        ModelSpec("mlp", hidden=(128, 128), seed=seed),
        ModelSpec("mlp", hidden=(128, 128, 128), seed=seed),
    ]
