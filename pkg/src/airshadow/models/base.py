"""Shared model types: specs, the fitted-model container, normalization."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Protocol, Sequence

import numpy as np

from ..errors import ConfigMismatch, SchemaMismatch

FAMILIES = (
    "decision_tree",
    "random_forest",
    "knn",
    "gaussian_nb",
    "logistic_regression",
    "mlp",
)

#: Families whose features are z-scored by default.
NORMALIZED_BY_DEFAULT = {"knn", "logistic_regression", "mlp"}


@dataclass(frozen=True)
class ModelSpec:
    """One classifier configuration; unset fields fall back to family defaults."""

    family: str
    max_depth: int | None = None          # decision_tree / random_forest
    n_estimators: int | None = None       # random_forest
    k: int | None = None                  # knn
    hidden: tuple[int, ...] | None = None  # mlp
    learning_rate: float | None = None    # logistic_regression / mlp
    epochs: int | None = None
    batch_size: int | None = None         # mlp
    l2: float | None = None
    normalize: bool | None = None         # None -> family default
    bootstrap: bool = True                # random_forest; off for equivalence tests
    feature_subsample: bool = True        # random_forest
    seed: int = 0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ConfigMismatch(
                f"unknown model family {self.family!r}; expected one of {FAMILIES}"
            )
        for name in ("max_depth", "n_estimators", "k", "epochs", "batch_size"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ConfigMismatch(f"{name} must be positive, got {value}")
        if self.hidden is not None and (not self.hidden or any(h < 1 for h in self.hidden)):
            raise ConfigMismatch(f"hidden sizes must be non-empty positive, got {self.hidden}")

    def resolved(self) -> "ModelSpec":
        """Spec with family defaults filled in."""
        d: dict = {}
        if self.family in ("decision_tree", "random_forest") and self.max_depth is None:
            d["max_depth"] = 30 if self.family == "decision_tree" else 10
        if self.family == "random_forest" and self.n_estimators is None:
            d["n_estimators"] = 50
        if self.family == "knn" and self.k is None:
            d["k"] = 10
        if self.family == "logistic_regression":
            d.setdefault("learning_rate", self.learning_rate or 0.1)
            d.setdefault("epochs", self.epochs or 5000)
            if self.l2 is None:
                d["l2"] = 1e-4
        if self.family == "mlp":
            if self.hidden is None:
                d["hidden"] = (64, 64, 64)
            d.setdefault("learning_rate", self.learning_rate or 1e-3)
            d.setdefault("epochs", self.epochs or 200)
            d.setdefault("batch_size", self.batch_size or 32)
            if self.l2 is None:
                d["l2"] = 0.0
        if self.normalize is None:
            d["normalize"] = self.family in NORMALIZED_BY_DEFAULT
        return replace(self, **d) if d else self

    def params_text(self) -> str:
        """Short human-readable parameter summary for report rows."""
        s = self.resolved()
        if s.family == "decision_tree":
            return f"max_depth={s.max_depth}"
        if s.family == "random_forest":
            return f"n_estimators={s.n_estimators} max_depth={s.max_depth}"
        if s.family == "knn":
            return f"k={s.k}"
        if s.family == "mlp":
            return "hidden=[" + ",".join(str(h) for h in (s.hidden or ())) + "]"
        return "-"


class Payload(Protocol):
    """Family-specific fitted parameters; scores() rows sum to one."""

    def scores(self, X: np.ndarray) -> np.ndarray: ...


@dataclass
class ConstantPayload:
    """Degenerate single-class predictor."""

    n_classes: int
    class_idx: int = 0

    def scores(self, X: np.ndarray) -> np.ndarray:
        out = np.zeros((X.shape[0], self.n_classes))
        out[:, self.class_idx] = 1.0
        return out


@dataclass
class TrainedModel:
    """A fitted classifier plus everything needed to reproduce predictions."""

    family: str
    classes: tuple[str, ...]
    n_features: int
    payload: Payload
    norm_mean: np.ndarray | None = None
    norm_std: np.ndarray | None = None
    spec: ModelSpec | None = None

    def _prepare(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        if single:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise SchemaMismatch(
                f"input has {X.shape[1]} features, model expects {self.n_features}"
            )
        if self.norm_mean is not None:
            X = (X - self.norm_mean) / self.norm_std
        return X

    def predict_scores(self, X) -> np.ndarray:
        """Per-class score rows (each sums to 1) for one vector or a matrix."""
        single = np.asarray(X).ndim == 1
        scores = self.payload.scores(self._prepare(X))
        return scores[0] if single else scores

    def predict(self, X) -> np.ndarray | str:
        """Argmax class per row; ties resolve to the earlier class."""
        scores = self.predict_scores(X)
        if scores.ndim == 1:
            return self.classes[int(np.argmax(scores))]
        idx = np.argmax(scores, axis=1)
        return np.array([self.classes[i] for i in idx])


def normalization_stats(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-feature mean and population std; constant features get std=1."""
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0.0] = 1.0
    return mean, std


def encode_labels(y: Sequence[str]) -> tuple[np.ndarray, tuple[str, ...]]:
    classes = tuple(sorted(set(str(v) for v in y)))
    index = {c: i for i, c in enumerate(classes)}
    return np.array([index[str(v)] for v in y], dtype=np.intp), classes
