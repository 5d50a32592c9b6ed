"""CART decision trees and random forests, from scratch.

Splits minimize Gini impurity over axis-aligned thresholds placed at
midpoints of consecutive distinct sorted values. Tie-breaking is fixed:
lowest cost wins, then lowest feature index, then lowest threshold, so a
fitted tree is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..rng import substream
from .base import ModelSpec


@dataclass
class TreePayload:
    """Flat node arrays: feature < 0 marks a leaf; dist rows are class
    distributions of the training samples that reached the node."""

    feature: np.ndarray   # (n_nodes,) int, -1 for leaves
    threshold: np.ndarray  # (n_nodes,) float
    left: np.ndarray      # (n_nodes,) int child ids, -1 for leaves
    right: np.ndarray
    dist: np.ndarray      # (n_nodes, C)

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    def scores(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.intp)
        active = self.feature[node] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            cur = node[rows]
            go_left = X[rows, self.feature[cur]] <= self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.feature[node] >= 0
        return self.dist[node]


@dataclass
class ForestPayload:
    trees: list[TreePayload] = field(default_factory=list)

    def scores(self, X: np.ndarray) -> np.ndarray:
        total = np.zeros((X.shape[0], self.trees[0].dist.shape[1]))
        for tree in self.trees:
            total += tree.scores(X)
        return total / len(self.trees)


class _TreeBuilder:
    def __init__(
        self,
        X: np.ndarray,
        y: np.ndarray,
        n_classes: int,
        max_depth: int | None,
        rng: np.random.Generator | None = None,
        n_candidates: int | None = None,
    ):
        self.X = X
        self.y = y
        self.n_classes = n_classes
        self.max_depth = max_depth
        self.rng = rng
        self.n_candidates = n_candidates
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.dist: list[np.ndarray] = []

    def build(self) -> TreePayload:
        self._grow(np.arange(self.X.shape[0], dtype=np.intp), 0)
        return TreePayload(
            feature=np.array(self.feature, dtype=np.intp),
            threshold=np.array(self.threshold, dtype=float),
            left=np.array(self.left, dtype=np.intp),
            right=np.array(self.right, dtype=np.intp),
            dist=np.vstack(self.dist),
        )

    def _new_node(self, counts: np.ndarray) -> int:
        node = len(self.feature)
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.dist.append(counts / counts.sum())
        return node

    def _candidate_features(self) -> np.ndarray:
        n_features = self.X.shape[1]
        if self.n_candidates is None or self.n_candidates >= n_features:
            return np.arange(n_features)
        assert self.rng is not None
        # sorted so the lowest-feature-index tie-break applies within the draw
        return np.sort(self.rng.choice(n_features, size=self.n_candidates, replace=False))

    def _grow(self, idx: np.ndarray, depth: int) -> int:
        counts = np.bincount(self.y[idx], minlength=self.n_classes).astype(float)
        node = self._new_node(counts)
        if (
            idx.size < 2
            or (self.max_depth is not None and depth >= self.max_depth)
            or np.count_nonzero(counts) <= 1
        ):
            return node
        split = self._best_split(idx)
        if split is None:
            return node
        f, thr = split
        mask = self.X[idx, f] <= thr
        self.feature[node] = f
        self.threshold[node] = thr
        self.left[node] = self._grow(idx[mask], depth + 1)
        self.right[node] = self._grow(idx[~mask], depth + 1)
        return node

    def _best_split(self, idx: np.ndarray) -> tuple[int, float] | None:
        n = idx.size
        y = self.y[idx]
        onehot = np.zeros((n, self.n_classes))
        onehot[np.arange(n), y] = 1.0
        best_cost = np.inf
        best: tuple[int, float] | None = None
        for f in self._candidate_features():
            xv = self.X[idx, f]
            order = np.argsort(xv, kind="stable")
            xs = xv[order]
            if xs[0] == xs[-1]:
                continue
            prefix = np.cumsum(onehot[order], axis=0)
            cuts = np.flatnonzero(xs[1:] > xs[:-1]) + 1  # split before xs[cut]
            if cuts.size == 0:
                continue
            nl = cuts.astype(float)
            nr = n - nl
            cl = prefix[cuts - 1]
            cr = prefix[-1] - cl
            gini_l = 1.0 - (cl * cl).sum(axis=1) / (nl * nl)
            gini_r = 1.0 - (cr * cr).sum(axis=1) / (nr * nr)
            cost = (nl * gini_l + nr * gini_r) / n
            i = int(np.argmin(cost))  # first minimum -> lowest threshold
            if cost[i] < best_cost:
                best_cost = float(cost[i])
                cut = cuts[i]
                best = (int(f), float((xs[cut - 1] + xs[cut]) / 2.0))
        return best


def train_tree(spec: ModelSpec, X: np.ndarray, y: np.ndarray, n_classes: int) -> TreePayload:
    return _TreeBuilder(X, y, n_classes, spec.max_depth).build()


def train_forest(spec: ModelSpec, X: np.ndarray, y: np.ndarray, n_classes: int) -> ForestPayload:
    """Bootstrap-aggregated trees with per-split feature subsets.

    Each tree draws from its own substream of the master seed, so changing
    the estimator count never reshuffles earlier trees.
    """
    n, n_features = X.shape
    n_candidates = None
    if spec.feature_subsample:
        n_candidates = max(1, int(np.sqrt(n_features)))
    trees = []
    for i in range(spec.n_estimators or 1):
        rng = substream(spec.seed, "tree", i)
        idx = rng.integers(0, n, size=n) if spec.bootstrap else np.arange(n)
        builder = _TreeBuilder(
            X[idx], y[idx], n_classes, spec.max_depth,
            rng=rng if n_candidates is not None else None,
            n_candidates=n_candidates,
        )
        trees.append(builder.build())
    return ForestPayload(trees=trees)
