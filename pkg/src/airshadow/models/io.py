"""Versioned plain-text model files.

Header line is ``airshadow-model v1``; floats are written with repr so a
save/load round trip reproduces bit-identical predictions. The trailing
``end`` line makes truncation detectable.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import IO, Iterator

import numpy as np

from ..errors import CorruptModel, VersionMismatch
from .base import ConstantPayload, ModelSpec, TrainedModel
from .simple import GnbPayload, KnnPayload, LogRegPayload, MlpPayload
from .trees import ForestPayload, TreePayload

MAGIC = "airshadow-model"
VERSION = "v1"


def _fmt(values) -> str:
    return " ".join(repr(float(v)) for v in np.asarray(values).ravel())


def model_to_text(model: TrainedModel) -> str:
    out = io.StringIO()
    w = out.write
    w(f"{MAGIC} {VERSION}\n")
    w(f"family {model.family}\n")
    w(f"classes {len(model.classes)}\n")
    for c in model.classes:
        w(c + "\n")
    w(f"features {model.n_features}\n")
    if model.norm_mean is not None:
        w("normalize 1\n")
        w("norm_mean " + _fmt(model.norm_mean) + "\n")
        w("norm_std " + _fmt(model.norm_std) + "\n")
    else:
        w("normalize 0\n")
    _write_payload(w, model.payload)
    w("end\n")
    return out.getvalue()


def _write_payload(w, payload) -> None:
    if isinstance(payload, ConstantPayload):
        w(f"constant {payload.class_idx}\n")
    elif isinstance(payload, TreePayload):
        _write_tree(w, payload)
    elif isinstance(payload, ForestPayload):
        w(f"trees {len(payload.trees)}\n")
        for tree in payload.trees:
            _write_tree(w, tree)
    elif isinstance(payload, KnnPayload):
        w(f"k {payload.k}\n")
        w(f"train {payload.X.shape[0]}\n")
        for yi, row in zip(payload.y, payload.X):
            w(f"{int(yi)} " + _fmt(row) + "\n")
    elif isinstance(payload, GnbPayload):
        w("priors " + _fmt(payload.priors) + "\n")
        for row in payload.means:
            w("mean " + _fmt(row) + "\n")
        for row in payload.variances:
            w("var " + _fmt(row) + "\n")
    elif isinstance(payload, LogRegPayload):
        w(f"weights {payload.W.shape[0]} {payload.W.shape[1]}\n")
        for row in payload.W:
            w(_fmt(row) + "\n")
    elif isinstance(payload, MlpPayload):
        sizes = [payload.weights[0].shape[0]] + [W.shape[1] for W in payload.weights]
        w("layers " + " ".join(str(s) for s in sizes) + "\n")
        for W, b in zip(payload.weights, payload.biases):
            w(f"W {W.shape[0]} {W.shape[1]}\n")
            for row in W:
                w(_fmt(row) + "\n")
            w("b " + _fmt(b) + "\n")
    else:
        raise CorruptModel(f"cannot serialize payload {type(payload).__name__}")


def _write_tree(w, tree: TreePayload) -> None:
    w(f"nodes {tree.n_nodes}\n")
    for i in range(tree.n_nodes):
        dist = _fmt(tree.dist[i])
        if tree.feature[i] < 0:
            w(f"leaf {dist}\n")
        else:
            w(
                f"split {int(tree.feature[i])} {repr(float(tree.threshold[i]))} "
                f"{int(tree.left[i])} {int(tree.right[i])} {dist}\n"
            )


def save_model(model: TrainedModel, sink: str | Path | IO[str]) -> None:
    text = model_to_text(model)
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(text)
    else:
        sink.write(text)


class _Lines:
    def __init__(self, text: str):
        self._it: Iterator[str] = iter(text.splitlines())

    def next(self) -> str:
        try:
            return next(self._it)
        except StopIteration:
            raise CorruptModel("model file truncated") from None

    def expect(self, keyword: str) -> list[str]:
        line = self.next()
        parts = line.split()
        if not parts or parts[0] != keyword:
            raise CorruptModel(f"expected {keyword!r}, got {line!r}")
        return parts[1:]


def model_from_text(text: str) -> TrainedModel:
    lines = _Lines(text)
    header = lines.next().split()
    if len(header) != 2 or header[0] != MAGIC:
        raise CorruptModel("not a model file")
    if header[1] != VERSION:
        raise VersionMismatch(header[1])
    try:
        return _parse_body(lines)
    except (ValueError, IndexError) as exc:
        raise CorruptModel(f"malformed model file: {exc}") from None


def _parse_body(lines: _Lines) -> TrainedModel:
    family = lines.expect("family")[0]
    n_classes = int(lines.expect("classes")[0])
    classes = tuple(lines.next() for _ in range(n_classes))
    n_features = int(lines.expect("features")[0])
    norm_mean = norm_std = None
    if lines.expect("normalize")[0] == "1":
        norm_mean = np.array([float(v) for v in lines.expect("norm_mean")])
        norm_std = np.array([float(v) for v in lines.expect("norm_std")])
        if norm_mean.size != n_features or norm_std.size != n_features:
            raise CorruptModel("normalization stats length mismatch")

    head = lines.next().split()
    payload = _parse_payload(head, lines, family, n_classes, n_features)
    if lines.next() != "end":
        raise CorruptModel("missing end marker")
    return TrainedModel(
        family=family,
        classes=classes,
        n_features=n_features,
        payload=payload,
        norm_mean=norm_mean,
        norm_std=norm_std,
        spec=ModelSpec(family=family),
    )


def _parse_payload(head, lines, family, n_classes, n_features):
    keyword = head[0]
    if keyword == "constant":
        return ConstantPayload(n_classes=n_classes, class_idx=int(head[1]))
    if keyword == "nodes":
        return _parse_tree(int(head[1]), lines, n_classes)
    if keyword == "trees":
        trees = []
        for _ in range(int(head[1])):
            trees.append(_parse_tree(int(lines.expect("nodes")[0]), lines, n_classes))
        return ForestPayload(trees=trees)
    if keyword == "k":
        k = int(head[1])
        n = int(lines.expect("train")[0])
        X = np.empty((n, n_features))
        y = np.empty(n, dtype=np.intp)
        for i in range(n):
            parts = lines.next().split()
            y[i] = int(parts[0])
            X[i] = [float(v) for v in parts[1:]]
        return KnnPayload(X=X, y=y, k=k, n_classes=n_classes)
    if keyword == "priors":
        priors = np.array([float(v) for v in head[1:]])
        means = np.vstack([[float(v) for v in lines.expect("mean")] for _ in range(n_classes)])
        variances = np.vstack([[float(v) for v in lines.expect("var")] for _ in range(n_classes)])
        return GnbPayload(priors=priors, means=means, variances=variances)
    if keyword == "weights":
        rows, cols = int(head[1]), int(head[2])
        W = np.vstack([[float(v) for v in lines.next().split()] for _ in range(rows)])
        if W.shape != (rows, cols):
            raise CorruptModel("weight matrix shape mismatch")
        return LogRegPayload(W=W)
    if keyword == "layers":
        sizes = [int(v) for v in head[1:]]
        weights, biases = [], []
        for _ in range(len(sizes) - 1):
            r, c = (int(v) for v in lines.expect("W"))
            weights.append(
                np.vstack([[float(v) for v in lines.next().split()] for _ in range(r)])
            )
            biases.append(np.array([float(v) for v in lines.expect("b")]))
        return MlpPayload(weights=weights, biases=biases)
    raise CorruptModel(f"unknown payload section {keyword!r}")


def _parse_tree(n_nodes: int, lines: _Lines, n_classes: int) -> TreePayload:
    feature = np.full(n_nodes, -1, dtype=np.intp)
    threshold = np.zeros(n_nodes)
    left = np.full(n_nodes, -1, dtype=np.intp)
    right = np.full(n_nodes, -1, dtype=np.intp)
    dist = np.zeros((n_nodes, n_classes))
    for i in range(n_nodes):
        parts = lines.next().split()
        if parts[0] == "leaf":
            dist[i] = [float(v) for v in parts[1:]]
        elif parts[0] == "split":
            feature[i] = int(parts[1])
            threshold[i] = float(parts[2])
            left[i] = int(parts[3])
            right[i] = int(parts[4])
            dist[i] = [float(v) for v in parts[5:]]
        else:
            raise CorruptModel(f"bad tree node line: {' '.join(parts)!r}")
    return TreePayload(feature=feature, threshold=threshold, left=left, right=right, dist=dist)


def load_model(source: str | Path | IO[str]) -> TrainedModel:
    if isinstance(source, (str, Path)):
        text = Path(source).read_text()
    else:
        text = source.read()
    return model_from_text(text)
