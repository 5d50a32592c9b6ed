"""Evaluation protocol: stratified splits, k-fold CV, weighted metrics,
one-vs-rest ROC/AUC, and the benchmark report."""

from __future__ import annotations

import io
import json
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    ClassTooSmall,
    EmptyMatrix,
    KTooLarge,
    LengthMismatch,
    UnknownClass,
    UnsupportedFormat,
)
from .models import ModelSpec, train
from .rng import substream


def _classes_of(y: Sequence[str]) -> tuple[str, ...]:
    return tuple(sorted(set(str(v) for v in y)))


# --- partitioning -------------------------------------------------------------

def stratified_split(
    y: Sequence[str],
    train_frac: float = 0.7,
    seed: int = 0,
    stratify: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint, exhaustive (train, test) index arrays.

    Stratified mode preserves per-class proportions to within one sample
    and guarantees each class at least one sample on each side.
    """
    if not 0.0 < train_frac < 1.0:
        raise KTooLarge(f"train fraction must be in (0, 1), got {train_frac}")
    y = np.asarray([str(v) for v in y])
    n = y.size
    rng = substream(seed, "split")
    if not stratify:
        order = rng.permutation(n)
        n_train = min(max(int(np.floor(train_frac * n + 0.5)), 1), n - 1)
        return np.sort(order[:n_train]), np.sort(order[n_train:])

    train_parts, test_parts = [], []
    for cls in _classes_of(y):
        idx = np.flatnonzero(y == cls)
        if idx.size < 2:
            raise ClassTooSmall(cls, int(idx.size), 2)
        order = idx[rng.permutation(idx.size)]
        n_train = min(max(int(np.floor(train_frac * idx.size + 0.5)), 1), idx.size - 1)
        train_parts.append(order[:n_train])
        test_parts.append(order[n_train:])
    return (
        np.sort(np.concatenate(train_parts)),
        np.sort(np.concatenate(test_parts)),
    )


def stratified_kfold(
    y: Sequence[str], k: int = 5, seed: int = 0,
) -> list[np.ndarray]:
    """Test-fold index arrays partitioning the dataset.

    Fold sizes differ by at most one, as do per-class counts across folds.
    Classes smaller than k trigger a warning and a plain (unstratified)
    k-fold.
    """
    y = np.asarray([str(v) for v in y])
    n = y.size
    if k < 2 or k > n:
        raise KTooLarge(f"k={k} infeasible for {n} rows")
    rng = substream(seed, "cv")
    classes = _classes_of(y)
    counts = {cls: int((y == cls).sum()) for cls in classes}
    if min(counts.values()) < k:
        smallest = min(counts, key=lambda c: counts[c])
        warnings.warn(
            f"class {smallest!r} has {counts[smallest]} < k={k} samples; "
            "falling back to a plain k-fold",
            stacklevel=2,
        )
        order = rng.permutation(n)
        return [np.sort(part) for part in np.array_split(order, k)]

    folds: list[list[np.ndarray]] = [[] for _ in range(k)]
    loads = np.zeros(k, dtype=int)
    for cls in classes:
        idx = np.flatnonzero(y == cls)
        order = idx[rng.permutation(idx.size)]
        base, extra = divmod(idx.size, k)
        # folds currently lightest take the remainder, ties to the lower id
        ranking = sorted(range(k), key=lambda f: (loads[f], f))
        sizes = np.full(k, base)
        for f in ranking[:extra]:
            sizes[f] += 1
        stop = np.cumsum(sizes)
        start = stop - sizes
        for f in range(k):
            folds[f].append(order[start[f]:stop[f]])
            loads[f] += sizes[f]
    return [np.sort(np.concatenate(parts)) for parts in folds]


# --- confusion matrix and metrics ---------------------------------------------

@dataclass
class ConfusionMatrix:
    """counts[i][j] = samples of true class i predicted as class j."""

    classes: tuple[str, ...]
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def accuracy(self) -> float:
        if self.total == 0:
            raise EmptyMatrix("confusion matrix has no samples")
        return float(np.trace(self.counts)) / self.total

    def supports(self) -> np.ndarray:
        return self.counts.sum(axis=1)


def confusion_matrix(
    y_true: Sequence[str], y_pred: Sequence[str], classes: Sequence[str] | None = None,
) -> ConfusionMatrix:
    y_true = [str(v) for v in y_true]
    y_pred = [str(v) for v in y_pred]
    if len(y_true) != len(y_pred):
        raise LengthMismatch(f"{len(y_true)} true vs {len(y_pred)} predicted labels")
    classes = tuple(classes) if classes is not None else _classes_of(y_true + y_pred)
    index = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        if t not in index:
            raise UnknownClass(t)
        if p not in index:
            raise UnknownClass(p)
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(classes=classes, counts=counts)


@dataclass
class ClassMetrics:
    label: str
    support: int
    precision: float
    recall: float
    f1: float


@dataclass
class WeightedMetrics:
    precision: float
    recall: float
    f1: float
    accuracy: float
    per_class: list[ClassMetrics]


def weighted_metrics(cm: ConfusionMatrix) -> WeightedMetrics:
    """Support-weighted precision/recall/F1 plus accuracy.

    Conventions: precision of an empty predicted column is 0, F1 of a
    (0, 0) pair is 0, and zero-support classes are excluded from the
    weighting (so weighted recall always equals accuracy).
    """
    if cm.total == 0:
        raise EmptyMatrix("confusion matrix has no samples")
    counts = cm.counts.astype(float)
    diag = np.diag(counts)
    col = counts.sum(axis=0)
    row = counts.sum(axis=1)
    per_class = []
    for i, label in enumerate(cm.classes):
        precision = diag[i] / col[i] if col[i] > 0 else 0.0
        recall = diag[i] / row[i] if row[i] > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        per_class.append(
            ClassMetrics(label, int(row[i]), float(precision), float(recall), float(f1))
        )
    weights = row / row.sum()
    return WeightedMetrics(
        precision=float(sum(w * m.precision for w, m in zip(weights, per_class))),
        recall=float(sum(w * m.recall for w, m in zip(weights, per_class))),
        f1=float(sum(w * m.f1 for w, m in zip(weights, per_class))),
        accuracy=cm.accuracy(),
        per_class=per_class,
    )


# --- ROC ----------------------------------------------------------------------

@dataclass
class RocCurve:
    label: str
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float


@dataclass
class RocResult:
    curves: dict[str, RocCurve]
    absent: tuple[str, ...]  # classes with no positives or no negatives

    @property
    def macro_auc(self) -> float | None:
        if not self.curves:
            return None
        return float(np.mean([c.auc for c in self.curves.values()]))


def roc_ovr(
    y_true: Sequence[str], scores: np.ndarray, classes: Sequence[str],
) -> RocResult:
    """One-vs-rest ROC per class by threshold sweep; AUC by trapezoid.

    Tied scores collapse into one sweep point, which makes the trapezoid
    area equal to the rank statistic P(s+ > s-) + 0.5 P(s+ = s-).
    """
    y_true = np.asarray([str(v) for v in y_true])
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 2 or scores.shape != (y_true.size, len(classes)):
        raise LengthMismatch(
            f"score matrix {scores.shape} does not match "
            f"{y_true.size} labels x {len(classes)} classes"
        )
    curves: dict[str, RocCurve] = {}
    absent: list[str] = []
    for j, cls in enumerate(classes):
        positive = y_true == cls
        n_pos = int(positive.sum())
        n_neg = positive.size - n_pos
        if n_pos == 0 or n_neg == 0:
            absent.append(cls)
            continue
        s = scores[:, j]
        order = np.argsort(-s, kind="stable")
        pos_sorted = positive[order]
        s_sorted = s[order]
        tp = np.cumsum(pos_sorted)
        fp = np.cumsum(~pos_sorted)
        # one sweep point per distinct score value
        last = np.append(np.flatnonzero(np.diff(s_sorted)), s_sorted.size - 1)
        tpr = np.concatenate(([0.0], tp[last] / n_pos))
        fpr = np.concatenate(([0.0], fp[last] / n_neg))
        auc = float(np.trapz(tpr, fpr))
        curves[cls] = RocCurve(label=cls, fpr=fpr, tpr=tpr, auc=auc)
    return RocResult(curves=curves, absent=tuple(absent))


# --- benchmark ----------------------------------------------------------------

@dataclass(frozen=True)
class BenchmarkProtocol:
    train_frac: float = 0.7
    k: int = 5
    seed: int = 0
    stratify: bool = True


@dataclass
class BenchmarkRow:
    spec: ModelSpec
    train: WeightedMetrics
    test: WeightedMetrics
    cv_train_mean: float
    cv_test_mean: float
    cv_train_std: float
    cv_test_std: float
    test_cm: ConfusionMatrix
    test_roc: RocResult


@dataclass
class BenchmarkReport:
    rows: list[BenchmarkRow]
    classes: tuple[str, ...]
    protocol: BenchmarkProtocol
    provenance: dict = field(default_factory=dict)


def run_benchmark(
    X: np.ndarray,
    y: Sequence[str],
    specs: Sequence[ModelSpec],
    protocol: BenchmarkProtocol = BenchmarkProtocol(),
    provenance: Mapping | None = None,
) -> BenchmarkReport:
    """Fit every spec on one shared split and one shared fold set.

    Per spec: weighted train/test metrics on the split, plus mean/std of
    train/test accuracy over the k folds. Rows keep the report order of
    ``specs``. Fully deterministic for a fixed protocol seed.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray([str(v) for v in y])
    classes = _classes_of(y)
    train_idx, test_idx = stratified_split(
        y, protocol.train_frac, protocol.seed, protocol.stratify
    )
    folds = stratified_kfold(y, protocol.k, protocol.seed)
    all_idx = np.arange(y.size)

    rows = []
    for spec in specs:
        model = train(spec, X[train_idx], y[train_idx])
        m_train = weighted_metrics(
            confusion_matrix(y[train_idx], model.predict(X[train_idx]), classes)
        )
        test_cm = confusion_matrix(y[test_idx], model.predict(X[test_idx]), classes)
        m_test = weighted_metrics(test_cm)
        roc = roc_ovr(y[test_idx], model.predict_scores(X[test_idx]), classes)

        cv_train, cv_test = [], []
        for fold in folds:
            rest = np.setdiff1d(all_idx, fold, assume_unique=True)
            fold_model = train(spec, X[rest], y[rest])
            cv_train.append(
                float((fold_model.predict(X[rest]) == y[rest]).mean())
            )
            cv_test.append(
                float((fold_model.predict(X[fold]) == y[fold]).mean())
            )
        rows.append(BenchmarkRow(
            spec=spec,
            train=m_train,
            test=m_test,
            cv_train_mean=float(np.mean(cv_train)),
            cv_test_mean=float(np.mean(cv_test)),
            cv_train_std=float(np.std(cv_train)),
            cv_test_std=float(np.std(cv_test)),
            test_cm=test_cm,
            test_roc=roc,
        ))
    return BenchmarkReport(
        rows=rows,
        classes=classes,
        protocol=protocol,
        provenance=dict(provenance or {}),
    )


# --- rendering ----------------------------------------------------------------

CSV_COLUMNS = (
    "model,params,train_f1,train_p,train_r,test_f1,test_p,test_r,"
    "cv_train_mean,cv_test_mean,cv_train_std,cv_test_std"
)


def _row_values(row: BenchmarkRow) -> list[float]:
    return [
        row.train.f1, row.train.precision, row.train.recall,
        row.test.f1, row.test.precision, row.test.recall,
        row.cv_train_mean, row.cv_test_mean, row.cv_train_std, row.cv_test_std,
    ]


def render_report(report: BenchmarkReport, format: str = "text-table") -> bytes:
    """Serialize a report; csv values are written at full precision."""
    if format == "csv":
        lines = [CSV_COLUMNS]
        for row in report.rows:
            cells = [row.spec.family, row.spec.params_text()]
            cells += [repr(v) for v in _row_values(row)]
            lines.append(",".join(cells))
        return ("\n".join(lines) + "\n").encode()

    if format == "markdown":
        header = (
            "| model | params | train_f1 | train_p | train_r | test_f1 | test_p "
            "| test_r | cv_train_mean | cv_test_mean | cv_train_std | cv_test_std |"
        )
        sep = "|" + " --- |" * 12
        lines = [header, sep]
        for row in report.rows:
            cells = [row.spec.family, row.spec.params_text()]
            cells += [f"{v:.4f}" for v in _row_values(row)]
            lines.append("| " + " | ".join(cells) + " |")
        return ("\n".join(lines) + "\n").encode()

    if format == "text-table":
        widths = (20, 34, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9)
        titles = ("model", "params", "trn_f1", "trn_p", "trn_r", "tst_f1",
                  "tst_p", "tst_r", "cv_trn", "cv_tst", "sd_trn", "sd_tst")
        out = io.StringIO()
        out.write("".join(t.ljust(w) for t, w in zip(titles, widths)) + "\n")
        out.write("-" * sum(widths) + "\n")
        for row in report.rows:
            cells = [row.spec.family, row.spec.params_text()]
            cells += [f"{v:.3f}" for v in _row_values(row)]
            out.write("".join(c.ljust(w) for c, w in zip(cells, widths)) + "\n")
        return out.getvalue().encode()

    if format == "plot-data":
        sections = plot_data_files(report)
        out = io.StringIO()
        for name in sorted(sections):
            out.write(f"# section: {name}\n")
            out.write(sections[name].decode())
        return out.getvalue().encode()

    raise UnsupportedFormat(format)


def _spec_slug(spec: ModelSpec, index: int) -> str:
    params = spec.params_text().replace("=", "").replace(" ", "_").replace("-", "na")
    return f"{index:02d}_{spec.family}_{params}"


def plot_data_files(report: BenchmarkReport) -> dict[str, bytes]:
    """Per-model confusion matrices and ROC points as csv files."""
    files: dict[str, bytes] = {}
    for i, row in enumerate(report.rows):
        slug = _spec_slug(row.spec, i)
        lines = ["true\\pred," + ",".join(report.classes)]
        for label, counts in zip(report.classes, row.test_cm.counts):
            lines.append(label + "," + ",".join(str(int(v)) for v in counts))
        files[f"confusion_{slug}.csv"] = ("\n".join(lines) + "\n").encode()

        roc_lines = ["class,fpr,tpr,auc"]
        for cls in report.classes:
            curve = row.test_roc.curves.get(cls)
            if curve is None:
                continue
            for fpr, tpr in zip(curve.fpr, curve.tpr):
                roc_lines.append(f"{cls},{repr(float(fpr))},{repr(float(tpr))},{repr(curve.auc)}")
        files[f"roc_{slug}.csv"] = ("\n".join(roc_lines) + "\n").encode()
    return files


# --- report (de)serialization ---------------------------------------------------

def report_to_json(report: BenchmarkReport) -> str:
    def spec_dict(spec: ModelSpec) -> dict:
        return {
            "family": spec.family,
            "max_depth": spec.max_depth,
            "n_estimators": spec.n_estimators,
            "k": spec.k,
            "hidden": list(spec.hidden) if spec.hidden else None,
            "learning_rate": spec.learning_rate,
            "epochs": spec.epochs,
            "batch_size": spec.batch_size,
            "l2": spec.l2,
            "normalize": spec.normalize,
            "bootstrap": spec.bootstrap,
            "feature_subsample": spec.feature_subsample,
            "seed": spec.seed,
        }

    payload = {
        "classes": list(report.classes),
        "protocol": {
            "train_frac": report.protocol.train_frac,
            "k": report.protocol.k,
            "seed": report.protocol.seed,
            "stratify": report.protocol.stratify,
        },
        "provenance": report.provenance,
        "rows": [
            {
                "spec": spec_dict(row.spec),
                "train": _metrics_dict(row.train),
                "test": _metrics_dict(row.test),
                "cv_train_mean": row.cv_train_mean,
                "cv_test_mean": row.cv_test_mean,
                "cv_train_std": row.cv_train_std,
                "cv_test_std": row.cv_test_std,
                "test_cm": row.test_cm.counts.tolist(),
                "roc": {
                    cls: {
                        "fpr": curve.fpr.tolist(),
                        "tpr": curve.tpr.tolist(),
                        "auc": curve.auc,
                    }
                    for cls, curve in row.test_roc.curves.items()
                },
                "roc_absent": list(row.test_roc.absent),
            }
            for row in report.rows
        ],
    }
    return json.dumps(payload, indent=2)


def _metrics_dict(m: WeightedMetrics) -> dict:
    return {
        "precision": m.precision,
        "recall": m.recall,
        "f1": m.f1,
        "accuracy": m.accuracy,
        "per_class": [
            {
                "label": c.label,
                "support": c.support,
                "precision": c.precision,
                "recall": c.recall,
                "f1": c.f1,
            }
            for c in m.per_class
        ],
    }


def _metrics_from_dict(d: dict) -> WeightedMetrics:
    return WeightedMetrics(
        precision=d["precision"],
        recall=d["recall"],
        f1=d["f1"],
        accuracy=d["accuracy"],
        per_class=[
            ClassMetrics(c["label"], c["support"], c["precision"], c["recall"], c["f1"])
            for c in d["per_class"]
        ],
    )


def report_from_json(text: str) -> BenchmarkReport:
    payload = json.loads(text)
    classes = tuple(payload["classes"])
    rows = []
    for rd in payload["rows"]:
        sd = rd["spec"]
        spec = ModelSpec(
            family=sd["family"],
            max_depth=sd["max_depth"],
            n_estimators=sd["n_estimators"],
            k=sd["k"],
            hidden=tuple(sd["hidden"]) if sd["hidden"] else None,
            learning_rate=sd["learning_rate"],
            epochs=sd["epochs"],
            batch_size=sd["batch_size"],
            l2=sd["l2"],
            normalize=sd["normalize"],
            bootstrap=sd["bootstrap"],
            feature_subsample=sd["feature_subsample"],
            seed=sd["seed"],
        )
        curves = {
            cls: RocCurve(
                label=cls,
                fpr=np.array(c["fpr"]),
                tpr=np.array(c["tpr"]),
                auc=c["auc"],
            )
            for cls, c in rd["roc"].items()
        }
        rows.append(BenchmarkRow(
            spec=spec,
            train=_metrics_from_dict(rd["train"]),
            test=_metrics_from_dict(rd["test"]),
            cv_train_mean=rd["cv_train_mean"],
            cv_test_mean=rd["cv_test_mean"],
            cv_train_std=rd["cv_train_std"],
            cv_test_std=rd["cv_test_std"],
            test_cm=ConfusionMatrix(classes=classes, counts=np.array(rd["test_cm"])),
            test_roc=RocResult(curves=curves, absent=tuple(rd["roc_absent"])),
        ))
    proto = payload["protocol"]
    return BenchmarkReport(
        rows=rows,
        classes=classes,
        protocol=BenchmarkProtocol(
            train_frac=proto["train_frac"], k=proto["k"],
            seed=proto["seed"], stratify=proto["stratify"],
        ),
        provenance=payload.get("provenance", {}),
    )
