"""Confusion matrices, the three report metrics, cross-validation, grid
search, and impurity-based feature importance.

Malicious (1) is the positive class. Degenerate precision/recall return 0.0
and the condition is named in Metrics.flags instead of raising; a completely
empty confusion matrix is the one case that raises (UndefinedMetricError).
Fold statistics use the population standard deviation (divide by k).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset
from .data import stratified_kfold
from .errors import UndefinedMetricError, UnsupportedModelError
from .models import (
    ClassifierSpec,
    TrainedModel,
    predict_labels,
    train,
)
from .models.forest import ForestModel
from .models.gbdt import GbdtModel


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.tp + other.tp, self.tn + other.tn,
                               self.fp + other.fp, self.fn + other.fn)


FLAG_NO_POSITIVE_PREDICTIONS = "no positive predictions"
FLAG_NO_POSITIVE_SAMPLES = "no positive samples"


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    flags: tuple[str, ...] = ()


def confusion(y_true, y_pred) -> ConfusionMatrix:
    yt = np.asarray(y_true)
    yp = np.asarray(y_pred)
    if yt.shape != yp.shape or yt.ndim != 1:
        raise ValueError("label vectors must be 1-d and the same length")
    if yt.size == 0:
        raise ValueError("cannot build a confusion matrix from zero samples")
    tp = int(np.sum((yt == 1) & (yp == 1)))
    tn = int(np.sum((yt == 0) & (yp == 0)))
    fp = int(np.sum((yt == 0) & (yp == 1)))
    fn = int(np.sum((yt == 1) & (yp == 0)))
    return ConfusionMatrix(tp, tn, fp, fn)


def accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise UndefinedMetricError("accuracy of an empty confusion matrix")
    return (cm.tp + cm.tn) / cm.total


def precision(cm: ConfusionMatrix) -> float:
    if cm.tp + cm.fp == 0:
        return 0.0
    return cm.tp / (cm.tp + cm.fp)


def recall(cm: ConfusionMatrix) -> float:
    if cm.tp + cm.fn == 0:
        return 0.0
    return cm.tp / (cm.tp + cm.fn)


def metrics_from_confusion(cm: ConfusionMatrix) -> Metrics:
    flags = []
    if cm.tp + cm.fp == 0:
        flags.append(FLAG_NO_POSITIVE_PREDICTIONS)
    if cm.tp + cm.fn == 0:
        flags.append(FLAG_NO_POSITIVE_SAMPLES)
    return Metrics(accuracy(cm), precision(cm), recall(cm), tuple(flags))


def evaluate_on(model: TrainedModel, ds: Dataset, indices) -> tuple[ConfusionMatrix, Metrics]:
    idx = np.asarray(indices, dtype=np.int64)
    preds = predict_labels(model, ds.x[idx])
    cm = confusion(ds.y[idx], preds)
    return cm, metrics_from_confusion(cm)


@dataclass(frozen=True)
class FoldResult:
    cm: ConfusionMatrix
    metrics: Metrics


@dataclass(frozen=True)
class CvReport:
    spec: ClassifierSpec
    k: int
    folds: tuple[FoldResult, ...]
    mean: Metrics
    std: Metrics

    @property
    def pooled_cm(self) -> ConfusionMatrix:
        total = self.folds[0].cm
        for fold in self.folds[1:]:
            total = total + fold.cm
        return total


def _fold_stats(folds: list[FoldResult]) -> tuple[Metrics, Metrics]:
    table = np.array([[f.metrics.accuracy, f.metrics.precision, f.metrics.recall]
                      for f in folds])
    mean = table.mean(axis=0)
    std = table.std(axis=0)  # population: divide by k
    return (Metrics(*(float(v) for v in mean)),
            Metrics(*(float(v) for v in std)))


def cross_validate(spec: ClassifierSpec, ds: Dataset, k: int, seed: int) -> CvReport:
    """Stratified k-fold CV; fold plan comes from stratified_kfold(ds, k, seed),
    each fold's model trains on the ascending complement with spec.seed."""
    folds = stratified_kfold(ds, k, seed)
    n = len(ds)
    results = []
    for held_out in folds:
        mask = np.ones(n, dtype=bool)
        mask[held_out] = False
        train_idx = np.nonzero(mask)[0]
        model = train(spec, ds, train_idx)
        cm, mets = evaluate_on(model, ds, held_out)
        results.append(FoldResult(cm, mets))
    mean, std = _fold_stats(results)
    return CvReport(spec, k, tuple(results), mean, std)


@dataclass(frozen=True)
class GridPoint:
    params: object
    mean_accuracy: float


@dataclass(frozen=True)
class GridResult:
    kind: str
    points: tuple[GridPoint, ...]
    best_index: int

    @property
    def best(self) -> GridPoint:
        return self.points[self.best_index]


def grid_search(kind: str, grid, ds: Dataset, k: int, seed: int) -> GridResult:
    """Evaluate every params object in `grid` (in the order given) by mean
    CV accuracy; ties keep the earliest point."""
    grid = list(grid)
    if not grid:
        raise ValueError("empty parameter grid")
    points = []
    best_index = 0
    for i, params in enumerate(grid):
        spec = ClassifierSpec(kind, params, seed)
        report = cross_validate(spec, ds, k, seed)
        points.append(GridPoint(params, report.mean.accuracy))
        if points[i].mean_accuracy > points[best_index].mean_accuracy:
            best_index = i
    return GridResult(kind, tuple(points), best_index)


def feature_importance(model: TrainedModel) -> np.ndarray:
    """Mean decrease in impurity over a model's trees, normalized to sum 1.

    Each split contributes (impurity decrease at the node) * (node samples /
    root samples) to its feature: Gini decrease for forest trees, the split
    gain for boosted trees. A model whose trees never split comes back all
    zero. Only tree ensembles have this notion; other kinds raise.
    """
    state = model.state
    d = len(model.schema)
    if isinstance(state, ForestModel):
        per_tree = np.zeros((len(state.trees), d))
        for t, tree in enumerate(state.trees):
            total = tree.neg + tree.pos
            root = float(total[0])
            for i in range(tree.n_nodes):
                f = int(tree.feature[i])
                if f < 0:
                    continue
                li, ri = int(tree.left[i]), int(tree.right[i])
                decrease = _gini(tree.neg[i], tree.pos[i]) \
                    - total[li] / total[i] * _gini(tree.neg[li], tree.pos[li]) \
                    - total[ri] / total[i] * _gini(tree.neg[ri], tree.pos[ri])
                per_tree[t, f] += decrease * (total[i] / root)
    elif isinstance(state, GbdtModel):
        if not state.trees:
            return np.zeros(d)
        per_tree = np.zeros((len(state.trees), d))
        for t, tree in enumerate(state.trees):
            root = float(tree.count[0])
            for i in range(tree.n_nodes):
                f = int(tree.feature[i])
                if f >= 0:
                    per_tree[t, f] += float(tree.gain[i]) * (tree.count[i] / root)
    else:
        raise UnsupportedModelError(
            "feature importance needs a tree ensemble, not %r" % model.spec.kind)
    scores = per_tree.mean(axis=0)
    total = scores.sum()
    if total <= 0.0:
        return np.zeros(d)
    return scores / total


def _gini(neg: int, pos: int) -> float:
    n = int(neg) + int(pos)
    if n == 0:
        return 0.0
    return 2.0 * int(neg) * int(pos) / (n * n)
