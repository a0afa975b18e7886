"""Classifier specs, training dispatch, and prediction.

Four kinds are supported: "rf" (bootstrap forest of Gini trees), "svm"
(Pegasos linear SVM), "lda" (shrinkage LDA), and "gbdt" (leaf-wise boosted
trees). A ClassifierSpec bundles the kind, its hyperparameters, and the
seed; train() binds it to a dataset subset and returns a TrainedModel that
carries the schema it was fitted on.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from ..core import Dataset, Label, PermissionSchema
from ..errors import SchemaMismatchError, TrainingError
from ..rng import Rng
from .forest import ForestModel, rf_fit
from .gbdt import GbdtModel, GbdtTree, gbdt_fit, grow_tree
from .lda import LdaModel, lda_fit
from .svm import SvmModel, svm_fit, svm_objective
from .tree import DecisionTree, tree_fit

KINDS = ("rf", "svm", "lda", "gbdt")


@dataclass(frozen=True)
class RfParams:
    n_estimators: int = 140
    max_depth: int = 22
    min_samples_split: int = 2
    features_per_split: Union[int, str] = "sqrt"

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.features_per_split != "sqrt" and int(self.features_per_split) < 1:
            raise ValueError("features_per_split must be 'sqrt' or a positive int")


@dataclass(frozen=True)
class SvmParams:
    lambda_reg: float = 1e-4
    epochs: int = 50

    def __post_init__(self):
        if not self.lambda_reg > 0:
            raise ValueError("lambda_reg must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


@dataclass(frozen=True)
class LdaParams:
    shrinkage: float = 1e-4

    def __post_init__(self):
        if self.shrinkage < 0:
            raise ValueError("shrinkage must be >= 0")


@dataclass(frozen=True)
class GbdtParams:
    n_rounds: int = 100
    learning_rate: float = 0.1
    max_leaves: int = 31
    lambda_l2: float = 1.0
    min_leaf_weight: float = 1.0

    def __post_init__(self):
        if self.n_rounds < 0:
            raise ValueError("n_rounds must be >= 0")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must lie in (0, 1]")
        if self.max_leaves < 2:
            raise ValueError("max_leaves must be >= 2")
        if self.lambda_l2 < 0:
            raise ValueError("lambda_l2 must be >= 0")
        if not self.min_leaf_weight > 0:
            raise ValueError("min_leaf_weight must be > 0")


_PARAM_TYPES = {"rf": RfParams, "svm": SvmParams, "lda": LdaParams, "gbdt": GbdtParams}

Params = Union[RfParams, SvmParams, LdaParams, GbdtParams]
FittedState = Union[ForestModel, SvmModel, LdaModel, GbdtModel]


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str
    params: Params
    seed: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError("unknown kind %r, expected one of %s"
                             % (self.kind, "/".join(KINDS)))
        expected = _PARAM_TYPES[self.kind]
        if not isinstance(self.params, expected):
            raise ValueError("kind %r takes %s, got %s"
                             % (self.kind, expected.__name__, type(self.params).__name__))


def default_spec(kind: str, seed: int, **overrides) -> ClassifierSpec:
    """Spec with default hyperparameters, single fields overridable."""
    if kind not in KINDS:
        raise ValueError("unknown kind %r, expected one of %s" % (kind, "/".join(KINDS)))
    params = _PARAM_TYPES[kind]()
    if overrides:
        params = replace(params, **overrides)
    return ClassifierSpec(kind, params, seed)


@dataclass(frozen=True)
class TrainedModel:
    spec: ClassifierSpec
    schema: PermissionSchema
    state: FittedState


def train(spec: ClassifierSpec, ds: Dataset, train_indices) -> TrainedModel:
    """Fit spec.kind on the given rows of ds (row order as given)."""
    idx = np.asarray(train_indices, dtype=np.int64)
    if idx.ndim != 1 or idx.size == 0:
        raise TrainingError("training index set is empty")
    if idx.size and (idx.min() < 0 or idx.max() >= len(ds)):
        raise ValueError("training indices out of range for a %d-row dataset" % len(ds))
    x = ds.x[idx]
    y = ds.y[idx]
    pos = int(y.sum())
    if pos == 0 or pos == len(y):
        raise TrainingError("training subset holds a single class")

    if spec.kind == "rf":
        state = rf_fit(x, y, spec.params, spec.seed)
    elif spec.kind == "svm":
        state = svm_fit(x, y, spec.params, Rng(spec.seed))
    elif spec.kind == "lda":
        state = lda_fit(x, y, spec.params)
    else:
        state = gbdt_fit(x, y, spec.params)
    return TrainedModel(spec, ds.schema, state)


def predict_scores(model: TrainedModel, x: np.ndarray) -> np.ndarray:
    """Malicious scores in [0, 1] for a (n, d) matrix."""
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[1] != len(model.schema):
        raise SchemaMismatchError("expected (n, %d) features, got shape %r"
                                  % (len(model.schema), x.shape))
    return model.state.scores(x)


def predict_labels(model: TrainedModel, x: np.ndarray) -> np.ndarray:
    """0/1 labels with each kind's documented tie rule (RF: exact 50:50
    vote -> Benign; all others: score 0.5 -> Malicious)."""
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[1] != len(model.schema):
        raise SchemaMismatchError("expected (n, %d) features, got shape %r"
                                  % (len(model.schema), x.shape))
    return model.state.labels(x)


def predict(model: TrainedModel, bits) -> tuple[Label, float]:
    """Label and malicious score for one feature vector."""
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise SchemaMismatchError("expected a flat feature vector, got shape %r"
                                  % (arr.shape,))
    if arr.shape[0] != len(model.schema):
        raise SchemaMismatchError("vector has %d features, schema has %d"
                                  % (arr.shape[0], len(model.schema)))
    row = arr.reshape(1, -1)
    label = Label(int(predict_labels(model, row)[0]))
    score = float(predict_scores(model, row)[0])
    return label, score
