"""Versioned text serialization of trained models.

The grammar is line-oriented and documented in MODEL_FORMAT.md at the repo
root. Floats are written with %.17g, which round-trips IEEE doubles exactly,
so a loaded model predicts bit-identically to the saved one. Files written
for the same seed and data are byte-identical. A format_version above
FORMAT_VERSION raises ModelVersionError; everything structurally wrong,
including truncation (the final `end` line is mandatory), raises
ModelFormatError.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from ..core import PermissionSchema
from ..errors import ModelFormatError, ModelVersionError
from . import (
    ClassifierSpec,
    GbdtParams,
    LdaParams,
    RfParams,
    SvmParams,
    TrainedModel,
)
from .forest import ForestModel
from .gbdt import GbdtModel, GbdtTree
from .lda import LdaModel
from .svm import SvmModel
from .tree import DecisionTree

FORMAT_VERSION = 1
_MAGIC = "apktriage-model"


def _f(x: float) -> str:
    return "%.17g" % float(x)


def _params_pairs(params) -> list[tuple[str, str]]:
    if isinstance(params, RfParams):
        return [("n_estimators", str(params.n_estimators)),
                ("max_depth", str(params.max_depth)),
                ("min_samples_split", str(params.min_samples_split)),
                ("features_per_split", str(params.features_per_split))]
    if isinstance(params, SvmParams):
        return [("lambda_reg", _f(params.lambda_reg)), ("epochs", str(params.epochs))]
    if isinstance(params, LdaParams):
        return [("shrinkage", _f(params.shrinkage))]
    return [("n_rounds", str(params.n_rounds)),
            ("learning_rate", _f(params.learning_rate)),
            ("max_leaves", str(params.max_leaves)),
            ("lambda_l2", _f(params.lambda_l2)),
            ("min_leaf_weight", _f(params.min_leaf_weight))]


def model_to_text(model: TrainedModel) -> str:
    lines = ["%s %d" % (_MAGIC, FORMAT_VERSION),
             "kind %s" % model.spec.kind,
             "seed %d" % model.spec.seed,
             "params " + " ".join("%s=%s" % kv for kv in _params_pairs(model.spec.params)),
             "schema %d" % len(model.schema)]
    lines.extend(model.schema.names)
    state = model.state
    if isinstance(state, ForestModel):
        lines.append("forest %d" % len(state.trees))
        for tree in state.trees:
            lines.append("tree %d" % tree.n_nodes)
            for i in range(tree.n_nodes):
                if tree.feature[i] >= 0:
                    lines.append("%d split %d %d %d %d %d"
                                 % (i, tree.feature[i], tree.left[i], tree.right[i],
                                    tree.neg[i], tree.pos[i]))
                else:
                    lines.append("%d leaf %d %d" % (i, tree.neg[i], tree.pos[i]))
    elif isinstance(state, SvmModel):
        lines.append("svm %d" % len(state.w))
        lines.append("bias " + _f(state.b))
        lines.append("w " + " ".join(_f(v) for v in state.w))
    elif isinstance(state, LdaModel):
        d = state.means.shape[1]
        lines.append("lda %d" % d)
        lines.append("prior %s %s" % (_f(state.log_priors[0]), _f(state.log_priors[1])))
        lines.append("mean0 " + " ".join(_f(v) for v in state.means[0]))
        lines.append("mean1 " + " ".join(_f(v) for v in state.means[1]))
        lines.append("precision")
        for row in state.precision:
            lines.append(" ".join(_f(v) for v in row))
    elif isinstance(state, GbdtModel):
        lines.append("gbdt %d %s" % (len(state.trees), _f(state.f0)))
        for tree in state.trees:
            lines.append("tree %d" % tree.n_nodes)
            for i in range(tree.n_nodes):
                if tree.feature[i] >= 0:
                    lines.append("%d split %d %d %d %d %s"
                                 % (i, tree.feature[i], tree.left[i], tree.right[i],
                                    tree.count[i], _f(tree.gain[i])))
                else:
                    lines.append("%d leaf %s %d" % (i, _f(tree.value[i]), tree.count[i]))
    else:
        raise ModelFormatError("unknown state type %s" % type(state).__name__)
    lines.append("end")
    return "\n".join(lines) + "\n"


def save_model(model: TrainedModel, path) -> None:
    """Serialize to path atomically (temp file in the same directory)."""
    write_atomic(path, model_to_text(model))


def write_atomic(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class _Reader:
    def __init__(self, text: str):
        self.lines = text.split("\n")
        if self.lines and self.lines[-1] == "":
            self.lines.pop()
        self.at = 0

    def next(self, what: str) -> str:
        if self.at >= len(self.lines):
            raise ModelFormatError("file ends where %s was expected" % what)
        line = self.lines[self.at]
        self.at += 1
        return line

    def tagged(self, tag: str) -> list[str]:
        line = self.next("a %r line" % tag)
        parts = line.split(" ")
        if parts[0] != tag:
            raise ModelFormatError("expected %r line, found %r" % (tag, line))
        return parts[1:]

    def one(self, tag: str) -> str:
        tokens = self.tagged(tag)
        if len(tokens) != 1:
            raise ModelFormatError("%r line needs exactly one value" % tag)
        return tokens[0]

    def done(self) -> bool:
        return self.at >= len(self.lines)


def _to_int(token: str, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ModelFormatError("%s is not an integer: %r" % (what, token))


def _to_float(token: str, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ModelFormatError("%s is not a number: %r" % (what, token))


def _float_row(tokens: list[str], n: int, what: str) -> np.ndarray:
    if len(tokens) != n:
        raise ModelFormatError("%s has %d values, expected %d" % (what, len(tokens), n))
    return np.array([_to_float(t, what) for t in tokens], dtype=np.float64)


def _parse_params(kind: str, tokens: list[str]):
    pairs = {}
    for token in tokens:
        if "=" not in token:
            raise ModelFormatError("malformed params token %r" % token)
        key, val = token.split("=", 1)
        pairs[key] = val
    try:
        if kind == "rf":
            fps = pairs["features_per_split"]
            return RfParams(_to_int(pairs["n_estimators"], "n_estimators"),
                            _to_int(pairs["max_depth"], "max_depth"),
                            _to_int(pairs["min_samples_split"], "min_samples_split"),
                            fps if fps == "sqrt" else _to_int(fps, "features_per_split"))
        if kind == "svm":
            return SvmParams(_to_float(pairs["lambda_reg"], "lambda_reg"),
                             _to_int(pairs["epochs"], "epochs"))
        if kind == "lda":
            return LdaParams(_to_float(pairs["shrinkage"], "shrinkage"))
        if kind == "gbdt":
            return GbdtParams(_to_int(pairs["n_rounds"], "n_rounds"),
                              _to_float(pairs["learning_rate"], "learning_rate"),
                              _to_int(pairs["max_leaves"], "max_leaves"),
                              _to_float(pairs["lambda_l2"], "lambda_l2"),
                              _to_float(pairs["min_leaf_weight"], "min_leaf_weight"))
    except KeyError as exc:
        raise ModelFormatError("params block is missing %s" % exc)
    except ValueError as exc:
        raise ModelFormatError("invalid params: %s" % exc)
    raise ModelFormatError("unknown model kind %r" % kind)


def _parse_forest_tree(reader: _Reader) -> DecisionTree:
    n_nodes = _to_int(reader.one("tree"), "node count")
    feature = [0] * n_nodes
    left = [0] * n_nodes
    right = [0] * n_nodes
    neg = [0] * n_nodes
    pos = [0] * n_nodes
    for i in range(n_nodes):
        parts = reader.next("node %d" % i).split(" ")
        if len(parts) < 2 or _to_int(parts[0], "node id") != i:
            raise ModelFormatError("node %d of a tree is out of order" % i)
        if parts[1] == "split" and len(parts) == 7:
            feature[i] = _to_int(parts[2], "feature")
            left[i] = _to_int(parts[3], "left")
            right[i] = _to_int(parts[4], "right")
            neg[i] = _to_int(parts[5], "neg")
            pos[i] = _to_int(parts[6], "pos")
            # children carry higher ids than their parent, which also rules
            # out link cycles in hand-edited files
            if not (i < left[i] < n_nodes and i < right[i] < n_nodes):
                raise ModelFormatError("node %d links are not forward" % i)
        elif parts[1] == "leaf" and len(parts) == 4:
            feature[i] = -1
            left[i] = right[i] = -1
            neg[i] = _to_int(parts[2], "neg")
            pos[i] = _to_int(parts[3], "pos")
        else:
            raise ModelFormatError("unparseable node line %r" % " ".join(parts))
    if n_nodes == 0:
        raise ModelFormatError("a tree needs at least one node")
    return DecisionTree(feature, left, right, neg, pos)


def _parse_gbdt_tree(reader: _Reader) -> GbdtTree:
    n_nodes = _to_int(reader.one("tree"), "node count")
    feature = [0] * n_nodes
    left = [0] * n_nodes
    right = [0] * n_nodes
    value = [0.0] * n_nodes
    count = [0] * n_nodes
    gain = [0.0] * n_nodes
    for i in range(n_nodes):
        parts = reader.next("node %d" % i).split(" ")
        if len(parts) < 2 or _to_int(parts[0], "node id") != i:
            raise ModelFormatError("node %d of a tree is out of order" % i)
        if parts[1] == "split" and len(parts) == 7:
            feature[i] = _to_int(parts[2], "feature")
            left[i] = _to_int(parts[3], "left")
            right[i] = _to_int(parts[4], "right")
            count[i] = _to_int(parts[5], "count")
            gain[i] = _to_float(parts[6], "gain")
            if not (i < left[i] < n_nodes and i < right[i] < n_nodes):
                raise ModelFormatError("node %d links are not forward" % i)
        elif parts[1] == "leaf" and len(parts) == 4:
            feature[i] = -1
            left[i] = right[i] = -1
            value[i] = _to_float(parts[2], "value")
            count[i] = _to_int(parts[3], "count")
        else:
            raise ModelFormatError("unparseable node line %r" % " ".join(parts))
    if n_nodes == 0:
        raise ModelFormatError("a tree needs at least one node")
    return GbdtTree(feature, left, right, value, count, gain)


def model_from_text(text: str) -> TrainedModel:
    reader = _Reader(text)
    head = reader.next("the magic line").split(" ")
    if len(head) != 2 or head[0] != _MAGIC:
        raise ModelFormatError("not a model file (bad magic line)")
    version = _to_int(head[1], "format version")
    if version < 1:
        raise ModelFormatError("nonsense format version %d" % version)
    if version > FORMAT_VERSION:
        raise ModelVersionError("file is format version %d, this build reads up to %d"
                                % (version, FORMAT_VERSION))
    kind = reader.one("kind")
    seed = _to_int(reader.one("seed"), "seed")
    params = _parse_params(kind, reader.tagged("params"))
    n_names = _to_int(reader.one("schema"), "schema size")
    names = tuple(reader.next("schema name %d" % i) for i in range(n_names))
    try:
        schema = PermissionSchema(names)
        spec = ClassifierSpec(kind, params, seed)
    except ValueError as exc:
        raise ModelFormatError(str(exc))

    if kind == "rf":
        n_trees = _to_int(reader.one("forest"), "tree count")
        if n_trees < 1:
            raise ModelFormatError("a forest needs at least one tree")
        state = ForestModel([_parse_forest_tree(reader) for _ in range(n_trees)])
    elif kind == "svm":
        d = _to_int(reader.one("svm"), "dimension")
        if d != n_names:
            raise ModelFormatError("svm dimension %d != schema size %d" % (d, n_names))
        bias = _to_float(reader.one("bias"), "bias")
        w = _float_row(reader.tagged("w"), d, "weight vector")
        state = SvmModel(w, bias)
    elif kind == "lda":
        d = _to_int(reader.one("lda"), "dimension")
        if d != n_names:
            raise ModelFormatError("lda dimension %d != schema size %d" % (d, n_names))
        priors = _float_row(reader.tagged("prior"), 2, "priors")
        mean0 = _float_row(reader.tagged("mean0"), d, "mean0")
        mean1 = _float_row(reader.tagged("mean1"), d, "mean1")
        if reader.next("the precision block") != "precision":
            raise ModelFormatError("expected the precision block")
        rows = [_float_row(reader.next("precision row %d" % i).split(" "), d,
                           "precision row %d" % i) for i in range(d)]
        state = LdaModel(np.stack([mean0, mean1]), np.stack(rows), priors)
    elif kind == "gbdt":
        tokens = reader.tagged("gbdt")
        if len(tokens) != 2:
            raise ModelFormatError("gbdt header needs a tree count and f0")
        n_trees = _to_int(tokens[0], "tree count")
        if n_trees < 0:
            raise ModelFormatError("negative tree count")
        f0 = _to_float(tokens[1], "f0")
        state = GbdtModel(f0, [_parse_gbdt_tree(reader) for _ in range(n_trees)])
    else:
        raise ModelFormatError("unknown model kind %r" % kind)

    if reader.next("the end marker") != "end":
        raise ModelFormatError("expected the end marker")
    if not reader.done():
        raise ModelFormatError("trailing content after the end marker")
    return TrainedModel(spec, schema, state)


def load_model(path) -> TrainedModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ModelFormatError("%s is not UTF-8 text: %s" % (path, exc))
    return model_from_text(text)
