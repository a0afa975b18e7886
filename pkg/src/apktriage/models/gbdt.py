"""Gradient boosted regression trees with leaf-wise (best-first) growth.

Logistic loss on {0,1} labels. The initial raw score is the training
log-odds F0 = log(p / (1 - p)). Each round computes per-sample gradients
g_i = sigmoid(F_i) - y_i and hessians h_i = sigmoid(F_i)*(1 - sigmoid(F_i)),
then grows one tree: starting from a single root leaf, repeatedly split the
live leaf with the largest gain

    gain = 0.5 * (GL^2/(HL + lambda) + GR^2/(HR + lambda) - G^2/(H + lambda))

until the tree has max_leaves leaves or no leaf has a positive-gain split
whose children both carry hessian weight >= min_leaf_weight. Equal gains are
settled by leaf creation order (root is 0, children are numbered left then
right as they appear), then by the lower feature index; np.argmax supplies
the latter because features are scanned in index order. Leaf values are
-G/(H + lambda) scaled by the learning rate, already folded into the stored
value.
"""

from __future__ import annotations

import numpy as np

from .svm import _sigmoid
from .tree import route_to_leaves


class GbdtTree:
    """Flat arrays; feature == -1 marks a leaf carrying `value`. `count` and
    `gain` stay around for importance; `split_sequence` records the order of
    (leaf_id, feature) choices for verification and is not serialized."""

    __slots__ = ("feature", "left", "right", "value", "count", "gain", "split_sequence")

    def __init__(self, feature, left, right, value, count, gain, split_sequence=()):
        self.feature = np.asarray(feature, dtype=np.int32)
        self.left = np.asarray(left, dtype=np.int32)
        self.right = np.asarray(right, dtype=np.int32)
        self.value = np.asarray(value, dtype=np.float64)
        self.count = np.asarray(count, dtype=np.int64)
        self.gain = np.asarray(gain, dtype=np.float64)
        self.split_sequence = tuple(split_sequence)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def predict_raw(self, x: np.ndarray) -> np.ndarray:
        at = route_to_leaves(self.feature, self.left, self.right, x)
        return self.value[at]


class GbdtModel:
    __slots__ = ("f0", "trees")

    def __init__(self, f0: float, trees: list[GbdtTree]):
        self.f0 = float(f0)
        self.trees = trees

    def raw(self, x: np.ndarray) -> np.ndarray:
        out = np.full(x.shape[0], self.f0)
        for tree in self.trees:
            out += tree.predict_raw(x)
        return out

    def scores(self, x: np.ndarray) -> np.ndarray:
        return _sigmoid(self.raw(x))

    def labels(self, x: np.ndarray) -> np.ndarray:
        return (self.raw(x) >= 0.0).astype(np.uint8)


def _best_split(x, g, h, idx, g_sum, h_sum, lam, min_weight):
    """(gain, feature, G_right, H_right) of the best split of one leaf, or
    None when no feature yields positive gain with two weighty children."""
    sub = x[idx].astype(np.float64)
    gr = g[idx] @ sub
    hr = h[idx] @ sub
    gl = g_sum - gr
    hl = h_sum - hr
    valid = (hl >= min_weight) & (hr >= min_weight)
    if not valid.any():
        return None
    with np.errstate(divide="ignore", invalid="ignore"):
        parent = g_sum * g_sum / (h_sum + lam)
        gains = 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent)
    gains[~valid] = -np.inf
    f = int(np.argmax(gains))
    if not gains[f] > 0.0:
        return None
    return float(gains[f]), f, float(gr[f]), float(hr[f])


def grow_tree(x: np.ndarray, g: np.ndarray, h: np.ndarray, params) -> GbdtTree:
    """One leaf-wise tree for the given gradient/hessian vectors."""
    lam = params.lambda_l2
    n = x.shape[0]
    feature, left, right = [-1], [-1], [-1]
    value, count, gain = [0.0], [n], [0.0]
    idx0 = np.arange(n, dtype=np.int64)
    g0, h0 = float(g.sum()), float(h.sum())
    # live leaves in creation order: node id -> (indices, G, H, best split)
    leaves = {0: (idx0, g0, h0,
                  _best_split(x, g, h, idx0, g0, h0, lam, params.min_leaf_weight))}
    sequence = []

    while len(leaves) < params.max_leaves:
        pick, pick_gain = -1, 0.0
        for node in leaves:  # insertion order == creation order
            best = leaves[node][3]
            if best is not None and best[0] > pick_gain:
                pick, pick_gain = node, best[0]
        if pick < 0:
            break
        idx, g_sum, h_sum, (gn, f, gr, hr) = leaves.pop(pick)
        sequence.append((pick, f))
        bits = x[idx, f]
        idx_l, idx_r = idx[bits == 0], idx[bits == 1]
        ids = []
        for child_idx, child_g, child_h in ((idx_l, g_sum - gr, h_sum - hr),
                                            (idx_r, gr, hr)):
            node = len(feature)
            ids.append(node)
            feature.append(-1)
            left.append(-1)
            right.append(-1)
            value.append(0.0)
            count.append(len(child_idx))
            gain.append(0.0)
            leaves[node] = (child_idx, child_g, child_h,
                            _best_split(x, g, h, child_idx, child_g, child_h,
                                        lam, params.min_leaf_weight))
        feature[pick] = f
        left[pick], right[pick] = ids
        gain[pick] = gn

    lr = params.learning_rate
    for node, (idx, g_sum, h_sum, _) in leaves.items():
        denom = h_sum + lam
        value[node] = -g_sum / denom * lr if denom > 0 else 0.0
    return GbdtTree(feature, left, right, value, count, gain, sequence)


def gbdt_fit(x: np.ndarray, y: np.ndarray, params) -> GbdtModel:
    from ..errors import TrainingError

    yf = np.asarray(y, dtype=np.float64)
    p = float(yf.mean())
    if not 0.0 < p < 1.0:
        raise TrainingError("log-odds need both classes in the training set")
    f0 = float(np.log(p / (1.0 - p)))
    raw = np.full(x.shape[0], f0)
    trees = []
    for _ in range(params.n_rounds):
        prob = _sigmoid(raw)
        g = prob - yf
        h = prob * (1.0 - prob)
        tree = grow_tree(x, g, h, params)
        raw += tree.predict_raw(x)
        trees.append(tree)
    return GbdtModel(f0, trees)
