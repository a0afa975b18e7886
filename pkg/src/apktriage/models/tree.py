"""Gini decision tree over binary features.

Because every feature is a bit, the only split is `bit == 0 -> left,
bit == 1 -> right` (threshold 0.5). Node sample sets are kept as arbitrary
precision integer bitmasks over the (possibly bootstrapped) row positions,
so counting a candidate split is two ANDs and two popcounts instead of
fancy indexing.

Impurity comparison is exact: with binary labels the weighted child Gini of
a split is (2/n) * (pL*qL/nL + pR*qR/nR), so candidates are ranked by the
rational T = pL*qL/nL + pR*qR/nR using integer cross-multiplication. The
candidate with the smallest T wins; equal T keeps the lower feature index.
Zero-decrease splits are accepted (the stop conditions are depth, purity,
min_samples_split, and no candidate with two non-empty children).

Growth is depth-first, left child before right, and the per-node feature
subsample is drawn from the tree's rng by a partial Fisher-Yates over
0..d-1 (m draws of uniform_index); draw order never affects the winner
because candidates are evaluated in ascending feature order.
"""

from __future__ import annotations

from math import isqrt

import numpy as np

from ..rng import Rng


def resolve_features_per_split(features_per_split, d: int) -> int:
    """Map the 'sqrt' token or an explicit int to a count in 1..d."""
    if features_per_split == "sqrt":
        return max(1, isqrt(d))
    m = int(features_per_split)
    if not 1 <= m <= d:
        raise ValueError("features_per_split must lie in 1..%d, got %r" % (d, m))
    return m


def pack_columns(x: np.ndarray) -> list[int]:
    """Each column as a big int; bit j of column f is x[j, f]."""
    cols = []
    for f in range(x.shape[1]):
        packed = np.packbits(x[:, f], bitorder="little")
        cols.append(int.from_bytes(packed.tobytes(), "little"))
    return cols


class DecisionTree:
    """Flat node arrays; feature == -1 marks a leaf. Every node keeps its
    class counts so importance can be recomputed from the structure."""

    __slots__ = ("feature", "left", "right", "neg", "pos")

    def __init__(self, feature, left, right, neg, pos):
        self.feature = np.asarray(feature, dtype=np.int32)
        self.left = np.asarray(left, dtype=np.int32)
        self.right = np.asarray(right, dtype=np.int32)
        self.neg = np.asarray(neg, dtype=np.int64)
        self.pos = np.asarray(pos, dtype=np.int64)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def leaf_ids(self, x: np.ndarray) -> np.ndarray:
        return route_to_leaves(self.feature, self.left, self.right, x)

    def vote(self, x: np.ndarray) -> np.ndarray:
        """Per-row argmax vote, tie -> Benign (0)."""
        at = self.leaf_ids(x)
        return (self.pos[at] > self.neg[at]).astype(np.uint8)

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int32)
        best = 0
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depths[self.left[i]] = depths[i] + 1
                depths[self.right[i]] = depths[i] + 1
        if self.n_nodes:
            best = int(depths.max())
        return best


def route_to_leaves(feature, left, right, x: np.ndarray) -> np.ndarray:
    """Walk every row of x down the node arrays; returns leaf ids."""
    cur = np.zeros(x.shape[0], dtype=np.int64)
    while True:
        f = feature[cur]
        live = f >= 0
        if not live.any():
            return cur
        rows = np.nonzero(live)[0]
        bits = x[rows, f[rows]]
        cur[rows] = np.where(bits == 1, right[cur[rows]], left[cur[rows]])


def tree_fit(x: np.ndarray, y: np.ndarray, max_depth: int, min_samples_split: int,
             features_per_split, rng: Rng) -> DecisionTree:
    """Grow one tree on the given rows (already bootstrapped if desired)."""
    n, d = x.shape
    if n == 0:
        raise ValueError("cannot grow a tree on zero rows")
    m = resolve_features_per_split(features_per_split, d)
    cols = pack_columns(x)
    ymask = int.from_bytes(np.packbits(np.asarray(y, dtype=np.uint8),
                                       bitorder="little").tobytes(), "little")

    feature, left, right, neg, pos = [], [], [], [], []

    def new_node(count: int, positives: int) -> int:
        feature.append(-1)
        left.append(-1)
        right.append(-1)
        neg.append(count - positives)
        pos.append(positives)
        return len(feature) - 1

    def draw_candidates() -> list[int]:
        # partial Fisher-Yates over the identity permutation of 0..d-1;
        # draw order is discarded (candidates are evaluated in index order)
        pool = list(range(d))
        for i in range(m):
            j = i + rng.uniform_index(d - i)
            pool[i], pool[j] = pool[j], pool[i]
        return sorted(pool[:m])

    # explicit stack, left child pushed last so it grows first (preorder)
    root_mask = (1 << n) - 1
    stack = [(-1, 0, root_mask, n, int(np.asarray(y).sum()), 0)]
    while stack:
        parent, side, mask, count, positives, depth = stack.pop()
        node = new_node(count, positives)
        if parent >= 0:
            if side == 0:
                left[parent] = node
            else:
                right[parent] = node
        if (depth >= max_depth or count < min_samples_split
                or positives == 0 or positives == count):
            continue
        best_f = -1
        best_num = best_den = 0
        best_right = 0
        for f in draw_candidates():
            right_mask = mask & cols[f]
            n_r = right_mask.bit_count()
            if n_r == 0 or n_r == count:
                continue
            p_r = (right_mask & ymask).bit_count()
            n_l = count - n_r
            p_l = positives - p_r
            num = p_l * (n_l - p_l) * n_r + p_r * (n_r - p_r) * n_l
            den = n_l * n_r
            if best_f < 0 or num * best_den < best_num * den:
                best_f, best_num, best_den, best_right = f, num, den, right_mask
        if best_f < 0:
            continue
        n_r = best_right.bit_count()
        p_r = (best_right & ymask).bit_count()
        feature[node] = best_f
        stack.append((node, 1, best_right, n_r, p_r, depth + 1))
        stack.append((node, 0, mask & ~best_right, count - n_r, positives - p_r, depth + 1))
    return DecisionTree(feature, left, right, neg, pos)
