"""Bootstrap-aggregated Gini trees with majority voting.

Tree t draws everything it needs from child(seed, t): first n bootstrap row
indices (uniform_index(n), n draws), then its per-node feature subsamples.
Trees therefore never share stream state and can be grown in any order, or
concurrently, with bit-identical results.
"""

from __future__ import annotations

import numpy as np

from .. import rng as rngmod
from .tree import DecisionTree, tree_fit


class ForestModel:
    __slots__ = ("trees",)

    def __init__(self, trees: list[DecisionTree]):
        self.trees = trees

    def scores(self, x: np.ndarray) -> np.ndarray:
        """Fraction of trees voting Malicious, per row."""
        votes = np.zeros(x.shape[0], dtype=np.int64)
        for tree in self.trees:
            votes += tree.vote(x)
        return votes / len(self.trees)

    def labels(self, x: np.ndarray) -> np.ndarray:
        # an exact 50:50 vote goes to Benign, hence the strict inequality
        return (self.scores(x) > 0.5).astype(np.uint8)


def rf_fit(x: np.ndarray, y: np.ndarray, params, seed: int) -> ForestModel:
    n = x.shape[0]
    trees = []
    for t in range(params.n_estimators):
        stream = rngmod.child(seed, t)
        boot = stream.index_block(n, n)
        trees.append(tree_fit(x[boot], y[boot], params.max_depth,
                              params.min_samples_split, params.features_per_split,
                              stream))
    return ForestModel(trees)
