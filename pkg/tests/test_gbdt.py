import math

import numpy as np
import pytest

from apktriage.data import rule_or, synth_generate
from apktriage.errors import TrainingError
from apktriage.models import GbdtParams
from apktriage.models.gbdt import GbdtModel, GbdtTree, gbdt_fit, grow_tree
from apktriage.rng import Rng


def oracle_grow(x, g, h, params):
    """Reference leaf-wise grower, scalar arithmetic, no shared code with
    grow_tree beyond the documented gain formula and tie-break."""
    lam = params.lambda_l2
    n = x.shape[0]
    leaves = [(0, list(range(n)))]  # (creation id, rows), creation order
    next_id = 1
    sequence = []
    values = {}

    def stats(rows):
        return (math.fsum(float(g[i]) for i in rows),
                math.fsum(float(h[i]) for i in rows))

    def best_for(rows):
        gs, hs = stats(rows)
        best = None
        for f in range(x.shape[1]):
            right = [i for i in rows if x[i, f]]
            gr = math.fsum(float(g[i]) for i in right)
            hr = math.fsum(float(h[i]) for i in right)
            gl, hl = gs - gr, hs - hr
            if hl < params.min_leaf_weight or hr < params.min_leaf_weight:
                continue
            gain = 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam)
                          - gs * gs / (hs + lam))
            if gain > 0.0 and (best is None or gain > best[0]):
                best = (gain, f)
        return best

    while len(leaves) < params.max_leaves:
        pick = None
        for at, (leaf_id, rows) in enumerate(leaves):
            cand = best_for(rows)
            if cand is not None and (pick is None or cand[0] > pick[0]):
                pick = (cand[0], cand[1], at)
        if pick is None:
            break
        _, f, at = pick
        leaf_id, rows = leaves.pop(at)
        sequence.append((leaf_id, f))
        rows_l = [i for i in rows if not x[i, f]]
        rows_r = [i for i in rows if x[i, f]]
        leaves.insert(at, (next_id, rows_l))
        leaves.insert(at + 1, (next_id + 1, rows_r))
        next_id += 2
        # creation order must equal list order for the next pick loop
        leaves.sort(key=lambda item: item[0])
    for leaf_id, rows in leaves:
        gs, hs = stats(rows)
        denom = hs + lam
        values[leaf_id] = -gs / denom * params.learning_rate if denom > 0 else 0.0
    return sequence, values


def _dyadic(rng, n):
    # multiples of 1/4 keep every partial sum exact in binary floating
    # point, so the oracle and the implementation see identical gains
    g = np.array([(rng.uniform_index(17) - 8) / 4.0 for _ in range(n)])
    h = np.array([(1 + rng.uniform_index(12)) / 4.0 for _ in range(n)])
    return g, h


def test_split_sequence_matches_oracle():
    rng = Rng(314)
    params = GbdtParams(n_rounds=1, learning_rate=0.3, max_leaves=6,
                        lambda_l2=1.0, min_leaf_weight=0.5)
    for trial in range(40):
        n = 4 + rng.uniform_index(12)
        d = 1 + rng.uniform_index(4)
        x = np.array([[rng.uniform_index(2) for _ in range(d)]
                      for _ in range(n)], dtype=np.uint8)
        g, h = _dyadic(rng, n)
        tree = grow_tree(x, g, h, params)
        seq, _ = oracle_grow(x, g, h, params)
        # node ids line up because children are numbered in creation order
        assert tree.split_sequence == tuple(seq), "trial %d" % trial


def test_leaf_values_match_oracle():
    rng = Rng(2718)
    params = GbdtParams(n_rounds=1, learning_rate=0.25, max_leaves=5,
                        lambda_l2=2.0, min_leaf_weight=0.25)
    for trial in range(20):
        n = 5 + rng.uniform_index(10)
        x = np.array([[rng.uniform_index(2) for _ in range(3)]
                      for _ in range(n)], dtype=np.uint8)
        g, h = _dyadic(rng, n)
        tree = grow_tree(x, g, h, params)
        _, values = oracle_grow(x, g, h, params)
        impl_leaves = {i: float(tree.value[i])
                       for i in range(tree.n_nodes) if tree.feature[i] < 0}
        assert set(impl_leaves) == set(values)
        for leaf_id, v in values.items():
            assert abs(impl_leaves[leaf_id] - v) < 1e-12


def test_f0_is_log_odds():
    x = np.zeros((8, 2), dtype=np.uint8)
    y = np.array([1, 1, 1, 0, 0, 0, 0, 0], dtype=np.uint8)
    m = gbdt_fit(x, y, GbdtParams(n_rounds=0))
    assert abs(m.f0 - math.log((3 / 8) / (5 / 8))) < 1e-12


def test_zero_rounds_predicts_majority():
    x = np.zeros((6, 1), dtype=np.uint8)
    y = np.array([1, 1, 1, 1, 0, 0], dtype=np.uint8)
    m = gbdt_fit(x, y, GbdtParams(n_rounds=0))
    assert m.trees == []
    assert m.labels(x).tolist() == [1] * 6
    y2 = np.array([1, 1, 0, 0, 0, 0], dtype=np.uint8)
    m2 = gbdt_fit(x, y2, GbdtParams(n_rounds=0))
    assert m2.labels(x).tolist() == [0] * 6


def test_one_round_hand_example():
    # balanced 4-row stump: F0 = 0, g = +-1/2, h = 1/4 everywhere.
    # split on the single feature: G_r = -1, H_r = 0.5, lambda = 1,
    # so the right leaf value is 1/1.5 * lr = 1/15 for lr = 0.1
    x = np.array([[0], [0], [1], [1]], dtype=np.uint8)
    y = np.array([0, 0, 1, 1], dtype=np.uint8)
    params = GbdtParams(n_rounds=1, learning_rate=0.1, max_leaves=4,
                        lambda_l2=1.0, min_leaf_weight=0.25)
    m = gbdt_fit(x, y, params)
    tree = m.trees[0]
    assert tree.feature[0] == 0
    assert abs(tree.value[tree.right[0]] - 1.0 / 15.0) < 1e-12
    assert abs(tree.value[tree.left[0]] + 1.0 / 15.0) < 1e-12
    assert m.labels(x).tolist() == [0, 0, 1, 1]


def test_min_leaf_weight_blocks_small_children():
    # the same stump with the default min weight 1.0: each child would
    # carry only 0.5 hessian mass, so no split happens at all
    x = np.array([[0], [0], [1], [1]], dtype=np.uint8)
    y = np.array([0, 0, 1, 1], dtype=np.uint8)
    m = gbdt_fit(x, y, GbdtParams(n_rounds=1))
    assert m.trees[0].n_nodes == 1
    assert m.trees[0].split_sequence == ()


def test_max_leaves_caps_tree():
    ds = synth_generate(300, 6, rule_or(0, 1), noise=0.1, seed=4)
    for cap in (2, 3, 5):
        params = GbdtParams(n_rounds=1, max_leaves=cap, min_leaf_weight=0.25)
        m = gbdt_fit(ds.x, ds.y, params)
        n_leaves = int((m.trees[0].feature < 0).sum())
        assert n_leaves <= cap


def test_boosting_reduces_training_error():
    ds = synth_generate(500, 8, rule_or(0, 1, 2), noise=0.0, seed=9)
    few = gbdt_fit(ds.x, ds.y, GbdtParams(n_rounds=3))
    many = gbdt_fit(ds.x, ds.y, GbdtParams(n_rounds=60))
    err_few = float((few.labels(ds.x) != ds.y).mean())
    err_many = float((many.labels(ds.x) != ds.y).mean())
    assert err_many <= err_few
    assert err_many <= 0.01


def test_single_class_rejected():
    x = np.zeros((5, 2), dtype=np.uint8)
    with pytest.raises(TrainingError):
        gbdt_fit(x, np.ones(5, dtype=np.uint8), GbdtParams(n_rounds=1))
    with pytest.raises(TrainingError):
        gbdt_fit(x, np.zeros(5, dtype=np.uint8), GbdtParams(n_rounds=1))


def test_deterministic():
    ds = synth_generate(200, 5, rule_or(0), noise=0.2, seed=12)
    a = gbdt_fit(ds.x, ds.y, GbdtParams(n_rounds=10))
    b = gbdt_fit(ds.x, ds.y, GbdtParams(n_rounds=10))
    assert a.f0 == b.f0
    for ta, tb in zip(a.trees, b.trees):
        assert ta.value.tolist() == tb.value.tolist()
        assert ta.split_sequence == tb.split_sequence


def test_raw_accumulates_tree_outputs():
    ds = synth_generate(100, 4, rule_or(0), noise=0.1, seed=2)
    m = gbdt_fit(ds.x, ds.y, GbdtParams(n_rounds=4, min_leaf_weight=0.25))
    total = np.full(len(ds.x), m.f0)
    for tree in m.trees:
        total += tree.predict_raw(ds.x)
    assert np.allclose(m.raw(ds.x), total, atol=0)
    assert np.allclose(m.scores(ds.x), 1 / (1 + np.exp(-total)), atol=1e-12)


def test_score_half_at_zero_raw():
    m = GbdtModel(0.0, [])
    x = np.zeros((2, 1), dtype=np.uint8)
    assert m.scores(x).tolist() == [0.5, 0.5]
    assert m.labels(x).tolist() == [1, 1]  # raw >= 0 goes malicious
