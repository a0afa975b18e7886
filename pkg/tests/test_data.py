import numpy as np
import pytest

from apktriage.core import Dataset, PermissionSchema
from apktriage.data import (
    LabelRule,
    load_csv,
    rule_and,
    rule_atleast,
    rule_or,
    split_70_30,
    stratified_kfold,
    synth_generate,
    write_csv,
)
from apktriage.errors import (
    CsvFormatError,
    CsvSchemaError,
    CsvValueError,
    FoldError,
    StratificationError,
)


# -- CSV ---------------------------------------------------------------------

def test_load_csv_basic(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,b,label\n1,0,1\n0,1,0\n")
    ds = load_csv(p)
    assert ds.schema.names == ("a", "b")
    assert ds.x.tolist() == [[1, 0], [0, 1]]
    assert ds.y.tolist() == [1, 0]


def test_load_csv_label_column_anywhere(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("label,a,b\n1,1,0\n0,0,1\n")
    ds = load_csv(p)
    assert ds.schema.names == ("a", "b")
    assert ds.y.tolist() == [1, 0]
    assert ds.x.tolist() == [[1, 0], [0, 1]]


def test_load_csv_strips_bom(tmp_path):
    p = tmp_path / "d.csv"
    p.write_bytes(b"\xef\xbb\xbfa,label\n1,1\n")
    ds = load_csv(p)
    assert ds.schema.names == ("a",)


def test_load_csv_crlf(tmp_path):
    p = tmp_path / "d.csv"
    p.write_bytes(b"a,label\r\n1,0\r\n0,1\r\n")
    ds = load_csv(p)
    assert ds.y.tolist() == [0, 1]


def test_load_csv_rejects_quotes(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text('a,label\n"1",0\n')
    with pytest.raises(CsvFormatError):
        load_csv(p)


def test_load_csv_rejects_ragged(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,b,label\n1,0\n")
    with pytest.raises(CsvFormatError):
        load_csv(p)


def test_load_csv_rejects_empty_file(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("")
    with pytest.raises(CsvFormatError):
        load_csv(p)


def test_load_csv_rejects_header_only(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,label\n")
    with pytest.raises(CsvFormatError):
        load_csv(p)


def test_load_csv_missing_label(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,b\n1,0\n")
    with pytest.raises(CsvSchemaError):
        load_csv(p)


def test_load_csv_custom_label_column(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,verdict\n1,1\n")
    ds = load_csv(p, label_col="verdict")
    assert ds.y.tolist() == [1]


def test_load_csv_duplicate_header(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,a,label\n1,0,1\n")
    with pytest.raises(CsvSchemaError):
        load_csv(p)


def test_load_csv_bad_cell_reports_location(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,b,label\n1,0,1\n0,yes,0\n")
    with pytest.raises(CsvValueError) as err:
        load_csv(p)
    # rows are numbered as file lines, header included, so this is row 3
    assert "row 3" in str(err.value)
    assert "'b'" in str(err.value)


def test_load_csv_rejects_non_binary_cells(tmp_path):
    p = tmp_path / "d.csv"
    for bad in ("2", "-1", "1.0", " 1", "01", "true"):
        p.write_text("a,label\n%s,1\n" % bad)
        with pytest.raises(CsvValueError):
            load_csv(p)


def test_csv_roundtrip(tmp_path):
    ds = synth_generate(50, 6, rule_or(0, 1), noise=0.1, seed=5)
    p = tmp_path / "out.csv"
    write_csv(ds, p)
    back = load_csv(p)
    assert back == ds


def test_write_csv_label_collision(tmp_path):
    schema = PermissionSchema(("label", "b"))
    ds = Dataset(schema, np.array([[1, 0]]), np.array([1]))
    with pytest.raises(ValueError):
        write_csv(ds, tmp_path / "x.csv")


# -- split -------------------------------------------------------------------

def _balanced(n, seed=0):
    return synth_generate(n, 4, rule_or(0), noise=0.5, seed=seed)


def test_split_sizes_8078_case():
    # 8078 rows: 70% of the whole is 5654, leaving 2424 held out
    x = np.zeros((8078, 1), dtype=np.uint8)
    y = np.array([0] * 4039 + [1] * 4039, dtype=np.uint8)
    ds = Dataset(PermissionSchema(("p",)), x, y)
    tr, te = split_70_30(ds, 42)
    assert len(tr) == 5654 and len(te) == 2424
    assert int(ds.y[tr].sum()) == 2827  # stratified: half of each class


def test_split_disjoint_and_complete():
    ds = _balanced(101, seed=9)
    tr, te = split_70_30(ds, 1)
    merged = np.concatenate([tr, te])
    assert sorted(merged.tolist()) == list(range(101))


def test_split_deterministic():
    ds = _balanced(60)
    a = split_70_30(ds, 7)
    b = split_70_30(ds, 7)
    assert a[0].tolist() == b[0].tolist()
    assert a[1].tolist() == b[1].tolist()
    c = split_70_30(ds, 8)
    assert a[0].tolist() != c[0].tolist()


def test_split_indices_sorted():
    ds = _balanced(80, seed=2)
    tr, te = split_70_30(ds, 3)
    assert tr.tolist() == sorted(tr.tolist())
    assert te.tolist() == sorted(te.tolist())


def test_split_class_proportions_within_one():
    for seed in range(5):
        ds = synth_generate(137, 5, rule_or(0, 1), noise=0.3, seed=seed)
        tr, te = split_70_30(ds, seed)
        for cls in (0, 1):
            n_cls = int((ds.y == cls).sum())
            got = int((ds.y[tr] == cls).sum())
            assert abs(got - n_cls * 7 / 10) <= 1


def test_split_total_is_floor_70_percent():
    for n in (10, 11, 13, 99, 100, 101):
        ds = _balanced(n, seed=n)
        tr, te = split_70_30(ds, 0)
        assert len(tr) == n * 7 // 10
        assert len(te) == n - n * 7 // 10


def test_split_needs_both_classes():
    x = np.zeros((10, 1), dtype=np.uint8)
    y = np.ones(10, dtype=np.uint8)
    ds = Dataset(PermissionSchema(("p",)), x, y)
    with pytest.raises(StratificationError):
        split_70_30(ds, 0)


# -- k-fold ------------------------------------------------------------------

def test_kfold_partitions():
    ds = _balanced(100, seed=4)
    folds = stratified_kfold(ds, 10, 4)
    assert len(folds) == 10
    merged = np.concatenate(folds)
    assert sorted(merged.tolist()) == list(range(100))


def test_kfold_sizes_within_one():
    ds = _balanced(103, seed=1)
    folds = stratified_kfold(ds, 10, 0)
    sizes = [len(f) for f in folds]
    assert max(sizes) - min(sizes) <= 1
    assert sum(sizes) == 103


def test_kfold_class_balance_within_one():
    ds = _balanced(105, seed=6)
    folds = stratified_kfold(ds, 7, 2)
    for cls in (0, 1):
        counts = [int((ds.y[f] == cls).sum()) for f in folds]
        assert max(counts) - min(counts) <= 1


def test_kfold_deterministic():
    ds = _balanced(50, seed=3)
    a = stratified_kfold(ds, 5, 11)
    b = stratified_kfold(ds, 5, 11)
    assert all(x.tolist() == y.tolist() for x, y in zip(a, b))


def test_kfold_rejects_k_below_2():
    ds = _balanced(20)
    with pytest.raises(ValueError):
        stratified_kfold(ds, 1, 0)


def test_kfold_rejects_small_class():
    x = np.zeros((8, 1), dtype=np.uint8)
    y = np.array([0, 0, 0, 0, 0, 0, 1, 1], dtype=np.uint8)
    ds = Dataset(PermissionSchema(("p",)), x, y)
    with pytest.raises(FoldError):
        stratified_kfold(ds, 3, 0)


# -- label rules and the generator --------------------------------------------

def test_rule_or():
    r = rule_or(0, 2)
    assert r.evaluate([0, 1, 0]) == 0
    assert r.evaluate([1, 0, 0]) == 1
    assert r.evaluate([0, 0, 1]) == 1


def test_rule_and():
    r = rule_and(0, 1)
    assert r.evaluate([1, 0]) == 0
    assert r.evaluate([1, 1]) == 1


def test_rule_atleast():
    r = rule_atleast(2, 0, 1, 2)
    assert r.evaluate([1, 0, 0]) == 0
    assert r.evaluate([1, 1, 0]) == 1
    assert r.evaluate([1, 1, 1]) == 1


def test_rule_validation():
    with pytest.raises(ValueError):
        LabelRule("xor", (0, 1))
    with pytest.raises(ValueError):
        LabelRule("or", ())
    with pytest.raises(ValueError):
        rule_atleast(4, 0, 1)
    with pytest.raises(ValueError):
        LabelRule("or", (0, 1), m=1)


def test_synth_noise_zero_matches_rule():
    rule = rule_or(0, 3)
    ds = synth_generate(200, 6, rule, noise=0.0, seed=13)
    for i in range(200):
        assert ds.y[i] == rule.evaluate(ds.x[i])


def test_synth_deterministic():
    a = synth_generate(100, 5, rule_or(0), noise=0.2, seed=8)
    b = synth_generate(100, 5, rule_or(0), noise=0.2, seed=8)
    assert a == b


def test_synth_same_features_across_noise_levels():
    # the flip draw is consumed even at noise=0, so the feature matrix
    # depends only on the seed
    a = synth_generate(150, 7, rule_or(0, 1), noise=0.0, seed=17)
    b = synth_generate(150, 7, rule_or(0, 1), noise=0.3, seed=17)
    assert a.x.tolist() == b.x.tolist()


def test_synth_noise_rate_plausible():
    rule = rule_or(0, 1)
    ds = synth_generate(4000, 5, rule, noise=0.25, seed=3)
    flips = sum(int(ds.y[i] != rule.evaluate(ds.x[i])) for i in range(4000))
    assert 0.20 < flips / 4000 < 0.30


def test_synth_rejects_rule_outside_dims():
    with pytest.raises(ValueError):
        synth_generate(10, 3, rule_or(5), noise=0.0, seed=0)


def test_synth_rejects_bad_noise():
    with pytest.raises(ValueError):
        synth_generate(10, 3, rule_or(0), noise=1.5, seed=0)
