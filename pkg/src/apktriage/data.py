"""Dataset ingestion, deterministic splits, and synthetic benchmarks.

The CSV grammar is deliberately rigid so byte-identical files mean identical
datasets: UTF-8, comma-separated, first line is the header, every other cell
is exactly `0` or `1`, and quoting is rejected outright (permission names
contain no commas). The label column may sit anywhere; every remaining
column becomes a schema feature in header order.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Dataset, PermissionSchema
from .errors import (
    CsvFormatError,
    CsvSchemaError,
    CsvValueError,
    FoldError,
    StratificationError,
)
from .rng import Rng

DEFAULT_LABEL_COLUMN = "label"


def load_csv(path, label_col: str = DEFAULT_LABEL_COLUMN) -> Dataset:
    """Read a strict binary CSV into a Dataset."""
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise CsvFormatError("%s is not UTF-8: %s" % (path, exc))
    if raw.startswith("﻿"):
        raw = raw[1:]
    if '"' in raw:
        raise CsvFormatError("quoted fields are not part of the grammar")
    lines = raw.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    lines = [line[:-1] if line.endswith("\r") else line for line in lines]
    if not lines or lines[0] == "":
        raise CsvFormatError("empty file")

    header = lines[0].split(",")
    if any(name == "" for name in header):
        raise CsvSchemaError("empty column name in header")
    if len(set(header)) != len(header):
        dupes = sorted({n for n in header if header.count(n) > 1})
        raise CsvSchemaError("duplicate column names: %s" % ", ".join(dupes))
    if label_col not in header:
        raise CsvSchemaError("no %r column in header" % label_col)
    label_at = header.index(label_col)
    names = tuple(n for i, n in enumerate(header) if i != label_at)
    if not names:
        raise CsvSchemaError("no feature columns besides the label")
    schema = PermissionSchema(names)

    n_rows = len(lines) - 1
    if n_rows == 0:
        raise CsvFormatError("header but no data rows")
    x = np.zeros((n_rows, len(names)), dtype=np.uint8)
    y = np.zeros(n_rows, dtype=np.uint8)
    for r, line in enumerate(lines[1:]):
        cells = line.split(",")
        if len(cells) != len(header):
            raise CsvFormatError("row %d has %d cells, expected %d"
                                 % (r + 2, len(cells), len(header)))
        col = 0
        for c, cell in enumerate(cells):
            if cell == "0":
                bit = 0
            elif cell == "1":
                bit = 1
            else:
                raise CsvValueError("row %d, column %r: %r is not 0 or 1"
                                    % (r + 2, header[c], cell))
            if c == label_at:
                y[r] = bit
            else:
                x[r, col] = bit
                col += 1
    return Dataset(schema, x, y)


def write_csv(ds: Dataset, path, label_col: str = DEFAULT_LABEL_COLUMN) -> None:
    """Inverse of load_csv; the label lands in the last column."""
    if label_col in ds.schema.names:
        raise ValueError("label column %r collides with a feature name" % label_col)
    lines = [",".join(ds.schema.names + (label_col,))]
    for i in range(len(ds)):
        row = ds.x[i]
        lines.append(",".join([str(int(v)) for v in row] + [str(int(ds.y[i]))]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _class_indices(ds: Dataset) -> tuple[np.ndarray, np.ndarray]:
    y = ds.y
    return np.where(y == 0)[0], np.where(y == 1)[0]


def split_70_30(ds: Dataset, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Stratified 70:30 split; returns sorted (train, test) index arrays.

    The train side holds floor(0.7*N) samples in total, floor(0.7*n_c) from
    each class; when those floors leave one sample short, the class whose
    0.7*n_c has the larger fractional part gets it (ties favor Benign).
    Class members are shuffled with a single Rng(seed) stream, Benign first.
    """
    idx0, idx1 = _class_indices(ds)
    if len(idx0) == 0 or len(idx1) == 0:
        raise StratificationError("both classes must be present to stratify")
    total_train = len(ds) * 7 // 10
    take = [len(idx0) * 7 // 10, len(idx1) * 7 // 10]
    if take[0] + take[1] < total_train:
        # at most one short with two classes; compare tenths remainders
        rem0, rem1 = len(idx0) * 7 % 10, len(idx1) * 7 % 10
        take[1 if rem1 > rem0 else 0] += 1

    rng = Rng(seed)
    train_parts, test_parts = [], []
    for cls, idx in enumerate((idx0, idx1)):
        order = list(idx)
        rng.shuffle(order)
        train_parts.extend(order[:take[cls]])
        test_parts.extend(order[take[cls]:])
    return (np.sort(np.array(train_parts, dtype=np.int64)),
            np.sort(np.array(test_parts, dtype=np.int64)))


def stratified_kfold(ds: Dataset, k: int, seed: int) -> list[np.ndarray]:
    """k stratified folds as sorted index arrays.

    Each class is shuffled with one Rng(seed) stream (Benign first) and dealt
    round-robin; the dealing pointer carries over from class to class, which
    keeps both the fold sizes and the per-class counts within one of each
    other.
    """
    if k < 2:
        raise ValueError("need at least 2 folds, got %d" % k)
    idx0, idx1 = _class_indices(ds)
    for cls, idx in ((0, idx0), (1, idx1)):
        if len(idx) < k:
            raise FoldError("class %d has %d members, fewer than %d folds"
                            % (cls, len(idx), k))
    rng = Rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    pointer = 0
    for idx in (idx0, idx1):
        order = list(idx)
        rng.shuffle(order)
        for sample in order:
            folds[pointer].append(sample)
            pointer = (pointer + 1) % k
    return [np.sort(np.array(fold, dtype=np.int64)) for fold in folds]


@dataclass(frozen=True)
class LabelRule:
    """Boolean labeling rule over feature indices: or / and / atleast(m)."""

    kind: str
    features: tuple[int, ...]
    m: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        if self.kind not in ("or", "and", "atleast"):
            raise ValueError("unknown rule kind %r" % self.kind)
        if not self.features:
            raise ValueError("rule needs at least one feature index")
        if self.kind == "atleast":
            if self.m is None or not 1 <= self.m <= len(self.features):
                raise ValueError("atleast needs 1 <= m <= %d" % len(self.features))
        elif self.m is not None:
            raise ValueError("m only applies to atleast rules")

    def evaluate(self, bits) -> int:
        hits = sum(int(bits[f]) for f in self.features)
        if self.kind == "or":
            return 1 if hits >= 1 else 0
        if self.kind == "and":
            return 1 if hits == len(self.features) else 0
        return 1 if hits >= self.m else 0


def rule_or(*features: int) -> LabelRule:
    return LabelRule("or", features)


def rule_and(*features: int) -> LabelRule:
    return LabelRule("and", features)


def rule_atleast(m: int, *features: int) -> LabelRule:
    return LabelRule("atleast", features, m)


def synth_generate(n: int, d: int, rule: LabelRule, noise: float, seed: int) -> Dataset:
    """Random binary dataset labeled by `rule`, labels flipped w.p. `noise`.

    Draw order per row: d fair bits (uniform_index(2) each), then one
    next_float53() for the flip decision. The flip draw happens even at
    noise=0 so the same seed gives the same feature matrix at every noise
    level. Schema names are f0..f{d-1}.
    """
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    if not 0.0 <= noise <= 1.0:
        raise ValueError("noise must lie in [0, 1], got %r" % noise)
    if max(rule.features) >= d:
        raise ValueError("rule uses feature %d but d=%d" % (max(rule.features), d))
    rng = Rng(seed)
    x = np.zeros((n, d), dtype=np.uint8)
    y = np.zeros(n, dtype=np.uint8)
    for i in range(n):
        row = x[i]
        for j in range(d):
            row[j] = rng.uniform_index(2)
        label = rule.evaluate(row)
        if rng.next_float53() < noise:
            label ^= 1
        y[i] = label
    schema = PermissionSchema(tuple("f%d" % j for j in range(d)))
    return Dataset(schema, x, y)
