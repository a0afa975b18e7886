"""Domain types: labels, permission schemas, binary feature datasets."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np


class Label(IntEnum):
    """Sample class. Malicious is the positive class everywhere."""

    BENIGN = 0
    MALICIOUS = 1


def feature_vector(bits) -> np.ndarray:
    """Validate and return a 1-d uint8 feature vector with values in {0, 1}."""
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise ValueError("feature vector must be 1-d, got shape %r" % (arr.shape,))
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError("feature vector values must be 0 or 1")
    out = arr.astype(np.uint8)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class PermissionSchema:
    """Ordered, unique permission names; position = feature index."""

    names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if len(self.names) == 0:
            raise ValueError("schema needs at least one permission name")
        if any(not isinstance(n, str) or n == "" for n in self.names):
            raise ValueError("permission names must be non-empty strings")
        if len(set(self.names)) != len(self.names):
            dupes = sorted({n for n in self.names if self.names.count(n) > 1})
            raise ValueError("duplicate permission names: %s" % ", ".join(dupes))

    def __len__(self) -> int:
        return len(self.names)

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError("%r is not in the schema" % name) from None


@dataclass(frozen=True)
class Dataset:
    """Immutable labeled sample matrix over a permission schema.

    x is (n, d) uint8 with values in {0, 1}; y is (n,) uint8 with values in
    {0, 1} where 1 means Malicious. Arrays are frozen after construction.
    """

    schema: PermissionSchema
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=np.uint8)
        y = np.ascontiguousarray(self.y, dtype=np.uint8)
        if x.ndim != 2:
            raise ValueError("x must be 2-d, got shape %r" % (x.shape,))
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise ValueError("y must be 1-d with one label per row of x")
        if x.shape[1] != len(self.schema):
            raise ValueError("x has %d columns but schema has %d names"
                             % (x.shape[1], len(self.schema)))
        src_x, src_y = np.asarray(self.x), np.asarray(self.y)
        if src_x.size and not np.isin(src_x, (0, 1)).all():
            raise ValueError("x values must be 0 or 1")
        if y.size and not np.isin(src_y, (0, 1)).all():
            raise ValueError("y values must be 0 or 1")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.x.shape[0]

    @property
    def n_features(self) -> int:
        return self.x.shape[1]

    def class_counts(self) -> tuple[int, int]:
        """(benign, malicious) sample counts."""
        pos = int(self.y.sum())
        return len(self) - pos, pos

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.schema, self.x[idx], self.y[idx])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.schema == other.schema
                and self.x.shape == other.x.shape
                and bool(np.array_equal(self.x, other.x))
                and bool(np.array_equal(self.y, other.y)))
