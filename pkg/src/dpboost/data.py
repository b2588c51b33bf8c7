"""Tabular data pipeline: CSV ingestion, one-hot encoding, [-1,1] normalization,
label balancing, and train/test splitting.

All types are immutable after construction and all operations are pure
functions of (input, seed), so repeated runs with the same seed produce
bit-identical outputs.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass

import numpy as np

# Field values treated as missing; rows containing any of them are dropped
# during encoding (the drop count is reported via a warning).
MISSING_TOKENS = frozenset({"", "?"})

NUMERIC = "numeric"
CATEGORICAL = "categorical"


class DataError(ValueError):
    """Raised for malformed input files, schemas, or dataset contracts."""


@dataclass(frozen=True)
class ColumnSpec:
    """Declared kind and (for numerics) exogenous value range of one raw column."""

    name: str
    kind: str
    min: float | None = None
    max: float | None = None

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise DataError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.min is not None and self.max is not None and not self.min < self.max:
            raise DataError(f"column {self.name!r}: range requires min < max")


@dataclass(frozen=True)
class LabelSpec:
    """Label column name plus the two raw values mapped onto +1 / -1."""

    name: str
    positive: str
    negative: str

    def __post_init__(self):
        if self.positive == self.negative:
            raise DataError("label mapping must be a bijection onto {-1,+1}")


@dataclass(frozen=True)
class Schema:
    """Feature column declarations and the binary label mapping."""

    columns: tuple[ColumnSpec, ...]
    label: LabelSpec

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise DataError("duplicate column names in schema")
        if self.label.name in names:
            raise DataError(f"label column {self.label.name!r} also declared as a feature")

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def column(self, name: str) -> ColumnSpec:
        for c in self.columns:
            if c.name == name:
                return c
        raise DataError(f"column {name!r} not in schema")

    @classmethod
    def from_dict(cls, d: dict) -> "Schema":
        try:
            cols = tuple(
                ColumnSpec(
                    name=c["name"],
                    kind=c["kind"],
                    min=c.get("min"),
                    max=c.get("max"),
                )
                for c in d["columns"]
            )
            label = LabelSpec(
                name=d["label"]["name"],
                positive=str(d["label"]["positive"]),
                negative=str(d["label"]["negative"]),
            )
        except KeyError as exc:
            raise DataError(f"schema is missing required key: {exc}") from exc
        return cls(columns=cols, label=label)

    @classmethod
    def from_json_file(cls, path) -> "Schema":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class RawTable:
    """Parsed CSV contents: header, string records, and the label column name."""

    header: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]
    label_column: str

    @property
    def n(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class Dataset:
    """Encoded observation matrix with +/-1 labels and a column manifest.

    ``columns`` records, per encoded column, the raw source column and an
    encoding tag: ``"numeric"`` for pass-through columns and ``"=<value>"``
    for one-hot indicator columns.
    """

    X: np.ndarray
    y: np.ndarray
    columns: tuple[tuple[str, str], ...]

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int64)
        if X.ndim != 2:
            raise DataError("X must be a 2-d matrix")
        if y.shape != (X.shape[0],):
            raise DataError("y length must match the number of rows")
        if X.shape[0] >= 1 and not np.all(np.abs(y) == 1):
            raise DataError("labels must lie in {-1,+1}")
        if X.shape[1] != len(self.columns):
            raise DataError("column manifest length must match X width")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def column_names(self) -> tuple[str, ...]:
        return tuple(src if tag == NUMERIC else f"{src}{tag}" for src, tag in self.columns)

    def take(self, idx: np.ndarray) -> "Dataset":
        """New dataset from a row index array (copies; order preserved)."""
        return Dataset(X=self.X[idx], y=self.y[idx], columns=self.columns)


@dataclass(frozen=True)
class FeatureSplit:
    """Partition of encoded column indices into public and private sets."""

    public_cols: tuple[int, ...]
    private_cols: tuple[int, ...]

    def __post_init__(self):
        pub, pri = set(self.public_cols), set(self.private_cols)
        if pub & pri:
            raise DataError("public and private column sets overlap")
        object.__setattr__(self, "public_cols", tuple(sorted(pub)))
        object.__setattr__(self, "private_cols", tuple(sorted(pri)))

    def validate_for(self, d: int) -> None:
        if set(self.public_cols) | set(self.private_cols) != set(range(d)):
            raise DataError(f"split does not cover all {d} columns exactly once")

    @classmethod
    def from_public_sources(
        cls, columns: tuple[tuple[str, str], ...], public_sources
    ) -> "FeatureSplit":
        """Split encoded columns by the raw source column names marked public."""
        public_sources = set(public_sources)
        known = {src for src, _ in columns}
        unknown = public_sources - known
        if unknown:
            raise DataError(f"public columns not present in dataset: {sorted(unknown)}")
        pub = tuple(i for i, (src, _) in enumerate(columns) if src in public_sources)
        pri = tuple(i for i, (src, _) in enumerate(columns) if src not in public_sources)
        return cls(public_cols=pub, private_cols=pri)

    @classmethod
    def all_private(cls, d: int) -> "FeatureSplit":
        return cls(public_cols=(), private_cols=tuple(range(d)))


def load_csv(path, schema: Schema) -> RawTable:
    """Read an RFC-4180-style CSV with a header row.

    Cell whitespace is stripped. Raises ``DataError`` on a missing header,
    a ragged row (the 0-based data row index is reported), or when the
    schema's label column is absent from the header.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: missing header") from None
        rows = []
        for i, row in enumerate(reader):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}: ragged row at index {i}")
            rows.append(tuple(cell.strip() for cell in row))
    if schema.label.name not in header:
        raise DataError(f"{path}: missing label column {schema.label.name!r}")
    for name in schema.feature_names:
        if name not in header:
            raise DataError(f"{path}: missing column {name!r}")
    return RawTable(header=tuple(header), rows=tuple(rows), label_column=schema.label.name)


def encode(raw: RawTable, schema: Schema) -> Dataset:
    """Expand categoricals to 0/1 one-hot columns and map labels to +/-1.

    Numeric columns pass through unchanged (normalization is a separate
    step). Rows containing missing values in any schema column are dropped,
    with the count reported through a warning. One-hot columns are created
    for the values observed in each categorical column, in sorted order.
    """
    col_idx = {name: raw.header.index(name) for name in schema.feature_names}
    label_idx = raw.header.index(raw.label_column)
    used = list(col_idx.values()) + [label_idx]

    kept = [r for r in raw.rows if not any(r[i] in MISSING_TOKENS for i in used)]
    dropped = raw.n - len(kept)
    if dropped:
        warnings.warn(f"encode: dropped {dropped} rows with missing values", stacklevel=2)
    if not kept:
        raise DataError("no rows remain after dropping missing values")

    label_map = {schema.label.positive: 1, schema.label.negative: -1}
    y = np.empty(len(kept), dtype=np.int64)
    for i, row in enumerate(kept):
        v = row[label_idx]
        if v not in label_map:
            raise DataError(f"unseen label value {v!r} at row {i}")
        y[i] = label_map[v]

    blocks: list[np.ndarray] = []
    manifest: list[tuple[str, str]] = []
    for spec in schema.columns:
        values = [row[col_idx[spec.name]] for row in kept]
        if spec.kind == NUMERIC:
            try:
                col = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise DataError(f"non-numeric token in column {spec.name!r}: {exc}") from exc
            blocks.append(col[:, None])
            manifest.append((spec.name, NUMERIC))
        else:
            levels = sorted(set(values))
            lookup = {v: j for j, v in enumerate(levels)}
            onehot = np.zeros((len(values), len(levels)), dtype=np.float64)
            onehot[np.arange(len(values)), [lookup[v] for v in values]] = 1.0
            blocks.append(onehot)
            manifest.extend((spec.name, f"={v}") for v in levels)

    X = np.hstack(blocks) if blocks else np.empty((len(kept), 0))
    return Dataset(X=X, y=y, columns=tuple(manifest))


def normalize(ds: Dataset, schema: Schema, *, ranges_from_data: bool = False) -> Dataset:
    """Map every column into [-1, 1].

    Numeric entry v with declared range (min, max) maps to
    ``2(v - min)/(max - min) - 1`` and is then clamped to [-1, 1]; one-hot
    indicator columns map {0,1} onto {-1,+1}.

    Ranges come from the schema. ``ranges_from_data=True`` computes missing
    ranges from the data instead, which leaks the observed feature extremes
    and therefore emits a warning.
    """
    X = ds.X.copy()
    for j, (src, tag) in enumerate(ds.columns):
        if tag == NUMERIC:
            spec = schema.column(src)
            lo, hi = spec.min, spec.max
            if lo is None or hi is None:
                if not ranges_from_data:
                    raise DataError(
                        f"column {src!r}: no declared range; pass ranges_from_data=True "
                        "to compute one from the data (leaks feature extremes)"
                    )
                lo, hi = float(X[:, j].min()), float(X[:, j].max())
                if not lo < hi:
                    raise DataError(f"column {src!r}: degenerate range ({lo}, {hi})")
                warnings.warn(
                    f"normalize: range for {src!r} computed from data "
                    f"({lo}, {hi}); this is not covered by any privacy guarantee",
                    stacklevel=2,
                )
            if not lo < hi:
                raise DataError(f"column {src!r}: degenerate range ({lo}, {hi})")
            X[:, j] = np.clip(2.0 * (X[:, j] - lo) / (hi - lo) - 1.0, -1.0, 1.0)
        else:
            X[:, j] = 2.0 * X[:, j] - 1.0
    return Dataset(X=X, y=ds.y, columns=ds.columns)


def balance(ds: Dataset, rng: np.random.Generator) -> Dataset:
    """Equalize label counts by subsampling the majority class.

    Returns 2*min(n+, n-) rows: the minority class in full, the majority
    class subsampled uniformly without replacement, in shuffled order.
    """
    pos = np.flatnonzero(ds.y == 1)
    neg = np.flatnonzero(ds.y == -1)
    if len(pos) == 0 or len(neg) == 0:
        raise DataError("balance requires both labels to be present")
    m = min(len(pos), len(neg))
    pos = rng.permutation(pos)[:m]
    neg = rng.permutation(neg)[:m]
    idx = rng.permutation(np.concatenate([pos, neg]))
    return ds.take(idx)


def split(
    ds: Dataset, test_frac: float, rng: np.random.Generator
) -> tuple[Dataset, Dataset]:
    """Disjoint uniform-random partition with |test| = round(test_frac * n)."""
    if not 0.0 < test_frac < 1.0:
        raise DataError(f"test_frac must lie strictly between 0 and 1, got {test_frac}")
    n_test = int(round(test_frac * ds.n))
    if ds.n - n_test < 1:
        raise DataError("split would leave an empty training set")
    perm = rng.permutation(ds.n)
    return ds.take(perm[n_test:]), ds.take(perm[:n_test])
