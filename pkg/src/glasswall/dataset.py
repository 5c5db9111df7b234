"""Tabular regression datasets: schema, CSV loading, splitting, synthesis.

A Dataset is columnar and immutable: numeric features are float64
arrays, categorical features are int64 code arrays, and the target is a
float64 array. Categorical codes are assigned by first appearance in
the source file; the label strings are kept so files and models can be
written back without losing the original vocabulary.
"""

import csv
import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParseError, SchemaError, SizeError
from .rng import substream

NUMERIC = "numeric"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class FeatureKind:
    """Declares a feature as numeric or categorical with a fixed cardinality."""

    kind: str
    cardinality: int | None = None

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise SchemaError(f"unknown feature kind {self.kind!r}")
        if self.kind == CATEGORICAL:
            if self.cardinality is None or self.cardinality < 2:
                raise SchemaError("categorical cardinality must be >= 2")
        elif self.cardinality is not None:
            raise SchemaError("numeric features take no cardinality")

    @property
    def is_categorical(self):
        return self.kind == CATEGORICAL

    @staticmethod
    def numeric():
        return FeatureKind(NUMERIC)

    @staticmethod
    def categorical(cardinality):
        return FeatureKind(CATEGORICAL, int(cardinality))


@dataclass(frozen=True)
class Schema:
    """Ordered feature declarations plus the target column name."""

    features: tuple
    target_name: str

    def __post_init__(self):
        feats = tuple((str(n), k) for n, k in self.features)
        object.__setattr__(self, "features", feats)
        names = [n for n, _ in feats]
        if not names:
            raise SchemaError("schema needs at least one feature")
        if len(set(names)) != len(names):
            raise SchemaError("feature names must be unique")
        if any(not n for n in names):
            raise SchemaError("feature names must be non-empty")
        if not self.target_name:
            raise SchemaError("target name must be non-empty")
        if self.target_name in names:
            raise SchemaError("target name collides with a feature name")

    @property
    def feature_names(self):
        return [n for n, _ in self.features]

    def kind_of(self, name):
        for n, k in self.features:
            if n == name:
                return k
        raise SchemaError(f"unknown feature {name!r}")

    def index_of(self, name):
        for i, (n, _) in enumerate(self.features):
            if n == name:
                return i
        raise SchemaError(f"unknown feature {name!r}")

    def select(self, names):
        """Schema projected onto ``names`` (given order), same target."""
        return Schema(tuple((n, self.kind_of(n)) for n in names), self.target_name)


class Dataset:
    """Immutable columnar dataset conforming to a Schema.

    ``columns`` holds one array per schema feature (float64 for numeric,
    int64 codes for categorical); ``target`` may be None for unlabeled
    prediction inputs. ``category_labels`` maps categorical feature
    names to their label list, indexed by code.
    """

    def __init__(self, schema, columns, target, category_labels=None):
        self.schema = schema
        cols = []
        n_rows = None
        for (name, kind), col in zip(schema.features, columns, strict=True):
            arr = np.asarray(col, dtype=np.int64 if kind.is_categorical else np.float64)
            if arr.ndim != 1:
                raise SchemaError(f"column {name!r} must be one-dimensional")
            if n_rows is None:
                n_rows = arr.shape[0]
            elif arr.shape[0] != n_rows:
                raise SizeError(f"column {name!r} has {arr.shape[0]} rows, expected {n_rows}")
            if kind.is_categorical:
                if arr.size and (arr.min() < 0 or arr.max() >= kind.cardinality):
                    raise DomainError(f"column {name!r} has codes outside [0, {kind.cardinality})")
            elif arr.size and not np.all(np.isfinite(arr)):
                raise DomainError(f"column {name!r} contains non-finite values")
            arr.flags.writeable = False
            cols.append(arr)
        self.columns = cols
        self.n_rows = 0 if n_rows is None else int(n_rows)
        if target is not None:
            target = np.asarray(target, dtype=np.float64)
            if target.shape[0] != self.n_rows:
                raise SizeError("target length does not match columns")
            if np.any(np.isnan(target)):
                raise DomainError("target contains NaN")
            target.flags.writeable = False
        self.target = target
        labels = {}
        for name, kind in schema.features:
            if not kind.is_categorical:
                continue
            if category_labels and name in category_labels:
                lab = [str(x) for x in category_labels[name]]
                if len(lab) != kind.cardinality:
                    raise SchemaError(f"labels for {name!r} must have length {kind.cardinality}")
                labels[name] = lab
        self.category_labels = labels

    def column(self, name):
        return self.columns[self.schema.index_of(name)]

    def row(self, i):
        """Raw feature values of row ``i`` in schema order."""
        return [col[i] for col in self.columns]

    def take(self, indices):
        """New Dataset restricted to the given row indices, order kept."""
        idx = np.asarray(indices, dtype=np.int64)
        cols = [col[idx] for col in self.columns]
        target = None if self.target is None else self.target[idx]
        return Dataset(self.schema, cols, target, self.category_labels)

    def select_features(self, names):
        """New Dataset projected onto the named features (given order)."""
        for n in names:
            self.schema.index_of(n)
        schema = self.schema.select(names)
        cols = [self.column(n) for n in names]
        return Dataset(schema, cols, self.target, self.category_labels)

    def content_hash(self):
        """Hex digest identifying schema, values and labels."""
        h = hashlib.sha256()
        for name, kind in self.schema.features:
            h.update(name.encode())
            h.update(kind.kind.encode())
            h.update(str(kind.cardinality).encode())
            if name in self.category_labels:
                for lab in self.category_labels[name]:
                    h.update(lab.encode() + b"\x00")
        h.update(self.schema.target_name.encode())
        for col in self.columns:
            h.update(col.tobytes())
        if self.target is not None:
            h.update(self.target.tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class SplitIndices:
    """Disjoint train/test row indices covering a dataset."""

    train: np.ndarray
    test: np.ndarray

    def __post_init__(self):
        train = np.asarray(self.train, dtype=np.int64)
        test = np.asarray(self.test, dtype=np.int64)
        object.__setattr__(self, "train", train)
        object.__setattr__(self, "test", test)
        if train.size == 0 or test.size == 0:
            raise SizeError("train and test must both be non-empty")
        if np.intersect1d(train, test).size:
            raise SizeError("train and test overlap")


def _parse_numeric(text, row, column):
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"row {row}, column {column!r}: cannot parse {text!r} as a number",
                         row=row, column=column) from None
    if not math.isfinite(value):
        raise ParseError(f"row {row}, column {column!r}: non-finite value {text!r}",
                         row=row, column=column)
    return value


def load_csv(path, schema, require_target=True):
    """Load a UTF-8 comma-delimited file against ``schema``.

    The header must contain exactly the schema's feature names plus the
    target (any column order). Categorical labels are coded by first
    appearance. With ``require_target=False`` the target column may be
    absent, producing an unlabeled Dataset.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, header row required") from None
        rows = list(reader)

    header = [h.strip() for h in header]
    wanted = list(schema.feature_names)
    has_target = schema.target_name in header
    if require_target and not has_target:
        raise SchemaError(f"{path}: missing target column {schema.target_name!r}")
    expected = set(wanted) | ({schema.target_name} if has_target else set())
    missing = expected - set(header)
    if missing:
        raise SchemaError(f"{path}: missing columns {sorted(missing)}")
    extra = set(header) - expected
    if extra:
        raise SchemaError(f"{path}: unexpected columns {sorted(extra)}")
    if len(set(header)) != len(header):
        raise SchemaError(f"{path}: duplicate header columns")

    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise ParseError(f"row {r + 2}: expected {len(header)} cells, found {len(row)}",
                             row=r + 2)

    col_pos = {name: header.index(name) for name in header}
    columns = []
    labels = {}
    for name, kind in schema.features:
        pos = col_pos[name]
        if kind.is_categorical:
            code_of = {}
            codes = np.empty(len(rows), dtype=np.int64)
            for r, row in enumerate(rows):
                lab = row[pos].strip()
                if lab not in code_of:
                    if len(code_of) >= kind.cardinality:
                        raise DomainError(
                            f"row {r + 2}, column {name!r}: label {lab!r} exceeds "
                            f"declared cardinality {kind.cardinality}")
                    code_of[lab] = len(code_of)
                codes[r] = code_of[lab]
            ordered = sorted(code_of, key=code_of.get)
            # Pad unseen tail codes with placeholder labels so the label
            # list always matches the declared cardinality.
            while len(ordered) < kind.cardinality:
                ordered.append(f"<unseen-{len(ordered)}>")
            labels[name] = ordered
            columns.append(codes)
        else:
            vals = np.empty(len(rows), dtype=np.float64)
            for r, row in enumerate(rows):
                vals[r] = _parse_numeric(row[pos].strip(), r + 2, name)
            columns.append(vals)

    target = None
    if has_target:
        pos = col_pos[schema.target_name]
        target = np.empty(len(rows), dtype=np.float64)
        for r, row in enumerate(rows):
            target[r] = _parse_numeric(row[pos].strip(), r + 2, schema.target_name)
    return Dataset(schema, columns, target, labels)


def _format_cell(value):
    return repr(float(value))


def save_csv(ds, path):
    """Write a Dataset back to CSV (schema column order, target last).

    Numerics are written as shortest round-trip decimals; categorical
    cells are written as their labels (codes when no labels exist).
    """
    names = ds.schema.feature_names
    header = names + ([ds.schema.target_name] if ds.target is not None else [])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(ds.n_rows):
            row = []
            for name, kind, col in zip(names, (k for _, k in ds.schema.features), ds.columns):
                if kind.is_categorical:
                    labs = ds.category_labels.get(name)
                    row.append(labs[col[i]] if labs else str(int(col[i])))
                else:
                    row.append(_format_cell(col[i]))
            if ds.target is not None:
                row.append(_format_cell(ds.target[i]))
            writer.writerow(row)


def split_random(ds, test_fraction, seed):
    """Shuffle rows and split with |train| = floor(n * (1 - test_fraction))."""
    n = ds.n_rows
    if n < 2:
        raise SizeError("need at least 2 rows to split")
    if not 0.0 < test_fraction < 1.0:
        raise DomainError("test_fraction must lie in (0, 1)")
    n_train = int(math.floor(n * (1.0 - test_fraction)))
    if n_train == 0 or n_train == n:
        raise SizeError(f"test_fraction={test_fraction} leaves an empty side for n={n}")
    perm = substream(seed, "split").permutation(n)
    return SplitIndices(perm[:n_train], perm[n_train:])


def kfold(ds, k, seed):
    """Shuffled k-fold partition; fold sizes differ by at most one."""
    n = ds.n_rows
    if not 2 <= k <= n:
        raise SizeError(f"k must lie in [2, {n}], got {k}")
    perm = substream(seed, "kfold").permutation(n)
    base, extra = divmod(n, k)
    folds = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        folds.append(perm[start:start + size])
        start += size
    out = []
    for i in range(k):
        train = np.concatenate([folds[j] for j in range(k) if j != i])
        out.append(SplitIndices(train, folds[i]))
    return out


@dataclass(frozen=True)
class FeatureGen:
    """One synthetic feature: how to sample it and its ground-truth effect."""

    name: str
    kind: FeatureKind = field(default_factory=FeatureKind.numeric)
    low: float = 0.0
    high: float = 1.0
    effect: object = None  # callable array -> array, or None for a noise feature
    labels: tuple = ()


@dataclass(frozen=True)
class PairGen:
    """Ground-truth pairwise effect between two named features."""

    first: str
    second: str
    effect: object = None  # callable (array, array) -> array


@dataclass(frozen=True)
class SyntheticSpec:
    """Generator description: features, optional pair effects, intercept."""

    features: tuple
    pairs: tuple = ()
    intercept: float = 0.0

    def truth(self, ds):
        """Evaluate the noiseless generator formula on a Dataset's columns."""
        total = np.full(ds.n_rows, self.intercept, dtype=np.float64)
        for fg in self.features:
            if fg.effect is not None:
                total += fg.effect(np.asarray(ds.column(fg.name), dtype=np.float64))
        for pg in self.pairs:
            a = np.asarray(ds.column(pg.first), dtype=np.float64)
            b = np.asarray(ds.column(pg.second), dtype=np.float64)
            total += pg.effect(a, b)
        return total


def make_synthetic(n, spec, noise_sd, seed):
    """Sample ``n`` rows from a SyntheticSpec and add Gaussian noise.

    The target is intercept + sum of per-feature effects + sum of pair
    effects + N(0, noise_sd). The spec object itself is the ground truth
    callers keep for comparison.
    """
    if n < 1:
        raise SizeError("n must be positive")
    if noise_sd < 0:
        raise DomainError("noise_sd must be >= 0")
    rng = substream(seed, "synth")
    columns = []
    labels = {}
    for fg in spec.features:
        if fg.kind.is_categorical:
            codes = rng.integers(0, fg.kind.cardinality, size=n)
            columns.append(codes.astype(np.int64))
            labels[fg.name] = list(fg.labels) if fg.labels else [f"c{i}" for i in range(fg.kind.cardinality)]
        else:
            columns.append(rng.uniform(fg.low, fg.high, size=n))
    schema = Schema(tuple((fg.name, fg.kind) for fg in spec.features), "y")
    ds = Dataset(schema, columns, np.zeros(n), labels)
    target = spec.truth(ds)
    if noise_sd > 0:
        target = target + noise_sd * rng.standard_normal(n)
    return Dataset(schema, columns, target, labels)


def linear_spec(slope=2.0):
    """y = slope * x1 on x1 ~ U(0, 1)."""
    return SyntheticSpec(features=(
        FeatureGen("x1", effect=lambda x, s=slope: s * x),
    ))


def shapes_spec():
    """y = 3*x1 - 2*x2^2 + step(x3 > 0.5); x2 spans [-1, 1] so its effect
    is non-monotone and invisible to a linear fit."""
    return SyntheticSpec(features=(
        FeatureGen("x1", effect=lambda x: 3.0 * x),
        FeatureGen("x2", low=-1.0, high=1.0, effect=lambda x: -2.0 * x * x),
        FeatureGen("x3", effect=lambda x: (x > 0.5).astype(np.float64)),
    ))


def interaction_spec(strength=1.0):
    """y = strength * x1 * x2 + x3 on U(0, 1) features."""
    return SyntheticSpec(
        features=(
            FeatureGen("x1"),
            FeatureGen("x2"),
            FeatureGen("x3", effect=lambda x: x),
        ),
        pairs=(PairGen("x1", "x2", effect=lambda a, b, s=strength: s * a * b),),
    )


def wall_spec():
    """Stand-in generator shaped like the shear-wall schema.

    Magnitudes are invented but plausible (displacement in mm, strictly
    positive) so the full pipeline, including ratio-based metrics, can
    run end to end without real experimental data.
    """
    return SyntheticSpec(
        intercept=45.0,
        features=(
            FeatureGen("t_w", low=60.0, high=300.0,
                       effect=lambda x: 0.025 * (x - 180.0)),
            FeatureGen("h_w", low=500.0, high=4000.0,
                       effect=lambda x: 0.002 * (x - 2250.0)),
            FeatureGen("shear_span_ratio", low=0.3, high=3.5,
                       effect=lambda x: 6.0 * (x - 1.9)),
            FeatureGen("f_c", low=15.0, high=60.0,
                       effect=lambda x: 0.8 * np.tanh((x - 37.5) / 15.0)),
            FeatureGen("web_long_ratio", low=0.001, high=0.02,
                       effect=lambda x: 40.0 * (x - 0.0105)),
            FeatureGen("web_trans_ratio", low=0.001, high=0.02,
                       effect=lambda x: 30.0 * (x - 0.0105)),
            FeatureGen("be_long_ratio", low=0.003, high=0.06,
                       effect=lambda x: 15.0 * (x - 0.0315)),
            FeatureGen("be_trans_ratio", low=0.001, high=0.03,
                       effect=lambda x: 20.0 * (x - 0.0155)),
            FeatureGen("axial_load_ratio", low=0.0, high=0.45,
                       effect=lambda x: -20.0 * (x - 0.225)),
            FeatureGen("v_max", low=50.0, high=2500.0,
                       effect=lambda x: -3.0 * np.tanh((x - 1200.0) / 800.0)),
            FeatureGen("cross_section", kind=FeatureKind.categorical(3),
                       labels=("rectangular", "barbell", "flanged"),
                       effect=lambda c: np.array([0.0, 1.5, -1.0])[c.astype(np.int64)]),
            FeatureGen("curvature", kind=FeatureKind.categorical(2),
                       labels=("single", "double"),
                       effect=lambda c: np.array([-1.2, 1.2])[c.astype(np.int64)]),
        ),
        pairs=(PairGen("shear_span_ratio", "axial_load_ratio",
                       effect=lambda a, b: -10.0 * (a - 1.9) * (b - 0.225)),),
    )


SYNTHETIC_PRESETS = {
    "linear": linear_spec,
    "shapes": shapes_spec,
    "interaction": interaction_spec,
    "wall": wall_spec,
}
