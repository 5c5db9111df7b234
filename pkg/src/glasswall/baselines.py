"""Glass-box comparator models: ridge linear regression and a CART tree.

Both fit on a Dataset, one-hot encoding categoricals for ridge and
treating their codes as ordinals for the tree. They exist to put the
additive model's scores side by side with simpler transparent models.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (DomainError, ModelFormatError, SchemaError,
                     SingularSystemError, SizeError)
from .fileio import read_envelope, write_envelope

BASELINE_FORMAT = "glasswall-baseline"
BASELINE_VERSION = 1


def _design_matrix(ds):
    """Numeric columns as-is, categoricals one-hot; returns (X, names)."""
    cols = []
    names = []
    for (name, kind), col in zip(ds.schema.features, ds.columns):
        if kind.is_categorical:
            labels = ds.category_labels.get(name) or [str(c) for c in range(kind.cardinality)]
            for code in range(kind.cardinality):
                cols.append((col == code).astype(np.float64))
                names.append(f"{name}={labels[code]}")
        else:
            cols.append(np.asarray(col, dtype=np.float64))
            names.append(name)
    return np.column_stack(cols), names


def _encode_row(schema, category_labels, row):
    row = list(row)
    if len(row) != len(schema.features):
        raise SchemaError(f"row has {len(row)} values, schema has {len(schema.features)} features")
    out = []
    for (name, kind), value in zip(schema.features, row):
        if kind.is_categorical:
            if isinstance(value, str):
                labels = category_labels.get(name)
                if labels is None or value not in labels:
                    raise DomainError(f"unknown category {value!r} for feature {name!r}")
                value = labels.index(value)
            code = int(value)
            if not 0 <= code < kind.cardinality:
                raise DomainError(f"code {code} outside [0, {kind.cardinality}) for {name!r}")
            onehot = [0.0] * kind.cardinality
            onehot[code] = 1.0
            out.extend(onehot)
        else:
            value = float(value)
            if math.isnan(value):
                raise DomainError(f"missing (NaN) value for feature {name!r}")
            out.append(value)
    return np.asarray(out, dtype=np.float64)


@dataclass(frozen=True)
class RidgeModel:
    """Closed-form ridge fit; weights live in raw (unscaled) input space."""

    schema: object
    category_labels: dict
    encoded_names: tuple
    weights: np.ndarray
    intercept: float
    lam: float
    standardized: bool

    def predict_row(self, row):
        x = _encode_row(self.schema, self.category_labels, row)
        return float(x @ self.weights + self.intercept)

    def predict_dataset(self, ds):
        X, _ = _design_matrix(ds)
        return X @ self.weights + self.intercept


def ridge_fit(ds, lam, standardize=False):
    """Minimize ||y - Xw - b||^2 + lam * ||w||^2 with unpenalized intercept.

    Solved in closed form on centered data. With ``standardize`` the
    penalty applies to unit-variance columns; returned weights are
    always back-transformed to raw space.
    """
    if ds.target is None:
        raise SizeError("ridge_fit requires a labeled dataset")
    if lam < 0:
        raise DomainError("lambda must be >= 0")
    X, names = _design_matrix(ds)
    y = ds.target
    xm = X.mean(axis=0)
    ym = float(y.mean())
    Xc = X - xm
    scale = np.ones(X.shape[1])
    if standardize:
        sd = Xc.std(axis=0)
        scale = np.where(sd > 0, sd, 1.0)
        Xc = Xc / scale
    gram = Xc.T @ Xc + lam * np.eye(X.shape[1])
    rhs = Xc.T @ (y - ym)
    if lam == 0.0 and np.linalg.matrix_rank(gram) < gram.shape[0]:
        raise SingularSystemError(
            "normal equations are singular at lambda=0; use lambda > 0")
    try:
        w_scaled = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError as e:
        raise SingularSystemError(
            "normal equations are singular; use lambda > 0") from e
    weights = w_scaled / scale
    if not np.all(np.isfinite(weights)):
        raise SingularSystemError("ridge solution is not finite; increase lambda")
    intercept = ym - float(xm @ weights)
    return RidgeModel(ds.schema, dict(ds.category_labels), tuple(names),
                      weights, intercept, float(lam), bool(standardize))


@dataclass(frozen=True)
class TreeNode:
    feature: int
    threshold: float
    left: object
    right: object


@dataclass(frozen=True)
class TreeLeaf:
    value: float


@dataclass(frozen=True)
class TreeModel:
    """Greedy SSE-reduction regression tree on raw feature values."""

    schema: object
    category_labels: dict
    root: object
    max_depth: object
    min_leaf_size: int

    def predict_row(self, row):
        x = _raw_row(self.schema, self.category_labels, row)
        node = self.root
        while isinstance(node, TreeNode):
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node.value

    def predict_dataset(self, ds):
        X = np.column_stack([np.asarray(c, dtype=np.float64) for c in ds.columns])
        return np.array([self._predict_vector(X[i]) for i in range(X.shape[0])])

    def _predict_vector(self, x):
        node = self.root
        while isinstance(node, TreeNode):
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node.value


def _raw_row(schema, category_labels, row):
    row = list(row)
    if len(row) != len(schema.features):
        raise SchemaError(f"row has {len(row)} values, schema has {len(schema.features)} features")
    out = []
    for (name, kind), value in zip(schema.features, row):
        if kind.is_categorical and isinstance(value, str):
            labels = category_labels.get(name)
            if labels is None or value not in labels:
                raise DomainError(f"unknown category {value!r} for feature {name!r}")
            value = labels.index(value)
        out.append(float(value))
    return out


def _best_split(X, y, min_leaf):
    best_gain = 0.0
    best = None
    n = y.shape[0]
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        ys = y[order]
        cs = np.cumsum(ys)
        s_tot = cs[-1]
        nl = np.arange(1, n, dtype=np.float64)
        sl = cs[:-1]
        nr = n - nl
        sr = s_tot - sl
        valid = (xs[:-1] < xs[1:]) & (nl >= min_leaf) & (nr >= min_leaf)
        if not valid.any():
            continue
        gain = np.where(valid, sl * sl / nl + sr * sr / nr - s_tot * s_tot / n, -np.inf)
        t = int(np.argmax(gain))
        if gain[t] > best_gain:
            best_gain = float(gain[t])
            best = (j, float((xs[t] + xs[t + 1]) / 2.0))
    return best


def _grow(X, y, depth, max_depth, min_leaf):
    if (max_depth is not None and depth >= max_depth) or y.shape[0] < 2 * min_leaf:
        return TreeLeaf(float(y.mean()))
    split = _best_split(X, y, min_leaf)
    if split is None:
        return TreeLeaf(float(y.mean()))
    j, thr = split
    mask = X[:, j] <= thr
    left = _grow(X[mask], y[mask], depth + 1, max_depth, min_leaf)
    right = _grow(X[~mask], y[~mask], depth + 1, max_depth, min_leaf)
    return TreeNode(j, thr, left, right)


def tree_fit(ds, max_depth, min_leaf_size=1):
    """Grow a CART-style regression tree (leaf value = mean of its rows)."""
    if ds.target is None:
        raise SizeError("tree_fit requires a labeled dataset")
    if max_depth is not None and max_depth < 1:
        raise DomainError("max_depth must be >= 1 (or None for unlimited)")
    if min_leaf_size < 1:
        raise DomainError("min_leaf_size must be >= 1")
    if ds.n_rows == 0:
        raise SizeError("cannot fit a tree on an empty dataset")
    X = np.column_stack([np.asarray(c, dtype=np.float64) for c in ds.columns])
    root = _grow(X, ds.target, 0, max_depth, min_leaf_size)
    return TreeModel(ds.schema, dict(ds.category_labels), root, max_depth, min_leaf_size)


def baseline_predict(model, row):
    """Predict one raw-valued row with either baseline model."""
    return model.predict_row(row)


def ridge_predict_dataset(model, ds):
    return model.predict_dataset(ds)


def tree_predict_dataset(model, ds):
    return model.predict_dataset(ds)


# ---- serialization ---------------------------------------------------------

def _schema_payload(schema):
    return {
        "features": [[n, k.kind, k.cardinality] for n, k in schema.features],
        "target_name": schema.target_name,
    }


def _schema_from(obj):
    from .dataset import FeatureKind, Schema
    feats = tuple((n, FeatureKind(k, c)) for n, k, c in obj["features"])
    return Schema(feats, obj["target_name"])


def _node_payload(node):
    if isinstance(node, TreeLeaf):
        return {"value": node.value}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _node_payload(node.left),
        "right": _node_payload(node.right),
    }


def _node_from(obj):
    if "value" in obj:
        return TreeLeaf(obj["value"])
    return TreeNode(obj["feature"], obj["threshold"],
                    _node_from(obj["left"]), _node_from(obj["right"]))


def save_baseline(model, path):
    if isinstance(model, RidgeModel):
        payload = {
            "type": "ridge",
            "schema": _schema_payload(model.schema),
            "category_labels": model.category_labels,
            "encoded_names": list(model.encoded_names),
            "weights": model.weights.tolist(),
            "intercept": model.intercept,
            "lam": model.lam,
            "standardized": model.standardized,
        }
    elif isinstance(model, TreeModel):
        payload = {
            "type": "tree",
            "schema": _schema_payload(model.schema),
            "category_labels": model.category_labels,
            "root": _node_payload(model.root),
            "max_depth": model.max_depth,
            "min_leaf_size": model.min_leaf_size,
        }
    else:
        raise DomainError(f"not a baseline model: {type(model).__name__}")
    write_envelope(path, BASELINE_FORMAT, BASELINE_VERSION, payload)


def load_baseline(path):
    payload = read_envelope(path, BASELINE_FORMAT, BASELINE_VERSION)
    schema = _schema_from(payload["schema"])
    labels = payload.get("category_labels") or {}
    if payload["type"] == "ridge":
        return RidgeModel(schema, labels, tuple(payload["encoded_names"]),
                          np.asarray(payload["weights"], dtype=np.float64),
                          payload["intercept"], payload["lam"], payload["standardized"])
    if payload["type"] == "tree":
        return TreeModel(schema, labels, _node_from(payload["root"]),
                         payload["max_depth"], payload["min_leaf_size"])
    raise ModelFormatError(f"unknown baseline type {payload['type']!r}")
