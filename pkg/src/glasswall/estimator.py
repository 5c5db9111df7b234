"""Scikit-learn style front end for the additive boosting model.

EbmRegressor plugs into pipelines, cross_val_score and grid search: it
validates arrays with the usual helpers, keeps constructor arguments
untouched for get_params/clone, and stores the fitted glass-box model
on ``model_`` for explanation and export APIs.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .dataset import Dataset, FeatureKind, Schema
from .errors import DomainError, SchemaError
from .trainer import TrainConfig, train


def _resolve_kinds(feature_kinds, n_features):
    if feature_kinds is None:
        return [FeatureKind.numeric()] * n_features
    if len(feature_kinds) != n_features:
        raise SchemaError("feature_kinds must list one entry per column")
    kinds = []
    for spec in feature_kinds:
        if spec in (None, "numeric"):
            kinds.append(FeatureKind.numeric())
        elif isinstance(spec, FeatureKind):
            kinds.append(spec)
        elif isinstance(spec, int):
            kinds.append(FeatureKind.categorical(spec))
        else:
            raise SchemaError(f"bad feature kind {spec!r}; use 'numeric' or a cardinality")
    return kinds


class EbmRegressor(BaseEstimator, RegressorMixin):
    """Additive gradient-boosted regressor with per-feature shape functions.

    Parameters mirror TrainConfig; ``random_state`` seeds every random
    sub-stream. Categorical columns are declared through
    ``feature_kinds`` (an int cardinality per categorical column) and
    must contain integer codes.

    Attributes
    ----------
    model_ : EbmModel
        The fitted glass-box model (terms, explanations, file I/O).
    """

    def __init__(self, learning_rate=0.01, max_leaves=3, num_bags=8,
                 max_rounds=5000, early_stop_rounds=50, inner_val_fraction=0.15,
                 num_interactions=2, max_bins=256, random_state=0,
                 feature_names=None, feature_kinds=None, threads=1):
        self.learning_rate = learning_rate
        self.max_leaves = max_leaves
        self.num_bags = num_bags
        self.max_rounds = max_rounds
        self.early_stop_rounds = early_stop_rounds
        self.inner_val_fraction = inner_val_fraction
        self.num_interactions = num_interactions
        self.max_bins = max_bins
        self.random_state = random_state
        self.feature_names = feature_names
        self.feature_kinds = feature_kinds
        self.threads = threads

    def _config(self):
        return TrainConfig(
            learning_rate=self.learning_rate,
            max_leaves=self.max_leaves,
            num_bags=self.num_bags,
            max_rounds=self.max_rounds,
            early_stop_rounds=self.early_stop_rounds,
            inner_val_fraction=self.inner_val_fraction,
            num_interactions=self.num_interactions,
            max_bins=self.max_bins,
            seed=self.random_state,
        )

    def _dataset(self, X, y):
        n_features = X.shape[1]
        kinds = _resolve_kinds(self.feature_kinds, n_features)
        if self.feature_names is not None:
            if len(self.feature_names) != n_features:
                raise SchemaError("feature_names must list one name per column")
            names = [str(n) for n in self.feature_names]
        else:
            names = [f"x{i + 1}" for i in range(n_features)]
        columns = []
        for j, kind in enumerate(kinds):
            col = X[:, j]
            if kind.is_categorical:
                codes = col.astype(np.int64)
                if not np.array_equal(codes, col):
                    raise DomainError(f"column {names[j]!r} must hold integer codes")
                columns.append(codes)
            else:
                columns.append(col)
        schema = Schema(tuple(zip(names, kinds)), "y")
        return Dataset(schema, columns, y)

    def fit(self, X, y):
        """Fit on (n_samples, n_features) X and a numeric target y."""
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        ds = self._dataset(X, np.asarray(y, dtype=np.float64))
        self.model_ = train(ds, self._config(), threads=self.threads)
        self.n_features_in_ = X.shape[1]
        return self

    def _check_predict_input(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise SchemaError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X

    def predict(self, X):
        """Predict each row; identity link, fixed summation order."""
        X = self._check_predict_input(X)
        ds = self._unlabeled_dataset(X)
        return self.model_.predict_dataset(ds)

    def _unlabeled_dataset(self, X):
        schema = self.model_.schema
        columns = []
        for j, (name, kind) in enumerate(schema.features):
            col = X[:, j]
            if kind.is_categorical:
                codes = col.astype(np.int64)
                if not np.array_equal(codes, col):
                    raise DomainError(f"column {name!r} must hold integer codes")
                columns.append(codes)
            else:
                columns.append(col)
        return Dataset(schema, columns, None, self.model_.category_labels)

    def explain_local(self, X):
        """One Explanation per row of X."""
        X = self._check_predict_input(X)
        return [self.model_.explain_row(list(row)) for row in X]

    def explain_global(self, X):
        """(term, mean absolute score) pairs over the rows of X."""
        X = self._check_predict_input(X)
        return self.model_.importance(self._unlabeled_dataset(X))

    @property
    def intercept_(self):
        check_is_fitted(self, "model_")
        return self.model_.intercept

    @property
    def term_names_(self):
        check_is_fitted(self, "model_")
        return self.model_.term_labels()
