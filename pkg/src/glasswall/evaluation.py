"""Repeated-split evaluation, k-fold hyperparameter search, subset search.

Everything here is deterministic given its base seed: split seeds and
per-split training seeds are derived sub-streams, so reports are
reproducible and individual splits can be re-run in isolation.
"""

from dataclasses import dataclass, replace

import numpy as np

from .baselines import ridge_fit, ridge_predict_dataset, tree_fit, tree_predict_dataset
from .dataset import kfold, split_random
from .errors import GlasswallError, SchemaError, SizeError
from .metrics import prediction_accuracy, r2, relative_error
from .rng import subseed
from .trainer import train


@dataclass(frozen=True)
class MetricSet:
    """One split's scores."""

    r2: float
    re_percent: float
    pa: float


def compute_metrics(y, yhat):
    return MetricSet(r2(y, yhat), relative_error(y, yhat), prediction_accuracy(y, yhat))


@dataclass(frozen=True)
class EvalReport:
    """Per-split metrics plus their mean and standard deviation."""

    splits: tuple            # MetricSet per split
    mean: MetricSet
    sd: MetricSet
    config: dict             # training configuration echo
    base_seed: int
    split_seeds: tuple

    @staticmethod
    def from_splits(splits, config, base_seed, split_seeds):
        splits = tuple(splits)
        if not splits:
            raise SizeError("a report needs at least one split")

        def agg(fn):
            return MetricSet(*(fn([getattr(m, f) for m in splits])
                               for f in ("r2", "re_percent", "pa")))

        mean = agg(lambda v: float(np.mean(v)))
        if len(splits) > 1:
            sd = agg(lambda v: float(np.std(v, ddof=1)))
        else:
            sd = MetricSet(0.0, 0.0, 0.0)
        return EvalReport(splits, mean, sd, dict(config), int(base_seed),
                          tuple(split_seeds))


def _attach_split(e, index):
    e.args = (f"split {index}: {e.args[0] if e.args else e}",) + e.args[1:]
    return e


def evaluate_repeated(ds, config, n_splits, test_fraction, base_seed, threads=1):
    """Train a fresh model per random split and score it on the test rows."""
    if n_splits < 1:
        raise SizeError("n_splits must be >= 1")
    metrics = []
    split_seeds = []
    for s in range(n_splits):
        split_seed = subseed(base_seed, "eval", s, 0)
        train_seed = subseed(base_seed, "eval", s, 1)
        split_seeds.append(split_seed)
        try:
            split = split_random(ds, test_fraction, split_seed)
            model = train(ds.take(split.train), replace(config, seed=train_seed),
                          threads=threads)
            test = ds.take(split.test)
            metrics.append(compute_metrics(test.target, model.predict_dataset(test)))
        except GlasswallError as e:
            raise _attach_split(e, s)
    return EvalReport.from_splits(metrics, config.to_dict(), base_seed, split_seeds)


@dataclass(frozen=True)
class CvScore:
    """Cross-validation outcome of one grid entry."""

    config: object
    mean_r2: float
    fold_r2: tuple


def cv_tune(ds, grid, k, seed, threads=1):
    """Pick the grid config with the highest mean k-fold R^2.

    Ties go to the smaller (max_rounds, max_leaves, num_interactions),
    then to grid order. Every config sees the same folds and the same
    per-fold training seeds, so identical configs score identically.
    """
    if not grid:
        raise SizeError("grid must contain at least one config")
    folds = kfold(ds, k, subseed(seed, "cv", 0))
    fold_seeds = [subseed(seed, "cv", f + 1) for f in range(k)]
    scores = []
    for config in grid:
        fold_r2 = []
        for split, fold_seed in zip(folds, fold_seeds):
            model = train(ds.take(split.train), replace(config, seed=fold_seed),
                          threads=threads)
            test = ds.take(split.test)
            fold_r2.append(r2(test.target, model.predict_dataset(test)))
        scores.append(CvScore(config, float(np.mean(fold_r2)), tuple(fold_r2)))
    order = sorted(
        range(len(grid)),
        key=lambda i: (-scores[i].mean_r2, grid[i].max_rounds, grid[i].max_leaves,
                       grid[i].num_interactions, i),
    )
    return grid[order[0]], scores


@dataclass(frozen=True)
class SubsetResult:
    """One candidate feature subset and its repeated-split report."""

    features: tuple
    report: EvalReport


def subset_search(ds, subsets, config, n_splits, seed, test_fraction=0.1, threads=1):
    """Evaluate feature subsets with evaluate_repeated and rank by mean R^2.

    Reports carry PA alongside, supporting selection rules that want the
    highest R^2 with accuracy close to one. Ranking is stable for ties.
    """
    names = set(ds.schema.feature_names)
    results = []
    for subset in subsets:
        subset = tuple(subset)
        if not subset:
            raise SchemaError("feature subsets must be non-empty")
        unknown = [n for n in subset if n not in names]
        if unknown:
            raise SchemaError(f"unknown features in subset: {unknown}")
        projected = ds.select_features(list(subset))
        report = evaluate_repeated(projected, config, n_splits, test_fraction,
                                   seed, threads=threads)
        results.append(SubsetResult(subset, report))
    results.sort(key=lambda r: -r.report.mean.r2)
    return results


def compare_glassbox(ds, config, n_splits, test_fraction, base_seed,
                     ridge_lambda=1.0, ridge_standardize=True,
                     tree_max_depth=8, tree_min_leaf=5, threads=1):
    """Score the boosted model against the ridge and tree baselines.

    All three models see exactly the same train/test splits. Returns a
    dict of EvalReports keyed by "ebm", "tree" and "ridge".
    """
    if n_splits < 1:
        raise SizeError("n_splits must be >= 1")
    rows = {"ebm": [], "tree": [], "ridge": []}
    split_seeds = []
    for s in range(n_splits):
        split_seed = subseed(base_seed, "eval", s, 0)
        train_seed = subseed(base_seed, "eval", s, 1)
        split_seeds.append(split_seed)
        split = split_random(ds, test_fraction, split_seed)
        train_ds = ds.take(split.train)
        test = ds.take(split.test)
        model = train(train_ds, replace(config, seed=train_seed), threads=threads)
        rows["ebm"].append(compute_metrics(test.target, model.predict_dataset(test)))
        tree = tree_fit(train_ds, max_depth=tree_max_depth, min_leaf_size=tree_min_leaf)
        rows["tree"].append(compute_metrics(test.target, tree_predict_dataset(tree, test)))
        ridge = ridge_fit(train_ds, ridge_lambda, standardize=ridge_standardize)
        rows["ridge"].append(compute_metrics(test.target, ridge_predict_dataset(ridge, test)))
    cfg = config.to_dict()
    return {name: EvalReport.from_splits(ms, cfg, base_seed, split_seeds)
            for name, ms in rows.items()}
