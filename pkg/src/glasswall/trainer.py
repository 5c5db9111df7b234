"""Training loop for the additive model.

Each bag holds out an inner validation slice, bootstraps the remaining
rows, and then runs cyclic boosting: every round fits one shallow tree
per feature (in schema order) on the current residuals and adds a
learning-rate fraction of its increments to that feature's score table.
Boosting stops when the bag's inner-validation RMSE has not improved
for ``early_stop_rounds`` rounds. After main effects, candidate pairs
are ranked on the bag-averaged residuals and the top K pairs are
boosted the same way with one-cut-per-axis quadrant trees.

Final terms are bag means; error bars are across-bag standard
deviations. Every term is centered to zero mean over the training rows
and the intercept is the training-target mean, so the model is unbiased
on its training data by construction.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .binning import bin_columns, fit_bin_maps
from .errors import DomainError, SizeError
from .fast import rank_interactions
from .model import EbmModel, PairTerm, ShapeTerm
from .rng import substream
from .trees import best_quadrant_model, tree_increments
from .version import VERSION


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of one training run. All randomness flows from ``seed``."""

    learning_rate: float = 0.01
    max_leaves: int = 3
    num_bags: int = 8
    max_rounds: int = 5000
    early_stop_rounds: int = 50
    inner_val_fraction: float = 0.15
    num_interactions: int = 2
    max_bins: int = 256
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise DomainError("learning_rate must be > 0")
        if self.max_leaves < 2:
            raise DomainError("max_leaves must be >= 2")
        if self.num_bags < 1:
            raise DomainError("num_bags must be >= 1")
        if self.max_rounds < 1:
            raise DomainError("max_rounds must be >= 1")
        if self.early_stop_rounds < 1:
            raise DomainError("early_stop_rounds must be >= 1")
        if not 0.0 < self.inner_val_fraction < 1.0:
            raise DomainError("inner_val_fraction must lie in (0, 1)")
        if self.num_interactions < 0:
            raise DomainError("num_interactions must be >= 0")
        if self.max_bins < 2:
            raise DomainError("max_bins must be >= 2")

    def to_dict(self):
        return {
            "learning_rate": self.learning_rate,
            "max_leaves": self.max_leaves,
            "num_bags": self.num_bags,
            "max_rounds": self.max_rounds,
            "early_stop_rounds": self.early_stop_rounds,
            "inner_val_fraction": self.inner_val_fraction,
            "num_interactions": self.num_interactions,
            "max_bins": self.max_bins,
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(d):
        return TrainConfig(**d)


@dataclass
class BagHistory:
    """Diagnostics of one bag: per-round training RMSE for both stages."""

    f0: float
    main_rmse: list = field(default_factory=list)
    pair_rmse: list = field(default_factory=list)


@dataclass
class TrainHistory:
    """Per-bag training diagnostics returned by train(..., return_history=True)."""

    bags: list = field(default_factory=list)
    selected_pairs: list = field(default_factory=list)


def _rmse(errors):
    return float(np.sqrt(np.mean(errors * errors)))


class _BagState:
    """Mutable per-bag boosting state (fit multiset, residuals, scores)."""

    def __init__(self, bag_index, y, binned, bin_counts, config):
        n = y.shape[0]
        n_val = max(1, int(math.floor(config.inner_val_fraction * n)))
        if n_val >= n:
            n_val = n - 1
        perm = substream(config.seed, "inner_val", bag_index).permutation(n)
        val_rows = perm[:n_val]
        pool = perm[n_val:]
        draw = substream(config.seed, "bag", bag_index).integers(0, pool.size, size=pool.size)
        fit_rows = pool[draw]

        self.bins_fit = binned[fit_rows]
        self.bins_val = binned[val_rows]
        self.y_val = y[val_rows]
        self.f0 = float(np.mean(y[fit_rows]))
        self.res_fit = y[fit_rows] - self.f0
        self.val_pred = np.full(val_rows.shape[0], self.f0)
        self.shape_scores = [np.zeros(b) for b in bin_counts]
        self.fit_counts = [
            np.bincount(self.bins_fit[:, j], minlength=b).astype(np.float64)
            for j, b in enumerate(bin_counts)
        ]
        self.pair_grids = []
        self.history = BagHistory(f0=self.f0)

    def val_rmse(self):
        return _rmse(self.y_val - self.val_pred)


def _boost_mains(state, config, bin_counts):
    lr = config.learning_rate
    best = state.val_rmse()
    stall = 0
    for _ in range(config.max_rounds):
        for j, b in enumerate(bin_counts):
            col = state.bins_fit[:, j]
            sums = np.bincount(col, weights=state.res_fit, minlength=b)
            inc = tree_increments(state.fit_counts[j], sums, config.max_leaves)
            inc *= lr
            state.shape_scores[j] += inc
            state.res_fit -= inc[col]
            state.val_pred += inc[state.bins_val[:, j]]
        state.history.main_rmse.append(_rmse(state.res_fit))
        current = state.val_rmse()
        if current < best:
            best = current
            stall = 0
        else:
            stall += 1
            if stall >= config.early_stop_rounds:
                break


def _boost_pairs(state, config, pairs, bin_counts):
    lr = config.learning_rate
    shapes = [(bin_counts[i], bin_counts[j]) for i, j in pairs]
    cells_fit = [state.bins_fit[:, i] * bin_counts[j] + state.bins_fit[:, j]
                 for i, j in pairs]
    cells_val = [state.bins_val[:, i] * bin_counts[j] + state.bins_val[:, j]
                 for i, j in pairs]
    counts2 = [
        np.bincount(c, minlength=bi * bj).astype(np.float64).reshape(bi, bj)
        for c, (bi, bj) in zip(cells_fit, shapes)
    ]
    state.pair_grids = [np.zeros(s) for s in shapes]
    best = state.val_rmse()
    stall = 0
    for _ in range(config.max_rounds):
        for p, (bi, bj) in enumerate(shapes):
            sums2 = np.bincount(cells_fit[p], weights=state.res_fit,
                                minlength=bi * bj).reshape(bi, bj)
            _, blocks = best_quadrant_model(counts2[p], sums2)
            grid = np.zeros((bi, bj))
            for (r0, r1), (c0, c1), mean in blocks:
                grid[r0:r1, c0:c1] = mean
            grid *= lr
            state.pair_grids[p] += grid
            flat = grid.ravel()
            state.res_fit -= flat[cells_fit[p]]
            state.val_pred += flat[cells_val[p]]
        state.history.pair_rmse.append(_rmse(state.res_fit))
        current = state.val_rmse()
        if current < best:
            best = current
            stall = 0
        else:
            stall += 1
            if stall >= config.early_stop_rounds:
                break


def _run_per_bag(fn, states, threads):
    # Bags are independent; results are reduced in bag order afterwards,
    # so any worker count yields identical models.
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fn, states))
    else:
        for state in states:
            fn(state)


def compute_error_bars(per_bag_scores):
    """Per-bin sample standard deviation across bags (zero for one bag)."""
    arr = np.asarray(per_bag_scores, dtype=np.float64)
    if arr.ndim < 2 or arr.shape[0] < 1:
        raise SizeError("need an array of per-bag score arrays")
    if arr.shape[0] == 1:
        return np.zeros(arr.shape[1:])
    return np.std(arr, axis=0, ddof=1)


def _train_meta(ds, config, target_unit):
    return {
        "config": config.to_dict(),
        "data_hash": ds.content_hash(),
        "n_rows": ds.n_rows,
        "target_unit": target_unit,
        "package_version": VERSION,
    }


def train(ds, config, threads=1, return_history=False, target_unit="mm"):
    """Fit the additive model on a labeled Dataset.

    Deterministic: the same (dataset, config) pair always produces the
    same model, regardless of ``threads``. With a constant target the
    result is an intercept-only model.
    """
    if ds.target is None:
        raise SizeError("training requires a labeled dataset")
    if ds.n_rows < 10:
        raise SizeError("training requires at least 10 rows")
    y = ds.target
    if not np.all(np.isfinite(y)):
        raise DomainError("target contains non-finite values")

    bin_maps = fit_bin_maps(ds, config.max_bins)
    bin_counts = [bm.bin_count for bm in bin_maps]
    n_features = len(bin_counts)
    history = TrainHistory()
    meta = _train_meta(ds, config, target_unit)

    if np.all(y == y[0]):
        shape_terms = [ShapeTerm(j, np.zeros(b), np.zeros(b))
                       for j, b in enumerate(bin_counts)]
        model = EbmModel(ds.schema, bin_maps, float(y[0]), shape_terms, [],
                         category_labels=ds.category_labels, train_meta=meta)
        return (model, history) if return_history else model

    binned = bin_columns(ds, bin_maps)
    states = [_BagState(b, y, binned, bin_counts, config)
              for b in range(config.num_bags)]
    _run_per_bag(lambda s: _boost_mains(s, config, bin_counts), states, threads)

    pairs = []
    if config.num_interactions > 0 and n_features >= 2:
        mean_f0 = float(np.mean([s.f0 for s in states]))
        ensemble_pred = np.full(ds.n_rows, mean_f0)
        for j in range(n_features):
            mean_scores = np.mean(np.stack([s.shape_scores[j] for s in states]), axis=0)
            ensemble_pred += mean_scores[binned[:, j]]
        ranked = rank_interactions(y - ensemble_pred, binned, bin_counts)
        pairs = [s.pair for s in ranked[:config.num_interactions]]
        _run_per_bag(lambda s: _boost_pairs(s, config, pairs, bin_counts), states, threads)
    history.selected_pairs = list(pairs)
    history.bags = [s.history for s in states]

    # Aggregate: center each bag's term over the full training rows, then
    # average; the intercept is pinned to the training-target mean.
    shape_terms = []
    for j, b in enumerate(bin_counts):
        per_bag = np.stack([s.shape_scores[j] for s in states])
        mu = per_bag[:, binned[:, j]].mean(axis=1)
        centered = per_bag - mu[:, None]
        shape_terms.append(ShapeTerm(j, centered.mean(axis=0),
                                     compute_error_bars(centered)))
    pair_terms = []
    for p, (i, j) in enumerate(pairs):
        per_bag = np.stack([s.pair_grids[p] for s in states])
        flat = per_bag.reshape(config.num_bags, -1)
        cells = binned[:, i] * bin_counts[j] + binned[:, j]
        mu = flat[:, cells].mean(axis=1)
        centered = flat - mu[:, None]
        grid = centered.mean(axis=0).reshape(bin_counts[i], bin_counts[j])
        pair_terms.append(PairTerm(i, j, grid))

    model = EbmModel(ds.schema, bin_maps, float(np.mean(y)), shape_terms,
                     pair_terms, category_labels=ds.category_labels, train_meta=meta)
    return (model, history) if return_history else model
