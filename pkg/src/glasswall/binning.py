"""Per-feature discretization into a bounded number of bins.

Numeric features get quantile cut points; a value v falls in bin i when
cuts[i-1] < v <= cuts[i], with out-of-range values clamped to the edge
bins so unseen data can always be scored. Categorical features map code
to bin identically.
"""

from dataclasses import dataclass

import numpy as np

from .dataset import FeatureKind
from .errors import DomainError, SizeError


@dataclass(frozen=True)
class BinMap:
    """Discretization of one feature: cut points or an identity code map."""

    kind: FeatureKind
    cuts: np.ndarray | None
    bin_count: int

    def __post_init__(self):
        if self.kind.is_categorical:
            if self.cuts is not None:
                raise DomainError("categorical bin maps carry no cuts")
            if self.bin_count != self.kind.cardinality:
                raise DomainError("categorical bin_count must equal cardinality")
        else:
            cuts = np.asarray(self.cuts, dtype=np.float64)
            if cuts.ndim != 1:
                raise DomainError("cuts must be one-dimensional")
            if cuts.size and not np.all(np.diff(cuts) > 0):
                raise DomainError("cuts must be strictly ascending")
            cuts.flags.writeable = False
            object.__setattr__(self, "cuts", cuts)
            if self.bin_count != cuts.size + 1:
                raise DomainError("bin_count must be len(cuts) + 1")


def fit_bins(column, max_bins):
    """Fit quantile cut points for one numeric column.

    Cuts are the interior quantiles at j/max_bins; duplicates are
    collapsed and cuts that would leave a training-empty bin are
    dropped, so every resulting bin contains at least one training
    value. Deterministic, no randomness involved.
    """
    col = np.asarray(column, dtype=np.float64)
    if col.size == 0:
        raise SizeError("cannot fit bins on an empty column")
    if max_bins < 2:
        raise SizeError("max_bins must be >= 2")
    if not np.all(np.isfinite(col)):
        raise DomainError("column contains non-finite values")

    sorted_col = np.sort(col)
    qs = np.arange(1, max_bins) / max_bins
    raw = np.quantile(sorted_col, qs)
    maximum = sorted_col[-1]
    cuts = []
    prev = -np.inf
    for c in np.unique(raw):
        if c >= maximum:
            break
        # keep the cut only if some training value lands in (prev, c]
        lo = np.searchsorted(sorted_col, prev, side="right")
        hi = np.searchsorted(sorted_col, c, side="right")
        if hi > lo:
            cuts.append(float(c))
            prev = c
    cuts = np.asarray(cuts, dtype=np.float64)
    return BinMap(FeatureKind.numeric(), cuts, cuts.size + 1)


def categorical_bins(kind):
    """Identity BinMap for a categorical feature."""
    return BinMap(kind, None, kind.cardinality)


def apply_bins(bin_map, value):
    """Map one raw value (or an array of them) to bin indices.

    Numeric values below the first cut go to bin 0 and values above the
    last cut go to the last bin. Categorical codes must be valid.
    """
    if bin_map.kind.is_categorical:
        codes = np.asarray(value, dtype=np.int64)
        if codes.size and (codes.min() < 0 or codes.max() >= bin_map.bin_count):
            raise DomainError(f"categorical code outside [0, {bin_map.bin_count})")
        return codes if codes.ndim else int(codes)
    vals = np.asarray(value, dtype=np.float64)
    idx = np.searchsorted(bin_map.cuts, vals, side="left")
    return idx if idx.ndim else int(idx)


def fit_bin_maps(ds, max_bins):
    """Fit a BinMap per feature of a Dataset (categoricals are identity)."""
    maps = []
    for (name, kind), col in zip(ds.schema.features, ds.columns):
        if kind.is_categorical:
            maps.append(categorical_bins(kind))
        else:
            maps.append(fit_bins(col, max_bins))
    return maps


def bin_columns(ds, bin_maps):
    """Bin every feature column; returns an int64 array of shape (n, d)."""
    out = np.empty((ds.n_rows, len(bin_maps)), dtype=np.int64)
    for j, (col, bm) in enumerate(zip(ds.columns, bin_maps)):
        out[:, j] = apply_bins(bm, col)
    return out
