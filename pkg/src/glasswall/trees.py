"""Shallow regression trees over discretized axes.

These are the weak learners of the boosting loop. The 1-D tree splits a
single binned feature greedily by SSE reduction until it has at most
``max_leaves`` leaves; the 2-D "quadrant" tree places one cut per axis
of a feature pair. Both return dense per-bin increment tables, with
bins that hold no training data inheriting the value of the leaf that
covers them.
"""

import numpy as np

from .errors import SizeError


def histogram(residuals, bin_index, bin_count):
    """Per-bin (count, sum) of residuals."""
    counts = np.bincount(bin_index, minlength=bin_count).astype(np.float64)
    sums = np.bincount(bin_index, weights=residuals, minlength=bin_count)
    return counts, sums


def tree_increments(counts, sums, max_leaves):
    """Greedy best-first SSE-reduction tree over one binned axis.

    Splits only where both sides hold data; stops early when no split
    strictly reduces SSE. Returns the per-bin leaf means.
    """
    bin_count = counts.shape[0]
    leaves = [(0, bin_count)]
    while len(leaves) < max_leaves:
        best_gain = 0.0
        best = None
        for li, (lo, hi) in enumerate(leaves):
            if hi - lo < 2:
                continue
            cc = np.cumsum(counts[lo:hi])
            sc = np.cumsum(sums[lo:hi])
            n_tot, s_tot = cc[-1], sc[-1]
            if n_tot == 0:
                continue
            nl, sl = cc[:-1], sc[:-1]
            nr, sr = n_tot - nl, s_tot - sl
            valid = (nl > 0) & (nr > 0)
            if not valid.any():
                continue
            gain = np.where(
                valid,
                sl * sl / np.maximum(nl, 1.0) + sr * sr / np.maximum(nr, 1.0)
                - s_tot * s_tot / n_tot,
                -np.inf,
            )
            t = int(np.argmax(gain))
            if gain[t] > best_gain:
                best_gain = float(gain[t])
                best = (li, lo + t + 1)
        if best is None:
            break
        li, cut = best
        lo, hi = leaves[li]
        leaves[li:li + 1] = [(lo, cut), (cut, hi)]

    increments = np.zeros(bin_count, dtype=np.float64)
    for lo, hi in leaves:
        n = counts[lo:hi].sum()
        if n > 0:
            increments[lo:hi] = sums[lo:hi].sum() / n
    return increments


def fit_feature_tree(residuals, bin_index, bin_count, max_leaves):
    """Fit one shallow tree on a single discretized feature.

    Returns the per-bin increment array (leaf mean per bin). A column
    whose data sits in one bin yields a constant, single-leaf increment.
    """
    residuals = np.asarray(residuals, dtype=np.float64)
    bin_index = np.asarray(bin_index, dtype=np.int64)
    if residuals.shape != bin_index.shape:
        raise SizeError("residuals and bin_index must have equal length")
    if max_leaves < 2:
        raise SizeError("max_leaves must be >= 2")
    if bin_index.size and bin_index.max() >= bin_count:
        raise SizeError("bin index exceeds bin_count")
    counts, sums = histogram(residuals, bin_index, bin_count)
    return tree_increments(counts, sums, max_leaves)


def histogram_2d(residuals, cell_index, n_cells):
    """Flattened-cell (count, sum) histograms for a feature pair."""
    counts = np.bincount(cell_index, minlength=n_cells).astype(np.float64)
    sums = np.bincount(cell_index, weights=residuals, minlength=n_cells)
    return counts, sums


def _quadrant_energy(cum_n, cum_s):
    """Explained sum of squares of every one-cut-per-axis quadrant model.

    cum_n/cum_s are 2-D inclusive prefix sums. Entry (a, b) of the
    result is sum over quadrants of s^2/n for the cut placed after row
    bin a and column bin b. Empty quadrants contribute zero.
    """
    total_n = cum_n[-1, -1]
    total_s = cum_s[-1, -1]
    n11 = cum_n[:-1, :-1]
    s11 = cum_s[:-1, :-1]
    n12 = cum_n[:-1, -1:] - n11
    s12 = cum_s[:-1, -1:] - s11
    n21 = cum_n[-1:, :-1] - n11
    s21 = cum_s[-1:, :-1] - s11
    n22 = total_n - n11 - n12 - n21
    s22 = total_s - s11 - s12 - s21
    energy = (
        s11 * s11 / np.maximum(n11, 1.0)
        + s12 * s12 / np.maximum(n12, 1.0)
        + s21 * s21 / np.maximum(n21, 1.0)
        + s22 * s22 / np.maximum(n22, 1.0)
    )
    return energy


def best_quadrant_model(counts, sums):
    """Best single-cut-per-axis partition of a 2-D histogram.

    ``counts``/``sums`` have shape (rows, cols). Returns (energy, blocks)
    where energy is the explained sum of squares (s^2/n summed over
    parts) and blocks is a list of ((row_lo, row_hi), (col_lo, col_hi),
    mean) covering the grid. An axis with a single bin contributes a
    single slab; with both axes degenerate the model is the global mean.
    """
    rows, cols = counts.shape
    total_n = counts.sum()
    total_s = sums.sum()

    def mean_of(block_n, block_s):
        return block_s / block_n if block_n > 0 else 0.0

    if rows < 2 and cols < 2:
        energy = total_s * total_s / total_n if total_n > 0 else 0.0
        return energy, [((0, rows), (0, cols), mean_of(total_n, total_s))]

    if rows < 2 or cols < 2:
        # one real axis: best single cut along it
        axis = 1 if rows < 2 else 0
        n_line = counts.sum(axis=1 - axis)
        s_line = sums.sum(axis=1 - axis)
        cn = np.cumsum(n_line)
        cs = np.cumsum(s_line)
        nl, sl = cn[:-1], cs[:-1]
        nr, sr = total_n - nl, total_s - sl
        energy = sl * sl / np.maximum(nl, 1.0) + sr * sr / np.maximum(nr, 1.0)
        t = int(np.argmax(energy))
        cut = t + 1
        if axis == 0:
            blocks = [((0, cut), (0, cols), mean_of(nl[t], sl[t])),
                      ((cut, rows), (0, cols), mean_of(nr[t], sr[t]))]
        else:
            blocks = [((0, rows), (0, cut), mean_of(nl[t], sl[t])),
                      ((0, rows), (cut, cols), mean_of(nr[t], sr[t]))]
        return float(energy[t]), blocks

    cum_n = np.cumsum(np.cumsum(counts, axis=0), axis=1)
    cum_s = np.cumsum(np.cumsum(sums, axis=0), axis=1)
    energy = _quadrant_energy(cum_n, cum_s)
    flat = int(np.argmax(energy))
    a, b = divmod(flat, energy.shape[1])
    ra, cb = a + 1, b + 1
    n11, s11 = cum_n[a, b], cum_s[a, b]
    n12, s12 = cum_n[a, -1] - n11, cum_s[a, -1] - s11
    n21, s21 = cum_n[-1, b] - n11, cum_s[-1, b] - s11
    n22, s22 = total_n - n11 - n12 - n21, total_s - s11 - s12 - s21
    blocks = [
        ((0, ra), (0, cb), mean_of(n11, s11)),
        ((0, ra), (cb, cols), mean_of(n12, s12)),
        ((ra, rows), (0, cb), mean_of(n21, s21)),
        ((ra, rows), (cb, cols), mean_of(n22, s22)),
    ]
    return float(energy[a, b]), blocks


def fit_pair_tree(residuals, cell_index, shape):
    """Fit one quadrant tree on a flattened feature-pair grid.

    Returns the dense increment grid of the given ``shape``; cells in an
    empty quadrant receive zero.
    """
    rows, cols = shape
    counts, sums = histogram_2d(residuals, cell_index, rows * cols)
    counts = counts.reshape(rows, cols)
    sums = sums.reshape(rows, cols)
    _, blocks = best_quadrant_model(counts, sums)
    grid = np.zeros((rows, cols), dtype=np.float64)
    for (r0, r1), (c0, c1), mean in blocks:
        grid[r0:r1, c0:c1] = mean
    return grid
