"""Greedy ranking of feature pairs by interaction strength.

A pair's strength is the sum-of-squared-error reduction the best
one-cut-per-axis quadrant model achieves on the current residuals,
relative to the residuals themselves. Quadrant statistics come from
cumulative 2-D histograms, so each pair costs O(cells) rather than
O(cells * cuts).
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import SizeError
from .trees import best_quadrant_model, histogram_2d


@dataclass(frozen=True)
class InteractionScore:
    """Candidate pair (i, j), i < j, and its non-negative strength."""

    pair: tuple
    strength: float


def rank_interactions(residuals, binned, bin_counts, pairs=None):
    """Score and sort candidate feature pairs on the given residuals.

    ``binned`` is the (n_rows, n_features) bin-index matrix, ``bin_counts``
    the per-feature bin counts. ``pairs`` defaults to every (i, j) with
    i < j. Returns InteractionScores sorted by strength descending, ties
    broken by (i, j) ascending.

    The strength equals sum(residuals^2) minus the best quadrant model's
    SSE; the residual sum of squares cancels, leaving the quadrant
    model's explained energy sum(s^2/n).
    """
    residuals = np.asarray(residuals, dtype=np.float64)
    binned = np.asarray(binned, dtype=np.int64)
    if binned.ndim != 2 or residuals.shape[0] != binned.shape[0]:
        raise SizeError("residuals and binned columns must have matching rows")
    n_features = binned.shape[1]
    if len(bin_counts) != n_features:
        raise SizeError("bin_counts must list one count per feature")
    if pairs is None:
        pairs = list(combinations(range(n_features), 2))

    scores = []
    for i, j in pairs:
        i, j = int(i), int(j)
        if not 0 <= i < j < n_features:
            raise SizeError(f"invalid feature pair ({i}, {j})")
        bi, bj = int(bin_counts[i]), int(bin_counts[j])
        cells = binned[:, i] * bj + binned[:, j]
        counts, sums = histogram_2d(residuals, cells, bi * bj)
        energy, _ = best_quadrant_model(counts.reshape(bi, bj), sums.reshape(bi, bj))
        scores.append(InteractionScore((i, j), float(energy)))
    scores.sort(key=lambda s: (-s.strength, s.pair))
    return scores
