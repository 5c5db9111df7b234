"""Regression metrics used throughout the evaluation protocol.

r2 is the usual coefficient of determination. relative_error is the sum
of absolute errors over the sum of absolute targets, in percent.
prediction_accuracy is the mean predicted-to-actual ratio, so values
above one indicate overestimation.
"""

import numpy as np

from .errors import DomainError, SizeError


def _pair_arrays(y, yhat):
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if y.ndim != 1 or y.shape != yhat.shape:
        raise SizeError("y and yhat must be equal-length vectors")
    return y, yhat


def r2(y, yhat):
    """1 - SS_res / SS_tot; requires at least two samples and non-constant y."""
    y, yhat = _pair_arrays(y, yhat)
    if y.shape[0] < 2:
        raise SizeError("r2 requires at least 2 samples")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        raise DomainError("r2 undefined for constant y")
    ss_res = float(np.sum((y - yhat) ** 2))
    return 1.0 - ss_res / ss_tot


def relative_error(y, yhat):
    """sum|yhat - y| / sum|y| * 100; requires sum|y| > 0."""
    y, yhat = _pair_arrays(y, yhat)
    denom = float(np.sum(np.abs(y)))
    if denom == 0.0:
        raise DomainError("relative error undefined for all-zero y")
    return float(np.sum(np.abs(yhat - y))) / denom * 100.0


def prediction_accuracy(y, yhat):
    """Mean of yhat_i / y_i; requires every y_i nonzero and finite yhat."""
    y, yhat = _pair_arrays(y, yhat)
    if np.any(y == 0.0):
        raise DomainError("prediction accuracy undefined when some y is zero")
    if not np.all(np.isfinite(yhat)):
        raise DomainError("prediction accuracy requires finite predictions")
    return float(np.mean(yhat / y))
