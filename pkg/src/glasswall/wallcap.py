"""Reinforced-concrete shear-wall domain layer.

Fixes the twelve-feature input schema for deformation-capacity
prediction (ultimate top displacement), names the proposed compact
feature set, and implements the drift-rule comparator used to put model
predictions next to code-provision capacities.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .dataset import FeatureKind, Schema
from .errors import DomainError, SchemaError, SizeError

TARGET_NAME = "delta_u"

CROSS_SECTION_LABELS = ("rectangular", "barbell", "flanged")
CURVATURE_LABELS = ("single", "double")

_WALL_FEATURES = (
    ("t_w", FeatureKind.numeric()),
    ("h_w", FeatureKind.numeric()),
    ("shear_span_ratio", FeatureKind.numeric()),
    ("f_c", FeatureKind.numeric()),
    ("web_long_ratio", FeatureKind.numeric()),
    ("web_trans_ratio", FeatureKind.numeric()),
    ("be_long_ratio", FeatureKind.numeric()),
    ("be_trans_ratio", FeatureKind.numeric()),
    ("axial_load_ratio", FeatureKind.numeric()),
    ("v_max", FeatureKind.numeric()),
    ("cross_section", FeatureKind.categorical(3)),
    ("curvature", FeatureKind.categorical(2)),
)


def wall_schema():
    """The fixed 12-feature wall schema (ten numeric, two categorical)."""
    return Schema(_WALL_FEATURES, TARGET_NAME)


def wall_category_labels():
    """Canonical label vocabularies for the two categorical features."""
    return {
        "cross_section": list(CROSS_SECTION_LABELS),
        "curvature": list(CURVATURE_LABELS),
    }


def proposed_feature_set():
    """The compact four-feature configuration."""
    return ["shear_span_ratio", "axial_load_ratio", "t_w", "v_max"]


@dataclass(frozen=True)
class WallRecord:
    """One specimen. Geometry in mm, strengths in MPa, shear in kN;
    ratios are dimensionless. ``delta_u`` is the measured ultimate top
    displacement, in the same length unit as ``h_w``."""

    t_w: float
    h_w: float
    shear_span_ratio: float
    f_c: float
    web_long_ratio: float
    web_trans_ratio: float
    be_long_ratio: float
    be_trans_ratio: float
    axial_load_ratio: float
    v_max: float
    cross_section: str
    curvature: str
    delta_u: float | None = None

    def __post_init__(self):
        for field_name in ("t_w", "h_w", "f_c", "v_max", "shear_span_ratio"):
            if getattr(self, field_name) <= 0:
                raise DomainError(f"{field_name} must be > 0")
        for field_name in ("web_long_ratio", "web_trans_ratio",
                           "be_long_ratio", "be_trans_ratio"):
            if getattr(self, field_name) < 0:
                raise DomainError(f"{field_name} must be >= 0")
        if not 0.0 <= self.axial_load_ratio <= 1.0:
            raise DomainError("axial_load_ratio must lie in [0, 1]")
        if self.cross_section not in CROSS_SECTION_LABELS:
            raise DomainError(f"cross_section must be one of {CROSS_SECTION_LABELS}")
        if self.curvature not in CURVATURE_LABELS:
            raise DomainError(f"curvature must be one of {CURVATURE_LABELS}")

    def feature_values(self):
        """Raw feature values in wall_schema order (labels for categoricals)."""
        return [getattr(self, name) for name, _ in _WALL_FEATURES]


def code_provision_capacity(record, threshold=0.5,
                            drift_high_axial=1.0, drift_low_axial=2.0):
    """Drift-rule deformation capacity for a shear-controlled wall.

    The drift percentage is ``drift_high_axial`` when the axial load
    ratio is strictly greater than ``threshold`` and ``drift_low_axial``
    otherwise; the capacity is that percentage of the wall height.
    """
    h_w = record.h_w
    if h_w <= 0:
        raise DomainError("h_w must be > 0")
    drift = drift_high_axial if record.axial_load_ratio > threshold else drift_low_axial
    return (drift / 100.0) * h_w


def _code_capacity_columns(h_w, axial_load_ratio, threshold,
                           drift_high_axial, drift_low_axial):
    if np.any(h_w <= 0):
        raise DomainError("h_w must be > 0 for every row")
    drift = np.where(axial_load_ratio > threshold, drift_high_axial, drift_low_axial)
    return (drift / 100.0) * h_w


@dataclass(frozen=True)
class CodeComparison:
    """Per-specimen model and drift-rule predictions with their ratios."""

    ebm_pred: np.ndarray
    code_pred: np.ndarray
    actual: np.ndarray
    ebm_ratio: np.ndarray
    code_ratio: np.ndarray
    ebm_mean: float
    ebm_sd: float
    code_mean: float
    code_sd: float
    n_used: int
    n_excluded: int


def _mean_sd(values):
    mean = float(np.mean(values))
    sd = float(np.std(values, ddof=1)) if values.shape[0] > 1 else 0.0
    return mean, sd


def compare_code(model, ds, threshold=0.5,
                 drift_high_axial=1.0, drift_low_axial=2.0):
    """Compare model predictions and drift-rule capacities against actuals.

    Rows with a zero actual cannot form ratios; they are dropped with a
    warning and counted in ``n_excluded``.
    """
    if ds.target is None:
        raise SchemaError("compare_code requires a dataset with targets")
    for needed in ("h_w", "axial_load_ratio"):
        if needed not in ds.schema.feature_names:
            raise SchemaError(f"dataset lacks required feature {needed!r}")
    if ds.n_rows == 0:
        raise SizeError("compare_code requires at least one row")

    ebm_pred = model.predict_dataset(ds)
    code_pred = _code_capacity_columns(
        np.asarray(ds.column("h_w"), dtype=np.float64),
        np.asarray(ds.column("axial_load_ratio"), dtype=np.float64),
        threshold, drift_high_axial, drift_low_axial)
    actual = ds.target

    keep = actual != 0.0
    n_excluded = int(np.sum(~keep))
    if n_excluded:
        warnings.warn(f"compare_code: excluded {n_excluded} rows with zero actuals",
                      stacklevel=2)
    if not np.any(keep):
        raise SizeError("all rows have zero actuals; no ratios to compare")

    ebm_pred, code_pred, actual = ebm_pred[keep], code_pred[keep], actual[keep]
    ebm_ratio = ebm_pred / actual
    code_ratio = code_pred / actual
    ebm_mean, ebm_sd = _mean_sd(ebm_ratio)
    code_mean, code_sd = _mean_sd(code_ratio)
    return CodeComparison(ebm_pred, code_pred, actual, ebm_ratio, code_ratio,
                          ebm_mean, ebm_sd, code_mean, code_sd,
                          int(actual.shape[0]), n_excluded)
