"""Glass-box additive boosting for tabular regression.

The model is a sum of per-feature shape functions (per-bin lookup
tables fitted by cyclic gradient boosting of shallow trees over bagged
replicates) plus a few selected pairwise interaction grids, so every
prediction decomposes exactly into readable term contributions.
"""

from .baselines import (RidgeModel, TreeModel, baseline_predict, load_baseline,
                        ridge_fit, save_baseline, tree_fit)
from .binning import BinMap, apply_bins, fit_bin_maps, fit_bins
from .dataset import (SYNTHETIC_PRESETS, Dataset, FeatureGen, FeatureKind,
                      PairGen, Schema, SplitIndices, SyntheticSpec, kfold,
                      load_csv, make_synthetic, save_csv, split_random)
from .errors import (ChecksumError, DomainError, GlasswallError,
                     ModelFormatError, ModelVersionError, ParseError,
                     SchemaError, SingularSystemError, SizeError,
                     UnknownTermError)
from .estimator import EbmRegressor
from .evaluation import (EvalReport, MetricSet, SubsetResult, compare_glassbox,
                         compute_metrics, cv_tune, evaluate_repeated,
                         subset_search)
from .fast import InteractionScore, rank_interactions
from .metrics import prediction_accuracy, r2, relative_error
from .model import (EbmModel, Explanation, PairTerm, ShapeTerm, export_shape,
                    global_importance, import_shape_table, load, local_explain,
                    predict, predict_dataset, save, write_shape_exports)
from .trainer import TrainConfig, TrainHistory, compute_error_bars, train
from .trees import fit_feature_tree, fit_pair_tree
from .version import VERSION as __version__
from .wallcap import (CodeComparison, WallRecord, code_provision_capacity,
                      compare_code, proposed_feature_set, wall_category_labels,
                      wall_schema)

__all__ = [
    "BinMap", "ChecksumError", "CodeComparison", "Dataset", "DomainError",
    "EbmModel", "EbmRegressor", "EvalReport", "Explanation", "FeatureGen",
    "FeatureKind", "GlasswallError", "InteractionScore", "MetricSet",
    "ModelFormatError", "ModelVersionError", "PairGen", "PairTerm",
    "ParseError", "RidgeModel", "Schema", "SchemaError", "SingularSystemError",
    "SizeError", "SplitIndices", "SubsetResult", "SyntheticSpec",
    "SYNTHETIC_PRESETS", "ShapeTerm", "TrainConfig", "TrainHistory",
    "TreeModel", "UnknownTermError", "WallRecord", "apply_bins",
    "baseline_predict", "code_provision_capacity", "compare_code",
    "compare_glassbox", "compute_error_bars", "compute_metrics", "cv_tune",
    "evaluate_repeated", "export_shape", "fit_bin_maps", "fit_bins",
    "fit_feature_tree", "global_importance", "import_shape_table", "kfold",
    "load", "load_baseline", "load_csv", "local_explain", "make_synthetic",
    "predict", "predict_dataset", "prediction_accuracy", "proposed_feature_set",
    "r2", "rank_interactions", "relative_error", "ridge_fit", "save",
    "save_baseline", "save_csv", "split_random", "subset_search", "train",
    "tree_fit", "wall_category_labels", "wall_schema", "write_shape_exports",
]
