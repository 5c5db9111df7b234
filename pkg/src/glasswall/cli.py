"""Command-line surface tying the library together.

Subcommands cover the whole workflow: synthesize data, train, predict,
explain, rank interactions, evaluate over repeated splits, tune on a
config grid, search feature subsets, export shape tables/plots, and
compare predictions against the drift-rule capacity. All tabular output
is CSV, plots are SVG, progress messages go to stderr, and every
command is reproducible from its ``--seed``.
"""

import argparse
import csv
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import model as model_io, wallcap
from .dataset import (SYNTHETIC_PRESETS, Dataset, FeatureKind, Schema,
                      load_csv, make_synthetic, save_csv)
from .errors import GlasswallError, SchemaError
from .evaluation import (compare_glassbox, cv_tune, evaluate_repeated,
                         subset_search)
from .fast import rank_interactions
from .trainer import TrainConfig, train
from .version import VERSION

_CONFIG_FIELDS = {
    "learning_rate": float,
    "max_leaves": int,
    "num_bags": int,
    "max_rounds": int,
    "early_stop_rounds": int,
    "inner_val_fraction": float,
    "num_interactions": int,
    "max_bins": int,
    "seed": int,
}


@dataclass(frozen=True)
class RunConfig:
    """Validated invocation: subcommand plus the paths it will touch."""

    subcommand: str
    inputs: tuple
    outputs: tuple


def _require_files(*paths):
    for p in paths:
        if p is not None and not os.path.isfile(p):
            raise GlasswallError(f"input file not found: {p}")


def _log(msg):
    print(msg, file=sys.stderr)


# ---- flat key=value files ---------------------------------------------------

def _read_kv(path):
    entries = {}
    order = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise SchemaError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            key = key.strip()
            if key in entries:
                raise SchemaError(f"{path}:{lineno}: duplicate key {key!r}")
            entries[key] = value.strip()
            order.append(key)
    return entries, order


def read_schema_file(path):
    """Parse a sidecar schema config (feature.<name> = kind, target = name)."""
    entries, order = _read_kv(path)
    if "target" not in entries:
        raise SchemaError(f"{path}: missing 'target' entry")
    features = []
    for key in order:
        if not key.startswith("feature."):
            continue
        name = key[len("feature."):]
        decl = entries[key]
        if decl == "numeric":
            features.append((name, FeatureKind.numeric()))
        elif decl.startswith("categorical(") and decl.endswith(")"):
            inner = decl[len("categorical("):-1].strip()
            parts = [p.strip() for p in inner.split(",")] if inner else []
            if len(parts) == 1 and parts[0].isdigit():
                features.append((name, FeatureKind.categorical(int(parts[0]))))
            elif len(parts) >= 2:
                features.append((name, FeatureKind.categorical(len(parts))))
            else:
                raise SchemaError(f"{path}: bad declaration {decl!r} for {name!r}")
        else:
            raise SchemaError(f"{path}: bad declaration {decl!r} for {name!r}")
    if not features:
        raise SchemaError(f"{path}: no feature.<name> entries")
    return Schema(tuple(features), entries["target"])


def write_schema_file(schema, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# glasswall dataset schema\n")
        fh.write(f"target = {schema.target_name}\n")
        for name, kind in schema.features:
            decl = "numeric" if not kind.is_categorical else f"categorical({kind.cardinality})"
            fh.write(f"feature.{name} = {decl}\n")


def _parse_config_entries(entries, source):
    out = {}
    for key, raw in entries.items():
        if key not in _CONFIG_FIELDS:
            raise SchemaError(f"{source}: unknown training parameter {key!r}")
        try:
            out[key] = _CONFIG_FIELDS[key](raw)
        except ValueError:
            raise SchemaError(f"{source}: bad value {raw!r} for {key!r}") from None
    return out


def _build_config(args):
    """defaults < config file < explicit flags; seed comes from --seed."""
    values = {}
    config_path = getattr(args, "config", None)
    if config_path:
        _require_files(config_path)
        entries, _ = _read_kv(config_path)
        values.update(_parse_config_entries(entries, config_path))
    for field in _CONFIG_FIELDS:
        flag = getattr(args, field, None)
        if flag is not None:
            values[field] = flag
    if getattr(args, "seed", None) is not None:
        values["seed"] = args.seed
    return TrainConfig(**values)


def _add_train_flags(p):
    p.add_argument("--config", help="flat key=value training config file")
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--max-leaves", dest="max_leaves", type=int)
    p.add_argument("--num-bags", dest="num_bags", type=int)
    p.add_argument("--max-rounds", dest="max_rounds", type=int)
    p.add_argument("--early-stop-rounds", dest="early_stop_rounds", type=int)
    p.add_argument("--inner-val-fraction", dest="inner_val_fraction", type=float)
    p.add_argument("--num-interactions", dest="num_interactions", type=int)
    p.add_argument("--max-bins", dest="max_bins", type=int)
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for bags/splits (results identical)")


def _fmt(x):
    return repr(float(x))


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _load_data(args, schema=None):
    _require_files(args.data, getattr(args, "schema", None))
    if schema is None:
        schema = read_schema_file(args.schema)
    return load_csv(args.data, schema)


# ---- subcommands ------------------------------------------------------------

def _cmd_synth(args):
    if args.preset not in SYNTHETIC_PRESETS:
        raise GlasswallError(f"unknown preset {args.preset!r}; "
                             f"choose from {sorted(SYNTHETIC_PRESETS)}")
    spec = SYNTHETIC_PRESETS[args.preset]()
    ds = make_synthetic(args.rows, spec, args.noise, args.seed)
    save_csv(ds, args.out)
    schema_path = os.path.splitext(args.out)[0] + ".schema"
    write_schema_file(ds.schema, schema_path)
    _log(f"wrote {args.out} ({ds.n_rows} rows) and {schema_path}")
    return 0


def _cmd_train(args):
    ds = _load_data(args)
    config = _build_config(args)
    m = train(ds, config, threads=args.threads, target_unit=args.unit)
    model_io.save(m, args.out)
    _log(f"trained on {ds.n_rows} rows; intercept {m.intercept:.6g}; "
         f"{len(m.shape_terms)} shape terms, {len(m.pair_terms)} pair terms")
    _log(f"wrote {args.out}")
    return 0


def _cmd_predict(args):
    _require_files(args.model, args.data)
    m = model_io.load(args.model)
    ds = load_csv(args.data, m.schema, require_target=False)
    preds = m.predict_dataset(ds)
    _write_csv(args.out, ["prediction"], [[_fmt(p)] for p in preds])
    _log(f"wrote {args.out} ({len(preds)} rows)")
    return 0


def _cmd_explain(args):
    _require_files(args.model, args.data)
    m = model_io.load(args.model)
    ds = load_csv(args.data, m.schema, require_target=False)
    indices = range(ds.n_rows) if args.row is None else [args.row]
    rows = []
    for i in indices:
        if not 0 <= i < ds.n_rows:
            raise GlasswallError(f"--row {i} outside [0, {ds.n_rows})")
        exp = m.explain_row(ds.row(i))
        for label, value in exp.contributions:
            rows.append([i, _fmt(exp.prediction), _fmt(exp.intercept),
                         label, _fmt(value)])
    _write_csv(args.out, ["row", "prediction", "intercept", "term", "contribution"], rows)
    _log(f"wrote {args.out}")
    return 0


def _cmd_importance(args):
    _require_files(args.model, args.data)
    m = model_io.load(args.model)
    ds = load_csv(args.data, m.schema, require_target=False)
    items = m.importance(ds)
    _write_csv(args.out, ["term", "importance"],
               [[label, _fmt(v)] for label, v in items])
    _log(f"wrote {args.out}")
    return 0


def _main_effect_residuals(m, ds):
    binned = m._binned_matrix(ds)
    pred = np.full(ds.n_rows, m.intercept)
    for j, term in enumerate(m.shape_terms):
        pred += term.scores[binned[:, j]]
    return ds.target - pred, binned


def _cmd_interactions(args):
    ds = _load_data(args)
    if ds.target is None:
        raise SchemaError("interaction ranking needs a labeled dataset")
    if args.model:
        _require_files(args.model)
        m = model_io.load(args.model)
    else:
        config = _build_config(args)
        config = TrainConfig(**{**config.to_dict(), "num_interactions": 0})
        _log("no --model given; fitting main effects first")
        m = train(ds, config, threads=args.threads)
    residuals, binned = _main_effect_residuals(m, ds)
    counts = [bm.bin_count for bm in m.bin_maps]
    ranked = rank_interactions(residuals, binned, counts)
    names = m.schema.feature_names
    _write_csv(args.out, ["feature_i", "feature_j", "strength"],
               [[names[s.pair[0]], names[s.pair[1]], _fmt(s.strength)]
                for s in ranked])
    _log(f"wrote {args.out}")
    return 0


def _report_rows(name, report):
    rows = [[name, str(i), _fmt(m.r2), _fmt(m.re_percent), _fmt(m.pa)]
            for i, m in enumerate(report.splits)]
    rows.append([name, "mean", _fmt(report.mean.r2), _fmt(report.mean.re_percent),
                 _fmt(report.mean.pa)])
    rows.append([name, "sd", _fmt(report.sd.r2), _fmt(report.sd.re_percent),
                 _fmt(report.sd.pa)])
    return rows


def _print_report(name, report):
    print(f"{name}: R2 {report.mean.r2:.4f} ± {report.sd.r2:.4f}  "
          f"RE% {report.mean.re_percent:.4f} ± {report.sd.re_percent:.4f}  "
          f"PA {report.mean.pa:.4f} ± {report.sd.pa:.4f}  "
          f"({len(report.splits)} splits)")


def _cmd_evaluate(args):
    ds = _load_data(args)
    config = _build_config(args)
    if args.baselines:
        reports = compare_glassbox(ds, config, args.splits, args.test_fraction,
                                   args.seed, ridge_lambda=args.ridge_lambda,
                                   tree_max_depth=args.tree_depth,
                                   tree_min_leaf=args.tree_min_leaf,
                                   threads=args.threads)
    else:
        reports = {"ebm": evaluate_repeated(ds, config, args.splits,
                                            args.test_fraction, args.seed,
                                            threads=args.threads)}
    rows = []
    for name in reports:
        rows.extend(_report_rows(name, reports[name]))
        _print_report(name, reports[name])
    _write_csv(args.out, ["model", "split", "r2", "re_percent", "pa"], rows)
    _log(f"wrote {args.out}")
    return 0


def _parse_grid_file(path):
    entries, order = _read_kv(path)
    axes = []
    for key in order:
        if key not in _CONFIG_FIELDS:
            raise SchemaError(f"{path}: unknown training parameter {key!r}")
        cast = _CONFIG_FIELDS[key]
        try:
            values = [cast(v.strip()) for v in entries[key].split(",")]
        except ValueError:
            raise SchemaError(f"{path}: bad values for {key!r}") from None
        axes.append((key, values))
    grid = [{}]
    for key, values in axes:
        grid = [{**g, key: v} for g in grid for v in values]
    return [TrainConfig(**g) for g in grid]


def _cmd_tune(args):
    ds = _load_data(args)
    _require_files(args.grid)
    grid = _parse_grid_file(args.grid)
    best, scores = cv_tune(ds, grid, args.k, args.seed, threads=args.threads)
    header = ["index"] + list(_CONFIG_FIELDS) + ["mean_r2"]
    rows = []
    for i, score in enumerate(scores):
        cfg = score.config.to_dict()
        rows.append([i] + [cfg[f] for f in _CONFIG_FIELDS] + [_fmt(score.mean_r2)])
    _write_csv(args.out, header, rows)
    print("best config:")
    for key, value in best.to_dict().items():
        print(f"  {key} = {value}")
    _log(f"wrote {args.out}")
    return 0


def _parse_subsets(args):
    if args.sets_file:
        _require_files(args.sets_file)
        with open(args.sets_file, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
        raw = lines
    elif args.sets:
        raw = [s for s in args.sets.split(";") if s.strip()]
    else:
        raise GlasswallError("provide --sets or --sets-file")
    return [tuple(n.strip() for n in entry.split(",") if n.strip()) for entry in raw]


def _cmd_subsets(args):
    ds = _load_data(args)
    config = _build_config(args)
    subsets = _parse_subsets(args)
    results = subset_search(ds, subsets, config, args.splits, args.seed,
                            test_fraction=args.test_fraction, threads=args.threads)
    rows = []
    for rank, res in enumerate(results):
        rows.append([rank, "|".join(res.features), _fmt(res.report.mean.r2),
                     _fmt(res.report.sd.r2), _fmt(res.report.mean.pa)])
        print(f"#{rank}: {{{', '.join(res.features)}}}  "
              f"R2 {res.report.mean.r2:.4f}  PA {res.report.mean.pa:.4f}")
    _write_csv(args.out, ["rank", "features", "mean_r2", "sd_r2", "mean_pa"], rows)
    _log(f"wrote {args.out}")
    return 0


def _cmd_export_shapes(args):
    _require_files(args.model)
    m = model_io.load(args.model)
    paths = model_io.write_shape_exports(m, args.out_dir)
    _log(f"wrote {len(paths)} files to {args.out_dir}")
    return 0


def _cmd_compare_code(args):
    _require_files(args.model, args.data)
    m = model_io.load(args.model)
    ds = load_csv(args.data, m.schema)
    cmp = wallcap.compare_code(m, ds, threshold=args.threshold,
                               drift_high_axial=args.drift_high,
                               drift_low_axial=args.drift_low)
    rows = [[i, _fmt(cmp.actual[i]), _fmt(cmp.ebm_pred[i]), _fmt(cmp.code_pred[i]),
             _fmt(cmp.ebm_ratio[i]), _fmt(cmp.code_ratio[i])]
            for i in range(cmp.n_used)]
    _write_csv(args.out, ["row", "actual", "ebm_pred", "code_pred",
                          "ebm_ratio", "code_ratio"], rows)
    print(f"model predicted-to-actual: {cmp.ebm_mean:.2f} ± {cmp.ebm_sd:.2f}")
    print(f"code  predicted-to-actual: {cmp.code_mean:.2f} ± {cmp.code_sd:.2f}")
    if cmp.n_excluded:
        _log(f"excluded {cmp.n_excluded} rows with zero actuals")
    _log(f"wrote {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="glasswall",
        description="Glass-box additive boosting for tabular regression.")
    parser.add_argument("--version", action="version", version=f"glasswall {VERSION}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset + schema sidecar")
    p.add_argument("--preset", required=True, choices=sorted(SYNTHETIC_PRESETS))
    p.add_argument("--rows", type=int, default=286)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_synth)

    p = sub.add_parser("train", help="fit a model and save it")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--unit", default="mm", help="free-text target unit tag")
    _add_train_flags(p)
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("predict", help="batch CSV to predictions CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_predict)

    p = sub.add_parser("explain", help="per-row sorted term contributions")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--row", type=int, default=None, help="single row index")
    p.set_defaults(fn=_cmd_explain)

    p = sub.add_parser("importance", help="global term importance table")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_importance)

    p = sub.add_parser("interactions", help="rank feature pairs on residuals")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--model", default=None,
                   help="use this model's main effects instead of refitting")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    _add_train_flags(p)
    p.set_defaults(fn=_cmd_interactions)

    p = sub.add_parser("evaluate", help="repeated random-split evaluation")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--splits", type=int, default=10)
    p.add_argument("--test-fraction", dest="test_fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--baselines", action="store_true",
                   help="also score ridge and tree baselines on the same splits")
    p.add_argument("--ridge-lambda", dest="ridge_lambda", type=float, default=1.0)
    p.add_argument("--tree-depth", dest="tree_depth", type=int, default=8)
    p.add_argument("--tree-min-leaf", dest="tree_min_leaf", type=int, default=5)
    _add_train_flags(p)
    p.set_defaults(fn=_cmd_evaluate)

    p = sub.add_parser("tune", help="k-fold cross-validated grid search")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--grid", required=True,
                   help="key=value file; comma-separated values form the grid")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(fn=_cmd_tune)

    p = sub.add_parser("subsets", help="evaluate candidate feature subsets")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--sets", default=None,
                   help="semicolon-separated subsets of comma-separated features")
    p.add_argument("--sets-file", dest="sets_file", default=None)
    p.add_argument("--splits", type=int, default=10)
    p.add_argument("--test-fraction", dest="test_fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_train_flags(p)
    p.set_defaults(fn=_cmd_subsets)

    p = sub.add_parser("export-shapes", help="CSV table + SVG plot per term")
    p.add_argument("--model", required=True)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.set_defaults(fn=_cmd_export_shapes)

    p = sub.add_parser("compare-code", help="model vs drift-rule capacities")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--drift-high", dest="drift_high", type=float, default=1.0)
    p.add_argument("--drift-low", dest="drift_low", type=float, default=2.0)
    p.set_defaults(fn=_cmd_compare_code)

    return parser


def _run_config(args):
    inputs = tuple(p for k in ("data", "schema", "model", "config", "grid", "sets_file")
                   for p in [getattr(args, k, None)] if p)
    outputs = tuple(p for k in ("out", "out_dir")
                    for p in [getattr(args, k, None)] if p)
    return RunConfig(args.subcommand, inputs, outputs)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        run = _run_config(args)
        _require_files(*run.inputs)
        return args.fn(args)
    except GlasswallError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
