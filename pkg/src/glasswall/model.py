"""The trained additive model: lookup inference, explanations, export.

Prediction is the intercept plus one lookup per term, summed with
math.fsum (exactly rounded), so a prediction and the sum of its local
explanation's contributions are bit-identical no matter how the
contributions are reordered.
"""

import math
import re
from dataclasses import dataclass

import numpy as np

from .binning import BinMap, apply_bins
from .dataset import FeatureKind, Schema
from .errors import (DomainError, ModelFormatError, SchemaError, SizeError,
                     UnknownTermError)
from .fileio import read_envelope, write_envelope

MODEL_FORMAT = "glasswall-model"
MODEL_VERSION = 1

PAIR_LABEL_SEP = " × "


@dataclass(frozen=True)
class ShapeTerm:
    """Per-bin scores and error bars of one feature's shape function."""

    feature_index: int
    scores: np.ndarray
    stderr: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        stderr = np.asarray(self.stderr, dtype=np.float64)
        if scores.ndim != 1 or scores.shape != stderr.shape:
            raise SizeError("scores and stderr must be equal-length vectors")
        if stderr.size and stderr.min() < 0:
            raise DomainError("stderr must be non-negative")
        scores.flags.writeable = False
        stderr.flags.writeable = False
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "stderr", stderr)


@dataclass(frozen=True)
class PairTerm:
    """2-D score grid for a feature pair (i, j) with i < j."""

    i: int
    j: int
    grid: np.ndarray

    def __post_init__(self):
        if not self.i < self.j:
            raise DomainError("pair terms require i < j")
        grid = np.asarray(self.grid, dtype=np.float64)
        if grid.ndim != 2:
            raise SizeError("pair grid must be 2-D")
        grid.flags.writeable = False
        object.__setattr__(self, "grid", grid)


@dataclass(frozen=True)
class Explanation:
    """One sample's decomposition: intercept + contributions = prediction."""

    prediction: float
    intercept: float
    contributions: tuple  # ((label, value), ...) sorted by |value| desc


class EbmModel:
    """Immutable trained model: intercept, shape terms, pair terms."""

    def __init__(self, schema, bin_maps, intercept, shape_terms, pair_terms,
                 category_labels=None, train_meta=None):
        n = len(schema.features)
        if len(bin_maps) != n:
            raise SizeError("one bin map per feature required")
        if len(shape_terms) != n:
            raise SizeError("one shape term per feature required")
        for j, (term, bm) in enumerate(zip(shape_terms, bin_maps)):
            if term.feature_index != j:
                raise SchemaError("shape terms must follow schema feature order")
            if term.scores.shape[0] != bm.bin_count:
                raise SizeError(f"term {j} score length != bin count")
        for pt in pair_terms:
            if not (0 <= pt.i < pt.j < n):
                raise SchemaError("pair term references unknown features")
            if pt.grid.shape != (bin_maps[pt.i].bin_count, bin_maps[pt.j].bin_count):
                raise SizeError("pair grid shape does not match bin counts")
        self.schema = schema
        self.bin_maps = list(bin_maps)
        self.intercept = float(intercept)
        self.shape_terms = list(shape_terms)
        self.pair_terms = list(pair_terms)
        self.category_labels = dict(category_labels or {})
        self.train_meta = dict(train_meta or {})

    # ---- term bookkeeping -------------------------------------------------

    def term_labels(self):
        """Labels in canonical order: features first, then pairs."""
        names = self.schema.feature_names
        labels = list(names)
        labels += [f"{names[pt.i]}{PAIR_LABEL_SEP}{names[pt.j]}" for pt in self.pair_terms]
        return labels

    def pair_label(self, pt):
        names = self.schema.feature_names
        return f"{names[pt.i]}{PAIR_LABEL_SEP}{names[pt.j]}"

    # ---- row handling -----------------------------------------------------

    def _encode_value(self, value, name, kind):
        if value is None:
            raise SchemaError(f"missing value for feature {name!r}")
        if kind.is_categorical:
            if isinstance(value, str):
                labels = self.category_labels.get(name)
                if labels is None or value not in labels:
                    raise DomainError(f"unknown category {value!r} for feature {name!r}")
                return labels.index(value)
            code = int(value)
            if code != value:
                raise DomainError(f"non-integer code {value!r} for feature {name!r}")
            return code
        value = float(value)
        if math.isnan(value):
            raise DomainError(f"missing (NaN) value for feature {name!r}")
        return value

    def _row_bins(self, row):
        feats = self.schema.features
        row = list(row)
        if len(row) != len(feats):
            raise SchemaError(f"row has {len(row)} values, schema has {len(feats)} features")
        bins = []
        for (name, kind), bm, value in zip(feats, self.bin_maps, row):
            bins.append(apply_bins(bm, self._encode_value(value, name, kind)))
        return bins

    def _contributions_from_bins(self, bins):
        values = [float(term.scores[b]) for term, b in zip(self.shape_terms, bins)]
        values += [float(pt.grid[bins[pt.i], bins[pt.j]]) for pt in self.pair_terms]
        return values

    def _binned_matrix(self, ds):
        """Bin a conforming Dataset's columns with this model's bin maps.

        Categorical codes are recoded through label strings when the
        dataset's vocabulary order differs from the model's.
        """
        if ds.schema.feature_names != self.schema.feature_names:
            raise SchemaError("dataset features do not match the model schema")
        out = np.empty((ds.n_rows, len(self.bin_maps)), dtype=np.int64)
        for j, ((name, kind), bm) in enumerate(zip(self.schema.features, self.bin_maps)):
            col = ds.columns[j]
            if kind.is_categorical:
                ds_labels = ds.category_labels.get(name)
                model_labels = self.category_labels.get(name)
                if ds_labels and model_labels and ds_labels != model_labels:
                    lut = np.full(len(ds_labels), -1, dtype=np.int64)
                    for code, lab in enumerate(ds_labels):
                        if lab in model_labels:
                            lut[code] = model_labels.index(lab)
                    col = lut[col]
                    if col.size and col.min() < 0:
                        row = int(np.nonzero(col < 0)[0][0])
                        bad = ds_labels[int(ds.columns[j][row])]
                        raise DomainError(
                            f"unknown category {bad!r} for feature {name!r} (row {row})")
            out[:, j] = apply_bins(bm, col)
        return out

    # ---- inference --------------------------------------------------------

    def predict_row(self, row):
        """Predict one sample given raw feature values in schema order."""
        values = self._contributions_from_bins(self._row_bins(row))
        return math.fsum([self.intercept] + values)

    def predict_dataset(self, ds):
        """Predict every row of a conforming Dataset."""
        binned = self._binned_matrix(ds)
        contrib = self._contribution_matrix(binned)
        intercept = self.intercept
        return np.array([math.fsum([intercept] + row) for row in contrib.tolist()])

    def _contribution_matrix(self, binned):
        n = binned.shape[0]
        cols = [term.scores[binned[:, j]] for j, term in enumerate(self.shape_terms)]
        cols += [pt.grid[binned[:, pt.i], binned[:, pt.j]] for pt in self.pair_terms]
        if not cols:
            return np.zeros((n, 0))
        return np.column_stack(cols)

    def explain_row(self, row):
        """Sorted signed contributions for one sample."""
        bins = self._row_bins(row)
        values = self._contributions_from_bins(bins)
        prediction = math.fsum([self.intercept] + values)
        pairs = sorted(zip(self.term_labels(), values),
                       key=lambda kv: (-abs(kv[1]), kv[0]))
        return Explanation(prediction, self.intercept, tuple(pairs))

    def importance(self, ds):
        """Mean absolute term score over a dataset, sorted descending."""
        if ds.n_rows == 0:
            raise SizeError("cannot compute importance on an empty dataset")
        binned = self._binned_matrix(ds)
        contrib = self._contribution_matrix(binned)
        means = np.abs(contrib).mean(axis=0) if contrib.size else np.zeros(len(self.term_labels()))
        items = list(zip(self.term_labels(), (float(v) for v in means)))
        items.sort(key=lambda kv: (-kv[1], kv[0]))
        return items


# ---- module-level operation surface ---------------------------------------

def predict(model, row):
    """Intercept plus term lookups for one raw-valued row (identity link)."""
    return model.predict_row(row)


def predict_dataset(model, ds):
    return model.predict_dataset(ds)


def local_explain(model, row):
    """One contribution per term, sorted by absolute value descending."""
    return model.explain_row(row)


def global_importance(model, ds):
    """(term label, mean |score|) pairs sorted by importance descending."""
    return model.importance(ds)


# ---- shape export ----------------------------------------------------------

@dataclass(frozen=True)
class ShapeExport:
    """One term's export: tabular rows, their CSV text, and an SVG plot."""

    label: str
    kind: str  # "numeric", "categorical" or "pair"
    rows: tuple
    csv_text: str
    svg_text: str


def _fmt(x):
    return repr(float(x))


def _shape_table(model, index):
    term = model.shape_terms[index]
    name, kind = model.schema.features[index]
    bm = model.bin_maps[index]
    if kind.is_categorical:
        labels = model.category_labels.get(name) or [str(c) for c in range(bm.bin_count)]
        rows = tuple((labels[c], c, float(term.scores[c]), float(term.stderr[c]))
                     for c in range(bm.bin_count))
        header = "category,code,score,stderr"
        lines = [header] + [f"{r[0]},{r[1]},{_fmt(r[2])},{_fmt(r[3])}" for r in rows]
        return "categorical", rows, "\n".join(lines) + "\n"
    edges = [-math.inf] + [float(c) for c in bm.cuts] + [math.inf]
    rows = tuple((edges[b], edges[b + 1], float(term.scores[b]), float(term.stderr[b]))
                 for b in range(bm.bin_count))
    header = "lower,upper,score,stderr"
    lines = [header] + [",".join(_fmt(v) for v in r) for r in rows]
    return "numeric", rows, "\n".join(lines) + "\n"


def _pair_table(model, pt):
    bi, bj = pt.grid.shape
    row_labels = _bin_labels(model, pt.i)
    col_labels = _bin_labels(model, pt.j)
    rows = tuple(tuple(float(v) for v in pt.grid[r]) for r in range(bi))
    lines = ["," + ",".join(col_labels)]
    for r in range(bi):
        lines.append(row_labels[r] + "," + ",".join(_fmt(v) for v in pt.grid[r]))
    return rows, "\n".join(lines) + "\n"


def _bin_labels(model, index):
    name, kind = model.schema.features[index]
    bm = model.bin_maps[index]
    if kind.is_categorical:
        labels = model.category_labels.get(name)
        return list(labels) if labels else [str(c) for c in range(bm.bin_count)]
    edges = [-math.inf] + [float(c) for c in bm.cuts] + [math.inf]
    return [f"({edges[b]:.6g}; {edges[b + 1]:.6g}]" for b in range(bm.bin_count)]


def _resolve_term(model, label):
    names = model.schema.feature_names
    if label in names:
        return ("shape", names.index(label))
    for pt in model.pair_terms:
        if model.pair_label(pt) == label:
            return ("pair", pt)
    raise UnknownTermError(f"no term labeled {label!r}")


def export_shape(model, label):
    """Export one term as a step-function (or grid) table plus an SVG."""
    kind, obj = _resolve_term(model, label)
    if kind == "shape":
        table_kind, rows, csv_text = _shape_table(model, obj)
        svg = _render_shape_svg(model, obj)
        return ShapeExport(label, table_kind, rows, csv_text, svg)
    rows, csv_text = _pair_table(model, obj)
    svg = _render_pair_svg(model, obj)
    return ShapeExport(label, "pair", rows, csv_text, svg)


def import_shape_table(csv_text):
    """Rebuild (cuts, scores, stderr) from an exported numeric step table.

    The returned arrays reproduce the original term's lookups exactly:
    bin(v) = searchsorted(cuts, v, side="left").
    """
    lines = [ln for ln in csv_text.strip().splitlines() if ln]
    if not lines or lines[0] != "lower,upper,score,stderr":
        raise ModelFormatError("not a numeric shape table")
    uppers, scores, stderr = [], [], []
    for ln in lines[1:]:
        _, upper, score, err = ln.split(",")
        uppers.append(float(upper))
        scores.append(float(score))
        stderr.append(float(err))
    cuts = np.asarray(uppers[:-1], dtype=np.float64)
    return cuts, np.asarray(scores), np.asarray(stderr)


def _matplotlib():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    matplotlib.rcParams["svg.hashsalt"] = "glasswall"
    return plt


def _finite_edges(bm):
    cuts = [float(c) for c in bm.cuts]
    if not cuts:
        return [0.0, 1.0]
    span = (cuts[-1] - cuts[0]) or abs(cuts[0]) or 1.0
    return [cuts[0] - 0.05 * span] + cuts + [cuts[-1] + 0.05 * span]


def _fig_to_svg(fig):
    import io
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt_svg = buf.getvalue()
    return plt_svg


def _render_shape_svg(model, index):
    plt = _matplotlib()
    term = model.shape_terms[index]
    name, kind = model.schema.features[index]
    bm = model.bin_maps[index]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    if kind.is_categorical:
        labels = _bin_labels(model, index)
        ax.bar(range(bm.bin_count), term.scores, yerr=term.stderr,
               color="#4878a8", ecolor="#666666", capsize=3)
        ax.set_xticks(range(bm.bin_count), labels, rotation=20)
    else:
        edges = _finite_edges(bm)
        x = np.repeat(edges, 2)[1:-1]
        y = np.repeat(term.scores, 2)
        lo = np.repeat(term.scores - term.stderr, 2)
        hi = np.repeat(term.scores + term.stderr, 2)
        ax.fill_between(x, lo, hi, color="#bbbbbb", alpha=0.6, linewidth=0)
        ax.plot(x, y, color="#2b5f8a", linewidth=1.4)
    ax.axhline(0.0, color="#999999", linewidth=0.6)
    ax.set_xlabel(name)
    ax.set_ylabel("score")
    fig.tight_layout()
    svg = _fig_to_svg(fig)
    plt.close(fig)
    return svg


def _render_pair_svg(model, pt):
    plt = _matplotlib()
    names = model.schema.feature_names
    fig, ax = plt.subplots(figsize=(4.6, 3.8))
    vmax = float(np.max(np.abs(pt.grid))) or 1.0
    im = ax.imshow(pt.grid, origin="lower", aspect="auto", cmap="RdBu_r",
                   vmin=-vmax, vmax=vmax)
    fig.colorbar(im, ax=ax, label="score")
    ax.set_xlabel(names[pt.j])
    ax.set_ylabel(names[pt.i])
    fig.tight_layout()
    svg = _fig_to_svg(fig)
    plt.close(fig)
    return svg


def _safe_name(label):
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", label)


def write_shape_exports(model, out_dir):
    """Write a CSV and an SVG per term into ``out_dir``; returns the paths."""
    import os
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    names = model.schema.feature_names
    for name in names:
        exp = export_shape(model, name)
        base = os.path.join(out_dir, f"shape_{_safe_name(name)}")
        paths += _write_export(exp, base)
    for pt in model.pair_terms:
        exp = export_shape(model, model.pair_label(pt))
        base = os.path.join(out_dir, f"pair_{_safe_name(names[pt.i])}_x_{_safe_name(names[pt.j])}")
        paths += _write_export(exp, base)
    return paths


def _write_export(exp, base):
    csv_path, svg_path = base + ".csv", base + ".svg"
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(exp.csv_text)
    with open(svg_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(exp.svg_text)
    return [csv_path, svg_path]


# ---- serialization ---------------------------------------------------------

def _schema_to_payload(schema):
    feats = [[name, kind.kind, kind.cardinality] for name, kind in schema.features]
    return {"features": feats, "target_name": schema.target_name}


def _schema_from_payload(obj):
    feats = tuple((name, FeatureKind(kind, card)) for name, kind, card in obj["features"])
    return Schema(feats, obj["target_name"])


def save(model, path):
    """Write the model as versioned, checksummed UTF-8 JSON."""
    payload = {
        "schema": _schema_to_payload(model.schema),
        "category_labels": model.category_labels,
        "bin_maps": [
            None if bm.kind.is_categorical else [float(c) for c in bm.cuts]
            for bm in model.bin_maps
        ],
        "intercept": model.intercept,
        "shape_terms": [
            {"feature_index": t.feature_index,
             "scores": t.scores.tolist(),
             "stderr": t.stderr.tolist()}
            for t in model.shape_terms
        ],
        "pair_terms": [
            {"i": pt.i, "j": pt.j, "grid": pt.grid.tolist()}
            for pt in model.pair_terms
        ],
        "train_meta": model.train_meta,
    }
    write_envelope(path, MODEL_FORMAT, MODEL_VERSION, payload)


def load(path):
    """Read a model file; predictions round-trip bit-exactly."""
    payload = read_envelope(path, MODEL_FORMAT, MODEL_VERSION)
    try:
        schema = _schema_from_payload(payload["schema"])
        bin_maps = []
        for (name, kind), cuts in zip(schema.features, payload["bin_maps"], strict=True):
            if kind.is_categorical:
                bin_maps.append(BinMap(kind, None, kind.cardinality))
            else:
                cuts = np.asarray(cuts, dtype=np.float64)
                bin_maps.append(BinMap(kind, cuts, cuts.size + 1))
        shape_terms = [
            ShapeTerm(t["feature_index"], np.asarray(t["scores"]), np.asarray(t["stderr"]))
            for t in payload["shape_terms"]
        ]
        pair_terms = [
            PairTerm(p["i"], p["j"], np.asarray(p["grid"]))
            for p in payload["pair_terms"]
        ]
        return EbmModel(schema, bin_maps, payload["intercept"], shape_terms,
                        pair_terms, category_labels=payload.get("category_labels"),
                        train_meta=payload.get("train_meta"))
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, ModelFormatError):
            raise
        raise ModelFormatError(f"{path}: invalid model payload: {e}") from e
