"""Binary Offensive/NotOffensive classification over the transform scalar.

Hand-rolled entropy-split decision trees and a bootstrap random forest, the
comparison baselines (SGD logistic regression, Gaussian naive Bayes), and
the evaluation protocol: k-fold cross-validation, grid search, holdout
splits, and the confidence-threshold / holdout-size sweep.

The feature space is a vector of scalars (length 1 in this pipeline) so the
trees and the search generalize without redesign.
"""

from __future__ import annotations

import csv
import io
import json
import os
import struct
from dataclasses import dataclass, field, asdict
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DegenerateSplit,
    EmptyEvaluationSet,
    EmptyTrainingSet,
    ModelFormatError,
    ChecksumMismatch,
    TooFewSamples,
    UnknownClassLabel,
)
from .hashutil import checksum64, derive_seed

FOREST_MAGIC = b"OFFRF1\x00"
_FOREST_VERSION = 1

# Float dust guard: a split must improve entropy by more than this.
_GAIN_EPS = 1e-12


class Label(Enum):
    NOT_OFFENSIVE = 0
    OFFENSIVE = 1


@dataclass(frozen=True)
class LabeledText:
    """Loader output: raw text with its consolidated label and confidence."""

    text: str
    label: Label
    confidence: float


@dataclass(frozen=True)
class LabeledSample:
    feature: float
    label: Label
    confidence: float = 1.0
    source_text: str | None = None


@dataclass(frozen=True)
class DatasetFormat:
    """Column mapping and class vocabulary for the labeled CSV."""

    text_column: str = "tweet_text"
    class_column: str = "does_this_tweet_contain_hate_speech"
    confidence_column: str = "confidence"
    class_map: dict = field(
        default_factory=lambda: {
            "NO": Label.NOT_OFFENSIVE,
            "O": Label.OFFENSIVE,
            "OH": Label.OFFENSIVE,
        }
    )


def load_labeled_dataset(path, fmt: DatasetFormat) -> tuple[list[LabeledText], int]:
    """Read the labeled CSV, consolidating classes per the format's map.

    Returns (samples, malformed_row_count). Rows with missing columns or a
    confidence outside (0, 1] are counted and skipped; a class value absent
    from the map raises :class:`UnknownClassLabel` since it almost always
    means a wrong column mapping.
    """
    samples = []
    malformed = 0
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            text = row.get(fmt.text_column)
            cls = row.get(fmt.class_column)
            conf_raw = row.get(fmt.confidence_column)
            if text is None or cls is None or conf_raw is None:
                malformed += 1
                continue
            try:
                confidence = float(conf_raw)
            except ValueError:
                malformed += 1
                continue
            if not (0.0 < confidence <= 1.0):
                malformed += 1
                continue
            cls = cls.strip()
            if cls not in fmt.class_map:
                raise UnknownClassLabel(f"{path}: unknown class {cls!r}")
            samples.append(LabeledText(text=text, label=fmt.class_map[cls], confidence=confidence))
    return samples, malformed


def filter_by_confidence(samples: Sequence, threshold: float):
    """Keep samples with confidence >= threshold; 0 keeps everything."""
    if not (0.0 <= threshold <= 1.0):
        raise ValueError("threshold must be in [0, 1]")
    return [s for s in samples if s.confidence >= threshold]


# ---------------------------------------------------------------------------
# metrics

@dataclass
class Metrics:
    """Confusion counts and derived rates with Offensive as positive.

    Zero-denominator precision/recall are reported as 0.0 with the matching
    degenerate flag set, so sweep tables never contain NaN.
    """

    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: float = 0.0
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0
    precision_degenerate: bool = False
    recall_degenerate: bool = False

    def __post_init__(self):
        n = self.tp + self.fp + self.tn + self.fn
        if n == 0:
            raise EmptyEvaluationSet("metrics over zero samples")
        self.accuracy = (self.tp + self.tn) / n
        if self.tp + self.fp > 0:
            self.precision = self.tp / (self.tp + self.fp)
        else:
            self.precision_degenerate = True
        if self.tp + self.fn > 0:
            self.recall = self.tp / (self.tp + self.fn)
        else:
            self.recall_degenerate = True
        if self.precision + self.recall > 0:
            self.f1 = 2 * self.precision * self.recall / (self.precision + self.recall)

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def metrics_from_predictions(y_true, y_pred) -> Metrics:
    y_true = np.asarray(y_true, dtype=np.int8)
    y_pred = np.asarray(y_pred, dtype=np.int8)
    tp = int(((y_true == 1) & (y_pred == 1)).sum())
    fp = int(((y_true == 0) & (y_pred == 1)).sum())
    tn = int(((y_true == 0) & (y_pred == 0)).sum())
    fn = int(((y_true == 1) & (y_pred == 0)).sum())
    return Metrics(tp=tp, fp=fp, tn=tn, fn=fn)


# ---------------------------------------------------------------------------
# samples <-> arrays

def _as_arrays(samples: Sequence[LabeledSample]):
    X = np.array([[s.feature] for s in samples], dtype=np.float64)
    y = np.array([s.label.value for s in samples], dtype=np.int8)
    return X, y


def _as_row(feature) -> np.ndarray:
    row = np.atleast_1d(np.asarray(feature, dtype=np.float64))
    return row


# ---------------------------------------------------------------------------
# decision tree

@dataclass(frozen=True)
class TreeConfig:
    max_depth: int | None = None
    min_samples_leaf: int = 1

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 or None")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")


def entropy(counts) -> float:
    """Shannon entropy (bits) of a class-count vector."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def best_split(X, y, min_samples_leaf: int = 1):
    """Maximum-information-gain split over all midpoint thresholds.

    Returns (gain, feature_index, threshold) or None when no candidate
    split satisfies the leaf-size constraint. Ties resolve to the first
    candidate in (feature asc, threshold asc) scan order.
    """
    n, d = X.shape
    parent = entropy(np.bincount(y, minlength=2))
    total1 = int(y.sum())
    best = None
    for f in range(d):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ys = y[order].astype(np.int64)
        cum1 = np.cumsum(ys)
        sizes = np.arange(1, n)
        ok = (xs[1:] != xs[:-1]) & (sizes >= min_samples_leaf) & ((n - sizes) >= min_samples_leaf)
        if not ok.any():
            continue
        nl = sizes[ok]
        c1l = cum1[:-1][ok]
        nr = n - nl
        c1r = total1 - c1l
        hl = _entropy2(nl - c1l, c1l)
        hr = _entropy2(nr - c1r, c1r)
        gains = parent - (nl * hl + nr * hr) / n
        thresholds = (xs[:-1][ok] + xs[1:][ok]) / 2.0
        i = int(np.argmax(gains))
        if best is None or gains[i] > best[0]:
            best = (float(gains[i]), f, float(thresholds[i]))
    return best


def _entropy2(c0, c1):
    """Vectorized two-class entropy from parallel count arrays."""
    c0 = np.asarray(c0, dtype=np.float64)
    c1 = np.asarray(c1, dtype=np.float64)
    total = c0 + c1
    out = np.zeros_like(total)
    for c in (c0, c1):
        mask = c > 0
        p = np.divide(c, total, out=np.ones_like(total), where=total > 0)
        out[mask] -= (p * np.log2(p, out=np.zeros_like(p), where=mask))[mask]
    return out


class DecisionTree:
    """Flat-array binary tree: feature[i] < 0 marks a leaf."""

    __slots__ = ("feature", "threshold", "left", "right", "counts", "gain", "config")

    def __init__(self, feature, threshold, left, right, counts, gain, config):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.counts = counts
        self.gain = gain
        self.config = config

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def leaf_label(self, node: int) -> Label:
        c = self.counts[node]
        # exact tie in a leaf falls to the non-offensive side
        return Label.OFFENSIVE if c[1] > c[0] else Label.NOT_OFFENSIVE

    def apply(self, row) -> int:
        """Leaf index reached by one feature row."""
        node = 0
        while self.feature[node] >= 0:
            if row[self.feature[node]] <= self.threshold[node]:
                node = self.left[node]
            else:
                node = self.right[node]
        return node

    def apply_batch(self, X) -> np.ndarray:
        nodes = np.zeros(len(X), dtype=np.int32)
        rows = np.arange(len(X))
        while True:
            feats = self.feature[nodes]
            live = feats >= 0
            if not live.any():
                return nodes
            r = rows[live]
            f = feats[live]
            go_left = X[r, f] <= self.threshold[nodes[live]]
            nodes[live] = np.where(go_left, self.left[nodes[live]], self.right[nodes[live]])

    def predict(self, feature):
        label = self.leaf_label(self.apply(_as_row(feature)))
        return label, 1.0 if label is Label.OFFENSIVE else 0.0

    def predict_batch(self, X) -> np.ndarray:
        leaves = self.apply_batch(np.asarray(X, dtype=np.float64))
        c = self.counts[leaves]
        return (c[:, 1] > c[:, 0]).astype(np.int8)


def train_tree(samples: Sequence[LabeledSample], config: TreeConfig = TreeConfig(),
               seed: int = 0) -> DecisionTree:
    """Recursive best-gain splitting; stops at max_depth, min_samples_leaf,
    or zero gain. Deterministic (the seed is accepted for interface
    symmetry; nothing here draws randomness)."""
    if not samples:
        raise EmptyTrainingSet("cannot train a tree on zero samples")
    X, y = _as_arrays(samples)
    return _train_tree_arrays(X, y, config)


def _train_tree_arrays(X, y, config: TreeConfig) -> DecisionTree:
    feature, threshold, left, right, counts, gain = [], [], [], [], [], []

    def leaf(idx):
        node = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(np.bincount(y[idx], minlength=2))
        gain.append(0.0)
        return node

    def grow(idx, depth):
        c = np.bincount(y[idx], minlength=2)
        if (
            c[0] == 0
            or c[1] == 0
            or len(idx) < 2 * config.min_samples_leaf
            or (config.max_depth is not None and depth >= config.max_depth)
        ):
            return leaf(idx)
        found = best_split(X[idx], y[idx], config.min_samples_leaf)
        if found is None or found[0] <= _GAIN_EPS:
            return leaf(idx)
        g, f, thr = found
        node = len(feature)
        feature.append(f)
        threshold.append(thr)
        left.append(-1)
        right.append(-1)
        counts.append(c)
        gain.append(g)
        mask = X[idx, f] <= thr
        left[node] = grow(idx[mask], depth + 1)
        right[node] = grow(idx[~mask], depth + 1)
        return node

    grow(np.arange(len(y)), 0)
    return DecisionTree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        counts=np.asarray(counts, dtype=np.int64),
        gain=np.asarray(gain, dtype=np.float64),
        config=config,
    )


# ---------------------------------------------------------------------------
# random forest

@dataclass(frozen=True)
class ForestConfig:
    n_estimators: int = 100
    max_depth: int | None = None
    min_samples_leaf: int = 1
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        TreeConfig(self.max_depth, self.min_samples_leaf)

    def tree_config(self) -> TreeConfig:
        return TreeConfig(self.max_depth, self.min_samples_leaf)


class ForestModel:
    """Bootstrap ensemble of entropy-split trees, majority vote.

    An exact vote tie predicts NotOffensive, keeping the classifier on the
    underestimating side.
    """

    __slots__ = ("trees", "config", "seed", "metadata")

    def __init__(self, trees, config, seed, metadata=None):
        self.trees = trees
        self.config = config
        self.seed = seed
        self.metadata = metadata or {}

    def predict(self, feature):
        row = _as_row(feature)
        votes = sum(t.leaf_label(t.apply(row)).value for t in self.trees)
        frac = votes / len(self.trees)
        return (Label.OFFENSIVE if votes * 2 > len(self.trees) else Label.NOT_OFFENSIVE), frac

    def predict_batch(self, X):
        """(labels int8 array, offensive-vote fractions) for a feature matrix
        or a 1-D array of scalar features."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        votes = np.zeros(len(X), dtype=np.int64)
        for t in self.trees:
            votes += t.predict_batch(X)
        frac = votes / len(self.trees)
        return (votes * 2 > len(self.trees)).astype(np.int8), frac


def train_forest(samples: Sequence[LabeledSample], config: ForestConfig = ForestConfig(),
                 seed: int = 0, metadata=None) -> ForestModel:
    """Per-tree seeded bootstrap resample (same size, with replacement) then
    entropy-split tree training. Fully deterministic for a fixed seed."""
    if not samples:
        raise EmptyTrainingSet("cannot train a forest on zero samples")
    X, y = _as_arrays(samples)
    n = len(y)
    tree_cfg = config.tree_config()
    seeds = np.random.SeedSequence(seed).spawn(config.n_estimators)
    trees = []
    for ss in seeds:
        if config.bootstrap:
            rng = np.random.Generator(np.random.PCG64(ss))
            idx = rng.integers(0, n, size=n)
            trees.append(_train_tree_arrays(X[idx], y[idx], tree_cfg))
        else:
            trees.append(_train_tree_arrays(X, y, tree_cfg))
    return ForestModel(trees, config, seed, metadata)


def predict(model, feature):
    """Uniform entry point for ForestModel, DecisionTree, and baselines."""
    return model.predict(feature)


# ---------------------------------------------------------------------------
# baselines

class GaussianNB:
    """Per-class Gaussian likelihood over each feature, shared prior mix."""

    def __init__(self):
        self.priors = None
        self.means = None
        self.variances = None

    def fit(self, samples: Sequence[LabeledSample], seed: int = 0):
        if not samples:
            raise EmptyTrainingSet("cannot fit NB on zero samples")
        X, y = _as_arrays(samples)
        present = [c for c in (0, 1) if (y == c).any()]
        var_floor = 1e-12 + 1e-9 * float(X.var(axis=0).max())
        self.priors = np.full(2, -np.inf)
        self.means = np.zeros((2, X.shape[1]))
        self.variances = np.ones((2, X.shape[1]))
        for c in present:
            rows = X[y == c]
            self.priors[c] = np.log(len(rows) / len(X))
            self.means[c] = rows.mean(axis=0)
            self.variances[c] = np.maximum(rows.var(axis=0), var_floor)
        return self

    def _log_posteriors(self, row):
        ll = self.priors.copy()
        for c in (0, 1):
            if np.isfinite(ll[c]):
                var = self.variances[c]
                ll[c] += float(
                    (-0.5 * np.log(2.0 * np.pi * var) - (row - self.means[c]) ** 2 / (2.0 * var)).sum()
                )
        return ll

    def predict(self, feature):
        ll = self._log_posteriors(_as_row(feature))
        label = Label.OFFENSIVE if ll[1] > ll[0] else Label.NOT_OFFENSIVE
        return label, 1.0 if label is Label.OFFENSIVE else 0.0


class SGDLogistic:
    """Logistic regression fit by stochastic gradient descent."""

    def __init__(self, learning_rate: float = 0.5, epochs: int = 100, l2: float = 0.0):
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.l2 = l2
        self.w = None
        self.b = 0.0

    def fit(self, samples: Sequence[LabeledSample], seed: int = 0):
        if not samples:
            raise EmptyTrainingSet("cannot fit SGD on zero samples")
        X, y = _as_arrays(samples)
        n, d = X.shape
        rng = np.random.Generator(np.random.PCG64(seed))
        self.w = np.zeros(d)
        self.b = 0.0
        for epoch in range(self.epochs):
            lr = self.learning_rate / (1.0 + epoch / 10.0)
            for i in rng.permutation(n):
                z = float(X[i] @ self.w + self.b)
                p = 1.0 / (1.0 + np.exp(-np.clip(z, -60.0, 60.0)))
                g = p - y[i]
                self.w -= lr * (g * X[i] + self.l2 * self.w)
                self.b -= lr * g
        return self

    def predict(self, feature):
        z = float(_as_row(feature) @ self.w + self.b)
        label = Label.OFFENSIVE if z > 0.0 else Label.NOT_OFFENSIVE
        return label, 1.0 if label is Label.OFFENSIVE else 0.0


# ---------------------------------------------------------------------------
# evaluation protocol

def evaluate(model, samples: Sequence[LabeledSample]) -> Metrics:
    if not samples:
        raise EmptyEvaluationSet("cannot evaluate on zero samples")
    y_true = [s.label.value for s in samples]
    y_pred = [model.predict(s.feature)[0].value for s in samples]
    return metrics_from_predictions(y_true, y_pred)


@dataclass
class CVResult:
    fold_metrics: list
    fold_sizes: list
    fold_class_counts: list

    def _mean(self, attr) -> float:
        return float(np.mean([getattr(m, attr) for m in self.fold_metrics]))

    @property
    def mean_accuracy(self) -> float:
        return self._mean("accuracy")

    @property
    def mean_precision(self) -> float:
        return self._mean("precision")

    @property
    def mean_recall(self) -> float:
        return self._mean("recall")

    @property
    def mean_f1(self) -> float:
        return self._mean("f1")


Trainer = Callable[[Sequence[LabeledSample], int], object]


def forest_trainer(config: ForestConfig) -> Trainer:
    return lambda samples, seed: train_forest(samples, config, seed)


def kfold_cv(samples: Sequence[LabeledSample], k: int, trainer, seed: int = 0) -> CVResult:
    """Seeded shuffle into k near-equal contiguous folds; train on k-1 and
    evaluate on the held-out fold.

    ``trainer`` is either a ForestConfig or a callable
    (samples, seed) -> predictor. Per-fold class counts are reported so any
    imbalance from the unstratified split stays visible.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(samples) < k:
        raise TooFewSamples(f"{len(samples)} samples cannot fill {k} folds")
    if isinstance(trainer, ForestConfig):
        trainer = forest_trainer(trainer)
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "kfold-shuffle")))
    order = rng.permutation(len(samples))
    folds = np.array_split(order, k)
    fold_metrics, fold_sizes, fold_counts = [], [], []
    for i, fold in enumerate(folds):
        val = [samples[j] for j in fold]
        train = [samples[j] for f in folds for j in f if f is not fold]
        model = trainer(train, derive_seed(seed, f"kfold-train-{i}"))
        fold_metrics.append(evaluate(model, val))
        fold_sizes.append(len(val))
        fold_counts.append(
            (
                sum(1 for s in val if s.label is Label.NOT_OFFENSIVE),
                sum(1 for s in val if s.label is Label.OFFENSIVE),
            )
        )
    return CVResult(fold_metrics, fold_sizes, fold_counts)


def holdout_split(samples: Sequence[LabeledSample], holdout_fraction: float, seed: int = 0):
    """Seeded unstratified shuffle split; train side gets round(n*(1-f))."""
    if not (0.0 < holdout_fraction < 1.0):
        raise ValueError("holdout_fraction must be in (0, 1)")
    n = len(samples)
    n_train = int(round(n * (1.0 - holdout_fraction)))
    if n_train <= 0 or n_train >= n:
        raise DegenerateSplit(f"split of {n} samples at fraction {holdout_fraction} leaves an empty side")
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "holdout-shuffle")))
    order = rng.permutation(n)
    train = [samples[i] for i in order[:n_train]]
    holdout = [samples[i] for i in order[n_train:]]
    return train, holdout


@dataclass
class GridSearchResult:
    best_config: ForestConfig
    best_result: CVResult
    table: list  # (config, CVResult) per grid point


def default_grid() -> list[ForestConfig]:
    grid = []
    for n_estimators in (10, 50, 100, 200):
        for max_depth in (2, 4, 8, None):
            for min_samples_leaf in (1, 5, 20):
                grid.append(ForestConfig(n_estimators, max_depth, min_samples_leaf))
    return grid


def _depth_key(d):
    return np.inf if d is None else d


def grid_search(samples: Sequence[LabeledSample], grid: Sequence[ForestConfig],
                k: int = 10, seed: int = 0) -> GridSearchResult:
    """Exhaustive k-fold evaluation of every grid point; best by mean F1,
    ties broken toward fewer estimators then shallower trees."""
    if not grid:
        raise ValueError("empty parameter grid")
    table = []
    for config in grid:
        table.append((config, kfold_cv(samples, k, config, seed)))
    best_config, best_result = min(
        table,
        key=lambda row: (
            -row[1].mean_f1,
            row[0].n_estimators,
            _depth_key(row[0].max_depth),
            row[0].min_samples_leaf,
        ),
    )
    return GridSearchResult(best_config, best_result, table)


@dataclass
class SweepRow:
    holdout_frac: float
    conf_threshold: float
    metrics: Metrics
    n_train: int
    n_holdout: int


SWEEP_HEADER = "holdout_frac,conf_threshold,accuracy,precision,recall,f1,n_train,n_holdout"


def default_holdout_fractions() -> list[float]:
    return [i / 100 for i in range(5, 100, 5)]


def sweep_holdout_and_confidence(
    samples: Sequence[LabeledSample],
    holdout_fractions=None,
    confidence_thresholds=(0.0, 0.35, 0.70),
    config: ForestConfig = ForestConfig(),
    seed: int = 0,
):
    """Full cross-product of holdout sizes and confidence thresholds.

    Returns (rows, skipped) where skipped holds (fraction, threshold,
    reason) for degenerate cells.
    """
    if holdout_fractions is None:
        holdout_fractions = default_holdout_fractions()
    rows, skipped = [], []
    for threshold in confidence_thresholds:
        surviving = filter_by_confidence(samples, threshold)
        for fraction in holdout_fractions:
            try:
                train, holdout = holdout_split(surviving, fraction, seed)
                model = train_forest(train, config, derive_seed(seed, f"sweep-{threshold}-{fraction}"))
                metrics = evaluate(model, holdout)
            except (DegenerateSplit, EmptyTrainingSet, EmptyEvaluationSet) as exc:
                skipped.append((fraction, threshold, str(exc)))
                continue
            rows.append(SweepRow(fraction, threshold, metrics, len(train), len(holdout)))
    return rows, skipped


def sweep_rows_to_csv(rows) -> str:
    out = io.StringIO()
    out.write(SWEEP_HEADER + "\n")
    for r in rows:
        m = r.metrics
        out.write(
            f"{r.holdout_frac},{r.conf_threshold},{m.accuracy},{m.precision},"
            f"{m.recall},{m.f1},{r.n_train},{r.n_holdout}\n"
        )
    return out.getvalue()


def baseline_trainers() -> dict[str, Trainer]:
    return {
        "sgd": lambda s, seed: SGDLogistic().fit(s, seed),
        "naive_bayes": lambda s, seed: GaussianNB().fit(s, seed),
        "decision_tree": lambda s, seed: train_tree(s, TreeConfig(), seed),
        "random_forest": lambda s, seed: train_forest(s, ForestConfig(), seed),
    }


def train_baselines(samples: Sequence[LabeledSample], seed: int = 0, k: int = 10):
    """Evaluate the four reference classifiers under the identical k-fold
    protocol; returns ordered (name, CVResult) rows."""
    return [(name, kfold_cv(samples, k, trainer, seed)) for name, trainer in baseline_trainers().items()]


# ---------------------------------------------------------------------------
# forest serialization

def save_forest(model: ForestModel, path) -> None:
    """Versioned binary: magic, header, config JSON, flat tree arrays, and a
    trailing 8-byte checksum of everything before it."""
    payload = b"".join(_iter_forest_payload(model))
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(payload)
        fh.write(checksum64(payload))
    os.replace(tmp, path)


def forest_content_hash(model: ForestModel) -> str:
    return checksum64(b"".join(_iter_forest_payload(model))).hex()


def _iter_forest_payload(model: ForestModel):
    yield FOREST_MAGIC
    cfg = {
        "version": _FOREST_VERSION,
        "config": {
            "n_estimators": model.config.n_estimators,
            "max_depth": model.config.max_depth,
            "min_samples_leaf": model.config.min_samples_leaf,
            "bootstrap": model.config.bootstrap,
        },
        "seed": model.seed,
        "metadata": model.metadata,
    }
    blob = json.dumps(cfg, sort_keys=True).encode("utf-8")
    yield struct.pack("<II", _FOREST_VERSION, len(blob))
    yield blob
    yield struct.pack("<I", len(model.trees))
    for t in model.trees:
        yield struct.pack("<I", t.n_nodes)
        yield np.ascontiguousarray(t.feature, dtype="<i4").tobytes()
        yield np.ascontiguousarray(t.threshold, dtype="<f8").tobytes()
        yield np.ascontiguousarray(t.left, dtype="<i4").tobytes()
        yield np.ascontiguousarray(t.right, dtype="<i4").tobytes()
        yield np.ascontiguousarray(t.counts, dtype="<i8").tobytes()
        yield np.ascontiguousarray(t.gain, dtype="<f8").tobytes()


def load_forest(path) -> ForestModel:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(FOREST_MAGIC) + 8 + 8:
        raise ModelFormatError(f"{path}: file too short")
    if blob[: len(FOREST_MAGIC)] != FOREST_MAGIC:
        raise ModelFormatError(f"{path}: bad magic")
    payload, stored = blob[:-8], blob[-8:]
    if checksum64(payload) != stored:
        raise ChecksumMismatch(f"{path}: checksum mismatch")
    buf = io.BytesIO(payload)
    buf.seek(len(FOREST_MAGIC))
    version, cfg_len = struct.unpack("<II", _read_exact(buf, 8, path))
    if version != _FOREST_VERSION:
        raise ModelFormatError(f"{path}: unsupported version {version}")
    header = json.loads(_read_exact(buf, cfg_len, path).decode("utf-8"))
    cfg = header["config"]
    config = ForestConfig(
        n_estimators=cfg["n_estimators"],
        max_depth=cfg["max_depth"],
        min_samples_leaf=cfg["min_samples_leaf"],
        bootstrap=cfg["bootstrap"],
    )
    (n_trees,) = struct.unpack("<I", _read_exact(buf, 4, path))
    tree_cfg = config.tree_config()
    trees = []
    for _ in range(n_trees):
        (n_nodes,) = struct.unpack("<I", _read_exact(buf, 4, path))
        feature = np.frombuffer(_read_exact(buf, 4 * n_nodes, path), dtype="<i4")
        threshold = np.frombuffer(_read_exact(buf, 8 * n_nodes, path), dtype="<f8")
        left = np.frombuffer(_read_exact(buf, 4 * n_nodes, path), dtype="<i4")
        right = np.frombuffer(_read_exact(buf, 4 * n_nodes, path), dtype="<i4")
        counts = np.frombuffer(_read_exact(buf, 16 * n_nodes, path), dtype="<i8").reshape(n_nodes, 2)
        gain = np.frombuffer(_read_exact(buf, 8 * n_nodes, path), dtype="<f8")
        trees.append(DecisionTree(feature, threshold, left, right, counts, gain, tree_cfg))
    if buf.read(1):
        raise ModelFormatError(f"{path}: trailing bytes")
    if len(trees) != config.n_estimators:
        raise ModelFormatError(f"{path}: tree count does not match config")
    return ForestModel(trees, config, header["seed"], header.get("metadata", {}))


def _read_exact(buf, size, path):
    data = buf.read(size)
    if len(data) != size:
        raise ModelFormatError(f"{path}: truncated")
    return data
