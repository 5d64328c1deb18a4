"""
Build, load, normalize and partition online batch streams.
"""
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from .errors import ConfigError, EmptyInputError, ParseError, \
                    ShapeError, SizingError
from . import util


NORMALIZATIONS = ("zscore", "minmax01", "none")
STATS_SOURCES = ("train_prefix", "global")
NOISE_MODES = ("absolute", "relative")


@dataclass(frozen=True)
class Batch:
    """One labelled chunk (X_t, Y_t) of the stream."""
    x: np.ndarray
    y: np.ndarray
    index: int

    def __post_init__(self):
        x = util.frozen(self.x)
        y = util.frozen(self.y)

        if y.ndim == 1:
            y = util.frozen(y.reshape(-1, 1))

        if x.ndim != 2 or y.ndim != 2:
            raise ShapeError("Batch %s: x and y must be matrices." % self.index)

        if x.shape[0] != y.shape[0] or x.shape[0] < 1:
            raise ShapeError("Batch %s: x has %s rows, y has %s."
                             % (self.index, x.shape[0], y.shape[0]))

        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ShapeError("Batch %s holds NaN or Inf." % self.index)

        if self.index < 0:
            raise ShapeError("Batch index must be non-negative.")

        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def size(self):
        """Number of rows b_t."""
        return self.x.shape[0]


@dataclass(frozen=True)
class BatchStream:
    """Ordered, immutable sequence of batches."""
    batches: tuple
    feature_dim: int
    target_dim: int
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "batches", tuple(self.batches))

        for i, batch in enumerate(self.batches):
            if batch.index != i:
                raise ShapeError("Batch indices must be contiguous from 0, "
                                 "found %s at position %s." % (batch.index, i))

            if batch.x.shape[1] != self.feature_dim or \
               batch.y.shape[1] != self.target_dim:
                raise ShapeError("Batch %s has shape %s/%s, stream expects "
                                 "k=%s, m=%s." % (i, batch.x.shape,
                                                  batch.y.shape,
                                                  self.feature_dim,
                                                  self.target_dim))

    def __len__(self):
        return len(self.batches)

    def __iter__(self):
        return iter(self.batches)

    def __getitem__(self, index):
        return self.batches[index]

    @property
    def sizes(self):
        """Batch sizes b_t."""
        return [batch.size for batch in self.batches]

    def rows(self):
        """All rows stacked in stream order."""
        return (np.vstack([batch.x for batch in self.batches]),
                np.vstack([batch.y for batch in self.batches]))

    def digest(self):
        """SHA-256 of the stream contents in order."""
        return util.array_digest(*[a for batch in self.batches
                                   for a in (batch.x, batch.y)])


def from_arrays(chunks, meta=None):
    """Build a stream from a list of (x, y) pairs."""
    batches = [Batch(x, y, i) for i, (x, y) in enumerate(chunks)]

    if not batches:
        raise EmptyInputError("A stream needs at least one batch.")

    return BatchStream(batches, batches[0].x.shape[1],
                       batches[0].y.shape[1], dict(meta or {}))


@dataclass(frozen=True)
class SyntheticConfig:
    """Parameters of the Y = X.beta_o + eps regression stream."""
    T: int = 1000
    b: int = 10
    k: int = 24
    oracle_mean: float = 20.0
    oracle_std: float = 1.0
    noise_factor: float = 0.15
    noise_mode: str = "absolute"
    seed: int = 0
    rng: str = util.DEFAULT_RNG

    def __post_init__(self):
        if self.T < 1 or self.b < 1 or self.k < 1:
            raise ConfigError("Synthetic stream needs T, b, k >= 1.")

        if self.noise_factor < 0 or self.oracle_std < 0:
            raise ConfigError("noise_factor and oracle_std must be >= 0.")

        if self.noise_mode not in NOISE_MODES:
            raise ConfigError("noise_mode must be one of %s." % (NOISE_MODES,))


def generate_synthetic_stream(cfg):
    """Draw a synthetic regression stream and its oracle weights."""
    rng = util.make_rng(cfg.seed, cfg.rng)
    oracle = rng.normal(cfg.oracle_mean, cfg.oracle_std, size=cfg.k)

    noise_std = cfg.noise_factor
    if cfg.noise_mode == "relative":
        # std of x.beta_o when x ~ N(0, I).
        noise_std *= np.linalg.norm(oracle)

    chunks = []
    for _ in range(cfg.T):
        x = rng.standard_normal((cfg.b, cfg.k))
        y = x @ oracle

        if noise_std > 0:
            y = y + rng.normal(0.0, noise_std, size=cfg.b)

        chunks.append((x, y.reshape(-1, 1)))

    meta = {"source": "synthetic", "task": "regression",
            "oracle_norm": float(np.linalg.norm(oracle))}
    return from_arrays(chunks, meta), oracle


def read_csv_table(path, target_columns, task="regression"):
    """Read a numeric CSV file into feature and target matrices."""
    try:
        frame = pd.read_csv(path, encoding="utf-8", dtype=str,
                            keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise EmptyInputError("'%s' is empty." % path) from None

    if frame.empty:
        raise EmptyInputError("'%s' holds no data rows." % path)

    missing = [col for col in target_columns if col not in frame.columns]
    if missing or not target_columns:
        raise ConfigError("Target columns %s not found in '%s'."
                          % (missing or target_columns, path))

    numeric = frame.apply(pd.to_numeric, errors="coerce")
    bad = numeric.isna().to_numpy()

    if bad.any():
        row, col = np.argwhere(bad)[0]
        column = frame.columns[col]
        # +2: header line and 1-based line numbers.
        raise ParseError("Non-numeric cell %r at line %s, column '%s' of "
                         "'%s'." % (frame.iat[row, col], row + 2, column,
                                    path), row=int(row) + 2, column=column)

    features = [col for col in frame.columns if col not in target_columns]
    x = numeric[features].to_numpy(dtype=float)
    y = numeric[list(target_columns)].to_numpy(dtype=float)
    meta = {"source": str(path), "task": task, "features": features,
            "targets": list(target_columns)}

    if task == "classification":
        if len(target_columns) != 1:
            raise ConfigError("Classification needs exactly one label column.")

        y, classes = one_hot(y[:, 0])
        meta["encoding"] = {"classes": classes.tolist()}

    logging.info("Read %s rows x %s features from %s.",
                 x.shape[0], x.shape[1], path)
    return x, y, meta


def one_hot(labels):
    """Encode a label vector as one-hot rows, classes sorted."""
    classes, index = np.unique(labels, return_inverse=True)
    encoded = np.zeros((len(labels), len(classes)))
    encoded[np.arange(len(labels)), index] = 1.0
    return encoded, classes


def chunk_rows(x, y, batch_fraction, meta=None):
    """Cut rows into ceil(1 / fraction) batches of floor(rows * fraction)
    rows, the last one taking the remainder.
    """
    if not 0 < batch_fraction <= 1:
        raise ConfigError("batch_fraction must lie in (0, 1].")

    rows = x.shape[0]
    if rows == 0:
        raise EmptyInputError("No rows to chunk.")

    size = max(1, int(math.floor(rows * batch_fraction)))
    count = min(math.ceil(round(1 / batch_fraction, 9)),
                math.ceil(rows / size))
    starts = [i * size for i in range(count)]
    ends = starts[1:] + [rows]
    chunks = [(x[i:j], y[i:j]) for i, j in zip(starts, ends)]

    meta = dict(meta or {})
    meta["batch_fraction"] = batch_fraction
    return from_arrays(chunks, meta)


def load_csv_stream(path, target_columns, batch_fraction,
                    shuffle_seed=None, task="regression", rng=util.DEFAULT_RNG):
    """Load a CSV file as a batch stream.

    Rows are shuffled first when shuffle_seed is given.
    """
    x, y, meta = read_csv_table(path, target_columns, task)

    if shuffle_seed is not None:
        order = util.make_rng(shuffle_seed, rng).permutation(x.shape[0])
        x, y = x[order], y[order]
        meta["shuffle_seed"] = shuffle_seed

    return chunk_rows(x, y, batch_fraction, meta)


def compute_stats(x, method):
    """Per-column affine statistics (shift, scale) for a method."""
    if method == "zscore":
        shift = x.mean(axis=0)
        scale = x.std(axis=0)
        flat = scale == 0
        # Zero-variance columns pass through unchanged.
        shift[flat] = 0.0
        scale[flat] = 1.0

    elif method == "minmax01":
        shift = x.min(axis=0)
        scale = x.max(axis=0) - shift
        # Constant columns map to 0.
        scale[scale == 0] = 1.0

    else:
        shift = np.zeros(x.shape[1])
        scale = np.ones(x.shape[1])

    return shift, scale


def normalize(stream, method="zscore", stats_source="global",
              prefix_batches=1, include_targets=False):
    """Apply a per-feature affine transform to every batch.

    include_targets=True scales the targets with the same method; a method
    name scales them with that method instead.
    """
    target_method = method if include_targets is True else include_targets

    for name in (method, target_method or "none"):
        if name not in NORMALIZATIONS:
            raise ConfigError("Unknown normalization '%s'." % name)

    if stats_source not in STATS_SOURCES:
        raise ConfigError("Unknown stats source '%s'." % stats_source)

    if method == "none" and target_method in (False, None, "none"):
        return replace(stream, meta={**stream.meta,
                                     "normalization": {"method": "none"}})

    if stats_source == "train_prefix":
        if not 1 <= prefix_batches <= len(stream):
            raise ConfigError("train_prefix needs 1..%s statistics batches."
                              % len(stream))
        source = stream.batches[:prefix_batches]
    else:
        source = stream.batches

    stats = {"method": method, "stats_source": stats_source}

    if method != "none":
        x_shift, x_scale = compute_stats(
            np.vstack([batch.x for batch in source]), method)
        stats.update(x_shift=x_shift.tolist(), x_scale=x_scale.tolist())

    if target_method not in (False, None, "none"):
        y_shift, y_scale = compute_stats(
            np.vstack([batch.y for batch in source]), target_method)
        stats.update(target_method=target_method, y_shift=y_shift.tolist(),
                     y_scale=y_scale.tolist())

    chunks = [(apply_stats(batch.x, stats, "x"),
               apply_stats(batch.y, stats, "y"))
              for batch in stream]

    logging.info("Normalized stream (%s, %s statistics).", method, stats_source)
    return from_arrays(chunks, {**stream.meta, "normalization": stats})


def apply_stats(array, stats, part="x"):
    """Transform rows with recorded normalization statistics."""
    if "%s_shift" % part not in stats:
        return np.array(array, dtype=float)

    shift = np.asarray(stats["%s_shift" % part])
    scale = np.asarray(stats["%s_scale" % part])
    return (np.asarray(array, dtype=float) - shift) / scale


def invert_stats(array, stats, part="x"):
    """Map normalized rows back to the original scale."""
    if "%s_shift" % part not in stats:
        return np.array(array, dtype=float)

    return np.asarray(array) * np.asarray(stats["%s_scale" % part]) \
        + np.asarray(stats["%s_shift" % part])


def inverse_transform(stream):
    """Undo normalize() using the statistics stored in the stream."""
    stats = stream.meta.get("normalization", {"method": "none"})
    chunks = [(invert_stats(batch.x, stats, "x"),
               invert_stats(batch.y, stats, "y"))
              for batch in stream]
    meta = {k: v for k, v in stream.meta.items() if k != "normalization"}
    return from_arrays(chunks, meta)


@dataclass(frozen=True)
class Fold:
    """Row indices of one cross-validation fold."""
    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray


def partition_folds(n_rows, n_folds, holdout_fraction=0.0, seed=0,
                    rng=util.DEFAULT_RNG):
    """Split row indices into a shared holdout and n_folds test folds."""
    if n_folds < 2:
        raise ConfigError("n_folds must be >= 2.")

    if not 0 <= holdout_fraction < 1:
        raise ConfigError("holdout_fraction must lie in [0, 1).")

    order = util.make_rng(seed, rng).permutation(n_rows)
    n_holdout = int(round(n_rows * holdout_fraction))
    validation, rest = order[:n_holdout], order[n_holdout:]

    if len(rest) < 2 * n_folds:
        raise SizingError("%s rows can't fill %s folds with train and test "
                          "rows." % (n_rows, n_folds))

    parts = np.array_split(rest, n_folds)
    folds = []

    for i, test in enumerate(parts):
        train = np.concatenate([p for j, p in enumerate(parts) if j != i])
        folds.append(Fold(util.frozen(train, int), util.frozen(validation, int),
                          util.frozen(test, int)))

    return folds


def split_batches(stream, max_rows):
    """Split batches larger than max_rows into consecutive sub-batches."""
    if max_rows is None:
        return stream

    if max_rows < 1:
        raise ConfigError("max_rows must be >= 1.")

    chunks = [(batch.x[i:i + max_rows], batch.y[i:i + max_rows])
              for batch in stream
              for i in range(0, batch.size, max_rows)]
    return from_arrays(chunks, stream.meta)


def rows_digest(x, y):
    """SHA-256 of raw rows, independent of batching."""
    return util.array_digest(x, y)


def save_stream_meta(stream, path):
    """Write stream metadata next to an exported stream."""
    meta = {**stream.meta, "feature_dim": stream.feature_dim,
            "target_dim": stream.target_dim, "batch_sizes": stream.sizes}
    util.save_file_json(meta, path)
