"""
Evaluation metrics.
"""
import numpy as np

from .errors import ShapeError


def check_aligned(a, b):
    """Raise unless two arrays have the same shape."""
    a = np.asarray(a)
    b = np.asarray(b)

    if a.shape != b.shape:
        raise ShapeError("Shapes %s and %s don't match." % (a.shape, b.shape))

    return a, b


def metric_rmse(pred, truth):
    """Root mean squared error over all entries."""
    pred, truth = check_aligned(np.asarray(pred, dtype=float),
                                np.asarray(truth, dtype=float))
    return float(np.sqrt(np.mean((pred - truth) ** 2)))


def metric_accuracy(pred_labels, truth_labels):
    """Fraction of matching labels."""
    pred_labels, truth_labels = check_aligned(pred_labels, truth_labels)
    return float(np.mean(pred_labels == truth_labels))


def metric_per_class_accuracy(pred_labels, truth_labels, n_classes):
    """Recall of every class; NaN for classes absent from truth."""
    pred_labels, truth_labels = check_aligned(pred_labels, truth_labels)
    hits = np.bincount(truth_labels[pred_labels == truth_labels],
                       minlength=n_classes).astype(float)
    counts = np.bincount(truth_labels, minlength=n_classes).astype(float)

    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(counts > 0, hits / counts, np.nan)
