"""Multi-label classification metrics.

Per-label accuracy, precision, recall, and F1 from thresholded probabilities,
plus unweighted macro averages.  Zero-denominator cases (no predicted
positives, no actual positives, or both precision and recall zero) score 0
rather than raising, so sweeps over degenerate labels stay total.
"""

from __future__ import annotations

import numpy as np


class MetricsError(ValueError):
    """Inputs are not valid prediction/target matrices."""


def binarize(probs: np.ndarray, threshold: float = 0.5) -> np.ndarray:
    """Threshold probabilities into 0/1 predictions; ties go to the positive class."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.size and (probs.min() < 0.0 or probs.max() > 1.0):
        raise MetricsError("probabilities must lie in [0, 1]")
    if not 0.0 <= threshold <= 1.0:
        raise MetricsError(f"threshold must lie in [0, 1], got {threshold}")
    return (probs >= threshold).astype(np.int64)


def _check_pair(y_true: np.ndarray, y_pred: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise MetricsError(f"shape mismatch: targets {y_true.shape} vs predictions {y_pred.shape}")
    if y_true.size == 0:
        raise MetricsError("cannot score zero samples")
    for name, arr in (("targets", y_true), ("predictions", y_pred)):
        if not np.isin(arr, (0, 1)).all():
            raise MetricsError(f"{name} must be 0/1")
    return y_true.astype(np.int64), y_pred.astype(np.int64)


def label_metrics(y_true: np.ndarray, y_pred: np.ndarray) -> dict:
    """Confusion counts and the four scores for one label (1-D 0/1 arrays)."""
    y_true, y_pred = _check_pair(y_true, y_pred)
    if y_true.ndim != 1:
        raise MetricsError("label_metrics expects 1-D arrays")
    tp = int(((y_true == 1) & (y_pred == 1)).sum())
    fp = int(((y_true == 0) & (y_pred == 1)).sum())
    fn = int(((y_true == 1) & (y_pred == 0)).sum())
    tn = int(((y_true == 0) & (y_pred == 0)).sum())
    n = tp + fp + fn + tn

    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return {
        "tp": tp,
        "fp": fp,
        "fn": fn,
        "tn": tn,
        "accuracy": (tp + tn) / n,
        "precision": precision,
        "recall": recall,
        "f1": f1,
    }


def evaluate_multilabel(
    y_true: np.ndarray,
    probs: np.ndarray,
    label_names: list[str] | None = None,
    threshold: float = 0.5,
) -> dict:
    """Score an (N, L) probability matrix against 0/1 targets.

    Returns per-label metric dicts plus macro averages (unweighted means over
    labels).  ``probs`` may already be 0/1; thresholding is a no-op then.
    """
    y_true = np.asarray(y_true)
    probs = np.asarray(probs, dtype=np.float64)
    if y_true.ndim != 2 or probs.ndim != 2:
        raise MetricsError("expected 2-D (samples, labels) matrices")
    y_pred = binarize(probs, threshold)
    y_true_checked, y_pred = _check_pair(y_true, y_pred)

    n_labels = y_true_checked.shape[1]
    if label_names is None:
        label_names = [f"label_{j}" for j in range(n_labels)]
    if len(label_names) != n_labels:
        raise MetricsError(f"{len(label_names)} label names for {n_labels} labels")

    per_label = [
        dict(label=name, **label_metrics(y_true_checked[:, j], y_pred[:, j]))
        for j, name in enumerate(label_names)
    ]
    macro = {
        key: float(np.mean([m[key] for m in per_label]))
        for key in ("accuracy", "precision", "recall", "f1")
    }
    return {"threshold": threshold, "per_label": per_label, "macro": macro}
