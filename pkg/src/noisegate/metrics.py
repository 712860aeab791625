"""Detection-quality and noise-level-estimation metrics.

The positive class is "noisy". Remaining noise is the fraction of mislabeled
samples left among those kept after cleaning. SMAPE compares predicted and
true overall noise levels as a symmetric percentage error in [0, 200].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FilterMetrics:
    precision: float
    recall: float
    f1: float
    remaining_noise: float
    predicted_noise_level: float
    true_noise_level: float
    delta_noise: float
    smape: float


def detection_metrics(flagged: np.ndarray, truly_noisy: np.ndarray):
    """Return (precision, recall, f1, remaining_noise) for a flag mask.

    Degenerate conventions: with noise present but nothing flagged,
    precision and recall are 0; with no noise and nothing flagged, both are
    1. Remaining noise is 0 when nothing is kept.
    """
    flagged = np.asarray(flagged, dtype=bool)
    truly_noisy = np.asarray(truly_noisy, dtype=bool)
    if flagged.shape != truly_noisy.shape:
        raise ValueError("masks must have equal length")

    tp = int((flagged & truly_noisy).sum())
    fp = int((flagged & ~truly_noisy).sum())
    fn = int((~flagged & truly_noisy).sum())
    n_noisy = tp + fn

    if tp + fp > 0:
        precision = tp / (tp + fp)
    else:
        precision = 1.0 if n_noisy == 0 else 0.0
    recall = 1.0 if n_noisy == 0 else tp / n_noisy
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)

    n_kept = int((~flagged).sum())
    remaining = fn / n_kept if n_kept > 0 else 0.0
    return precision, recall, f1, remaining


def noise_level_metrics(predicted: float, true: float):
    """Return (delta, smape) between predicted and true noise levels.

    delta is the signed difference; smape is 2|p-t|/(|p|+|t|)*100, defined
    as 0 when both levels are 0.
    """
    predicted = float(predicted)
    true = float(true)
    for value in (predicted, true):
        if not 0.0 <= value <= 1.0:
            raise ValueError("noise levels must lie in [0, 1]")
    delta = predicted - true
    denom = abs(predicted) + abs(true)
    smape = 0.0 if denom == 0 else 2.0 * abs(predicted - true) / denom * 100.0
    return delta, smape


def compute_filter_metrics(flagged: np.ndarray, truly_noisy: np.ndarray) -> FilterMetrics:
    """All five detection/estimation metrics plus F1 from the two masks."""
    precision, recall, f1, remaining = detection_metrics(flagged, truly_noisy)
    predicted = float(np.asarray(flagged, dtype=bool).mean())
    true = float(np.asarray(truly_noisy, dtype=bool).mean())
    delta, smape = noise_level_metrics(predicted, true)
    return FilterMetrics(precision=precision, recall=recall, f1=f1,
                         remaining_noise=remaining, predicted_noise_level=predicted,
                         true_noise_level=true, delta_noise=delta, smape=smape)
