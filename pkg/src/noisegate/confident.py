"""Confident-learning detection from out-of-fold predicted probabilities.

Per-class thresholds (the average predicted probability of each class over
the samples observed as that class) decide which predictions count as
confident. The confident joint counts how often samples observed as class i
are confidently predicted as class j; calibrated into an estimated joint
distribution, it says how many samples to prune per off-diagonal class pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import TRAIN, Dataset
from .detection import DetectionResult
from .trainer import TrainConfig, cv_predict


@dataclass
class ConfidentJoint:
    """Confident (observed, predicted) pair counts and their calibrated joint."""

    counts: np.ndarray       # (K, K) integer counts
    calibrated: np.ndarray   # (K, K) joint distribution estimate, sums to 1
    thresholds: np.ndarray   # (K,) per-class confidence thresholds

    def to_dict(self) -> dict:
        return {
            "counts": [[int(v) for v in row] for row in self.counts],
            "calibrated": [list(row) for row in self.calibrated],
            "thresholds": list(self.thresholds),
        }


def class_thresholds(probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """t_j = mean predicted probability of class j over samples observed as j."""
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    k = probs.shape[1]
    thresholds = np.empty(k)
    for j in range(k):
        mask = labels == j
        if not mask.any():
            raise ValueError(f"class {j} has no observed samples")
        thresholds[j] = probs[mask, j].mean()
    return thresholds


def confident_joint(probs: np.ndarray, labels: np.ndarray,
                    thresholds: np.ndarray) -> ConfidentJoint:
    """Count confident (observed, predicted) pairs and calibrate them.

    A sample counts toward (observed, j*) where j* is its highest-probability
    class among those meeting their threshold (ties to the lower class
    index); samples confident for no class contribute nothing. Calibration
    rescales each row to the observed class counts and the whole matrix to
    sum 1.
    """
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n, k = probs.shape
    confident = probs >= np.asarray(thresholds)[None, :]
    masked = np.where(confident, probs, -np.inf)
    best = masked.argmax(axis=1)
    valid = confident.any(axis=1)

    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (labels[valid], best[valid]), 1)

    class_counts = np.bincount(labels, minlength=k).astype(np.float64)
    row_sums = counts.sum(axis=1).astype(np.float64)
    calibrated = np.zeros((k, k))
    nonzero = row_sums > 0
    calibrated[nonzero] = counts[nonzero] * (class_counts[nonzero] / row_sums[nonzero])[:, None]
    total = calibrated.sum()
    if total > 0:
        calibrated /= total
    return ConfidentJoint(counts=counts, calibrated=calibrated,
                          thresholds=np.asarray(thresholds, dtype=np.float64))


def prune(probs: np.ndarray, labels: np.ndarray, joint: ConfidentJoint) -> DetectionResult:
    """Prune-by-noise-rate: flag the estimated count of mislabeled samples per pair.

    For each off-diagonal pair (i, j), n_ij = round(N * Q[i][j]) samples
    observed as i with the largest predicted probability of j are flagged
    (ties to the lower sample index); multi-selected samples are flagged
    once. Scores are the best competing probability minus the observed
    class's probability.
    """
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n, k = probs.shape
    q = joint.calibrated

    flagged = np.zeros(n, dtype=bool)
    clamped = 0
    for i in range(k):
        members = np.flatnonzero(labels == i)
        for j in range(k):
            if i == j:
                continue
            target = int(round(n * q[i, j]))
            if target == 0:
                continue
            if target > members.size:
                target = members.size
                clamped += 1
            order = np.argsort(-probs[members, j], kind="stable")
            flagged[members[order[:target]]] = True

    idx = np.arange(n)
    self_prob = probs[idx, labels]
    others = probs.copy()
    others[idx, labels] = -np.inf
    scores = others.max(axis=1) - self_prob
    return DetectionResult.from_flags(flagged, scores, "cl",
                                      clamped_pairs=float(clamped))


def run_cl_with_joint(ds: Dataset, cfg: TrainConfig, folds: int = 4):
    """Full confident-learning pass; returns (DetectionResult, ConfidentJoint)."""
    if folds < 2:
        raise ValueError("need at least 2 folds")
    cv = cv_predict(ds, cfg, folds)
    labels = ds.observed_labels[ds.indices(TRAIN)]
    thresholds = class_thresholds(cv.probs, labels)
    joint = confident_joint(cv.probs, labels, thresholds)
    return prune(cv.probs, labels, joint), joint


def run_cl(ds: Dataset, cfg: TrainConfig, folds: int = 4) -> DetectionResult:
    """Cross-validated probabilities -> thresholds -> confident joint -> prune."""
    result, _ = run_cl_with_joint(ds, cfg, folds)
    return result
