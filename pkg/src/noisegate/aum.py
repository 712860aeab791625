"""Area-under-the-margin scoring with threshold samples in an extra class.

A sample's margin is the logit of its assigned class minus the largest
competing logit; the area under the margin (AuM) averages that over training
epochs. Mislabeled samples accumulate low or negative AuM. A set of samples
deliberately reassigned to an artificial extra class mimics mislabeled
behavior and calibrates the flagging threshold empirically.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import TRAIN, Dataset
from .detection import DetectionResult
from .seeding import derive_seed
from .trainer import TrainConfig, TrainingTrace, train


@dataclass
class AumConfig:
    train_cfg: TrainConfig = field(default_factory=TrainConfig)
    threshold_percentile: float = 99.0
    threshold_fraction: float | None = None  # None -> 1/(K+1), one extra-class-sized share
    two_run: bool = True

    def __post_init__(self):
        if not 0.0 < self.threshold_percentile <= 100.0:
            raise ValueError("threshold_percentile must lie in (0, 100]")
        if self.threshold_fraction is not None and not 0.0 < self.threshold_fraction < 0.5:
            raise ValueError("threshold_fraction must lie in (0, 0.5)")


@dataclass
class MarginTrace:
    """Per-sample AuM values plus the per-epoch margins they average."""

    aum: np.ndarray                        # (N,)
    margins_per_epoch: np.ndarray | None   # (E, N) when retained


def margin(logits: np.ndarray, assigned_label: int) -> float:
    """Assigned-class logit minus the best competing logit."""
    values = np.asarray(logits, dtype=np.float64)
    if values.ndim != 1 or values.size < 2:
        raise ValueError("logits must be a 1-d vector with at least 2 classes")
    if not 0 <= assigned_label < values.size:
        raise ValueError("assigned label out of range")
    competitors = np.delete(values, assigned_label)
    return float(values[assigned_label] - competitors.max())


def compute_aum(trace: TrainingTrace, labels: np.ndarray) -> MarginTrace:
    """Average per-epoch margins of each sample against its assigned label."""
    if trace.logits_per_epoch is None:
        raise ValueError("trace has no recorded logits; train with record_logits=True")
    lpe = trace.logits_per_epoch
    labels = np.asarray(labels, dtype=np.int64)
    n = lpe.shape[1]
    if labels.shape != (n,):
        raise ValueError("labels must cover every traced sample")
    idx = np.arange(n)
    assigned = lpe[:, idx, labels]
    masked = lpe.copy()
    masked[:, idx, labels] = -np.inf
    margins = assigned - masked.max(axis=2)
    return MarginTrace(aum=margins.mean(axis=0), margins_per_epoch=margins)


def threshold_flags(aum_values: np.ndarray, threshold_mask: np.ndarray,
                    percentile: float):
    """Flag non-threshold samples whose AuM falls at or below the empirical cut.

    The cut is the given percentile of the threshold samples' AuM values.
    Returns (cut, flags); threshold samples themselves are never flagged here.
    """
    aum_values = np.asarray(aum_values, dtype=np.float64)
    threshold_mask = np.asarray(threshold_mask, dtype=bool)
    pool = aum_values[threshold_mask]
    if pool.size == 0:
        raise ValueError("threshold set is empty")
    cut = float(np.percentile(pool, percentile))
    return cut, (aum_values <= cut) & ~threshold_mask


def _margin_run(ds: Dataset, tc: TrainConfig, threshold_pos: np.ndarray,
                run_id: int) -> np.ndarray:
    """Train once with the given train-split positions moved to the extra class.

    Returns AuM values for every train sample against its assigned label
    (extra class for threshold samples, observed label otherwise).
    """
    train_idx = ds.indices(TRAIN)
    observed = np.array(ds.observed_labels)
    observed[train_idx[threshold_pos]] = ds.num_classes
    ds_run = Dataset(ds.features, ds.true_labels, observed, ds.split,
                     ds.num_classes + 1)
    run_cfg = replace(tc, seed=derive_seed(tc.seed, "aum-run", run_id),
                      record_logits=True, subset=None)
    _, trace = train(ds_run, run_cfg, labels="observed",
                     num_classes_out=ds.num_classes + 1)
    return compute_aum(trace, observed[train_idx]).aum


def run_aum(ds: Dataset, cfg: AumConfig) -> DetectionResult:
    """Two-run AuM detection over the train split.

    Run 1 relabels a seeded threshold set A to the extra class, trains, and
    flags non-A samples whose AuM falls at or below the chosen percentile of
    A's AuM values. Run 2 (when enabled) repeats with a disjoint set B so the
    samples in A receive verdicts too. Scores are negated AuM values (higher
    = more suspicious). Retraining on the unflagged samples is the caller's
    job.
    """
    tc = cfg.train_cfg
    train_idx = ds.indices(TRAIN)
    n = train_idx.size
    if n == 0:
        raise ValueError("train split is empty")
    fraction = cfg.threshold_fraction
    if fraction is None:
        fraction = 1.0 / (ds.num_classes + 1)
    if not 0.0 < fraction < 0.5:
        raise ValueError("threshold fraction must lie in (0, 0.5)")
    n_thr = int(round(fraction * n))
    if n_thr == 0:
        raise ValueError("threshold set is empty; increase the train split or fraction")

    rng = np.random.default_rng(derive_seed(tc.seed, "aum-sets"))
    set_a = np.sort(rng.choice(n, size=n_thr, replace=False))
    in_a = np.zeros(n, dtype=bool)
    in_a[set_a] = True

    aum_1 = _margin_run(ds, tc, set_a, run_id=0)
    cut_1, flags = threshold_flags(aum_1, in_a, cfg.threshold_percentile)
    scores = -aum_1
    diagnostics = {"cut_run1": cut_1, "threshold_set_size": float(n_thr)}

    if cfg.two_run:
        rest = np.flatnonzero(~in_a)
        set_b = np.sort(rng.choice(rest, size=n_thr, replace=False))
        in_b = np.zeros(n, dtype=bool)
        in_b[set_b] = True
        aum_2 = _margin_run(ds, tc, set_b, run_id=1)
        cut_2, flags_2 = threshold_flags(aum_2, in_b, cfg.threshold_percentile)
        flags = flags | (flags_2 & in_a)
        scores = np.where(in_a, -aum_2, -aum_1)
        diagnostics["cut_run2"] = cut_2

    return DetectionResult.from_flags(flags, scores, "aum", **diagnostics)
