"""Feature-vector classification datasets: synthetic blobs, CSV ingestion, splits.

Datasets carry both the true label and the observed (possibly corrupted)
label for every sample. Corruption only ever touches train-split samples;
validation and test splits stay clean so task accuracy can be measured on
flawless data.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

TRAIN = "train"
VAL = "val"
TEST = "test"
UNASSIGNED = ""

_SPLIT_TAGS = frozenset({TRAIN, VAL, TEST, UNASSIGNED})


class DatasetParseError(ValueError):
    """Malformed dataset file; the message names the offending line."""


@dataclass(frozen=True)
class Dataset:
    """Immutable bundle of features, true/observed labels and split tags.

    ``observed_labels`` equals ``true_labels`` until labels are corrupted.
    A corrupted dataset never has observed != true outside the train split;
    the constructor enforces this.
    """

    features: np.ndarray
    true_labels: np.ndarray
    observed_labels: np.ndarray
    split: np.ndarray
    num_classes: int
    class_names: tuple[str, ...] | None = None

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64)
        true_labels = np.array(self.true_labels, dtype=np.int64)
        observed = np.array(self.observed_labels, dtype=np.int64)
        split = np.array(self.split, dtype="U10")
        if features.ndim != 2:
            raise ValueError("features must be a 2-d array")
        n = features.shape[0]
        if true_labels.shape != (n,) or observed.shape != (n,) or split.shape != (n,):
            raise ValueError("label/split arrays must have one entry per sample")
        if not np.all(np.isfinite(features)):
            raise ValueError("features contain non-finite values")
        if self.num_classes < 1:
            raise ValueError("num_classes must be positive")
        for name, arr in (("true", true_labels), ("observed", observed)):
            if arr.size and (arr.min() < 0 or arr.max() >= self.num_classes):
                raise ValueError(f"{name} labels outside [0, {self.num_classes})")
        unknown = set(np.unique(split).tolist()) - _SPLIT_TAGS
        if unknown:
            raise ValueError(f"unknown split tags: {sorted(unknown)}")
        if ((observed != true_labels) & (split != TRAIN)).any():
            raise ValueError("observed labels differ from true labels outside the train split")
        names = self.class_names
        if names is not None:
            names = tuple(str(c) for c in names)
            if len(names) != self.num_classes:
                raise ValueError("class_names length must equal num_classes")
        for arr in (features, true_labels, observed, split):
            arr.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "true_labels", true_labels)
        object.__setattr__(self, "observed_labels", observed)
        object.__setattr__(self, "split", split)
        object.__setattr__(self, "num_classes", int(self.num_classes))
        object.__setattr__(self, "class_names", names)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def indices(self, tag: str) -> np.ndarray:
        """Ascending sample indices belonging to one split."""
        return np.flatnonzero(self.split == tag)


def _min_center_distance(centers: np.ndarray) -> float:
    diff = centers[:, None, :] - centers[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    return float(dist.min())


def make_blobs(k: int, n_per_class: int, d: int, separation: float, spread: float,
               seed: int) -> Dataset:
    """Sample one isotropic Gaussian blob per class.

    Class centers are drawn at random and rescaled so the closest pair of
    centers sits exactly ``separation`` apart (no rescale when separation
    is 0). Deterministic given the seed.
    """
    if k < 2:
        raise ValueError("need at least 2 classes")
    if n_per_class < 1 or d < 1:
        raise ValueError("n_per_class and d must be positive")
    separation = float(separation)
    spread = float(spread)
    if not math.isfinite(separation) or separation < 0:
        raise ValueError("separation must be finite and >= 0")
    if not math.isfinite(spread) or spread <= 0:
        raise ValueError("spread must be finite and > 0")

    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((k, d))
    while _min_center_distance(centers) == 0.0:  # coincident draws, essentially impossible
        centers = rng.standard_normal((k, d))
    if separation > 0:
        centers = centers * (separation / _min_center_distance(centers))

    labels = np.repeat(np.arange(k), n_per_class)
    feats = centers[labels] + spread * rng.standard_normal((k * n_per_class, d))
    tags = np.full(k * n_per_class, UNASSIGNED, dtype="U10")
    return Dataset(feats, labels, labels.copy(), tags, num_classes=k)


def _largest_remainder_counts(n: int, fractions: list[float]) -> list[int]:
    quotas = [f * n for f in fractions]
    counts = [math.floor(q) for q in quotas]
    leftover = n - sum(counts)
    order = sorted(range(len(fractions)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:leftover]:
        counts[i] += 1
    return counts


def split(ds: Dataset, fractions, seed: int) -> Dataset:
    """Stratified train/val/test assignment with largest-remainder rounding.

    Within each class, samples are shuffled by the seed and partitioned by
    the fractions, so per-class counts match the fractions to within one
    sample. Returns a new dataset; the input is unchanged.
    """
    fr = [float(f) for f in fractions]
    if len(fr) != 3:
        raise ValueError("fractions must be a (train, val, test) triple")
    if any(not math.isfinite(f) or f < 0 for f in fr):
        raise ValueError("fractions must be non-negative reals")
    if abs(sum(fr) - 1.0) > 1e-9:
        raise ValueError("fractions must sum to 1")

    rng = np.random.default_rng(seed)
    tags = np.full(ds.n_samples, UNASSIGNED, dtype="U10")
    for c in range(ds.num_classes):
        idx = np.flatnonzero(ds.true_labels == c)
        if idx.size == 0:
            continue
        perm = rng.permutation(idx)
        n_train, n_val, _ = _largest_remainder_counts(idx.size, fr)
        tags[perm[:n_train]] = TRAIN
        tags[perm[n_train:n_train + n_val]] = VAL
        tags[perm[n_train + n_val:]] = TEST
    return Dataset(ds.features, ds.true_labels, ds.observed_labels, tags,
                   ds.num_classes, ds.class_names)


def _meta_path(path: Path) -> Path:
    return Path(str(path) + ".meta.json")


def save_features(ds: Dataset, path) -> None:
    """Write a dataset as CSV (header f0,...,f{d-1},label) plus a meta sidecar.

    The label column holds the observed label; split tags are not persisted.
    Features are written with shortest round-trip precision.
    """
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"f{i}" for i in range(ds.n_features)] + ["label"])
        for row, label in zip(ds.features, ds.observed_labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])
    meta = {"k": ds.num_classes}
    if ds.class_names is not None:
        meta["class_names"] = list(ds.class_names)
    with open(_meta_path(path), "w") as fh:
        json.dump(meta, fh)


def load_features(path) -> Dataset:
    """Load a dataset CSV written per the schema above.

    The class count comes from the ``.meta.json`` sidecar when present,
    otherwise it is inferred as max(label)+1. Observed labels equal true
    labels and no split tags are assigned.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetParseError(f"{path}:1: empty file") from None
        d = len(header) - 1
        if d < 1 or header != [f"f{i}" for i in range(d)] + ["label"]:
            raise DatasetParseError(f"{path}:1: expected header f0,...,f{d-1},label")
        feats: list[list[float]] = []
        labels: list[int] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != d + 1:
                raise DatasetParseError(
                    f"{path}:{lineno}: expected {d + 1} fields, got {len(row)}")
            try:
                values = [float(v) for v in row[:-1]]
            except ValueError:
                raise DatasetParseError(f"{path}:{lineno}: non-numeric feature") from None
            if not all(math.isfinite(v) for v in values):
                raise DatasetParseError(f"{path}:{lineno}: non-finite feature")
            text = row[-1].strip()
            if not (text.isdigit() or (text.startswith("-") and text[1:].isdigit())):
                raise DatasetParseError(f"{path}:{lineno}: label is not a base-10 integer")
            label = int(text)
            if label < 0:
                raise DatasetParseError(f"{path}:{lineno}: negative label")
            feats.append(values)
            labels.append(label)
    if not labels:
        raise DatasetParseError(f"{path}: file contains no samples")

    k = max(labels) + 1
    class_names = None
    meta_file = _meta_path(path)
    if meta_file.exists():
        with open(meta_file) as fh:
            meta = json.load(fh)
        k = int(meta.get("k", k))
        if "class_names" in meta and meta["class_names"] is not None:
            class_names = tuple(meta["class_names"])
    bad = [lab for lab in labels if lab >= k]
    if bad:
        raise ValueError(f"{path}: labels {sorted(set(bad))} outside [0, {k})")

    features = np.array(feats, dtype=np.float64)
    label_arr = np.array(labels, dtype=np.int64)
    tags = np.full(len(labels), UNASSIGNED, dtype="U10")
    return Dataset(features, label_arr, label_arr.copy(), tags, k, class_names)
