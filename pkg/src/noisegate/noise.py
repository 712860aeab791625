"""Row-stochastic label-corruption models and seeded corruption of train labels.

A transition matrix T gives P(observed = j | true = i) per row i. Its trace
encodes the overall noise level: level = 1 - trace/K. Uniform noise spreads
each class's flip mass evenly over all other classes; asymmetric noise draws
a per-class level from a normal around the target and concentrates it on a
sparsity-controlled subset of target classes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import TRAIN, UNASSIGNED, Dataset

UNIFORM = "uniform"
ASYMMETRIC = "asymmetric"

_ETA_CAP = 0.95
_RESCALE_TOL = 1e-6


@dataclass(frozen=True)
class TransitionMatrix:
    """K x K row-stochastic corruption model; entries[i][j] = P(obs=j | true=i)."""

    entries: np.ndarray
    noise_level: float
    noise_type: str
    sparsity: float | None = None
    seed: int | None = None

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError("entries must be a square matrix")
        k = entries.shape[0]
        if k < 2:
            raise ValueError("need at least 2 classes")
        if (entries < 0).any():
            raise ValueError("entries must be non-negative")
        if np.abs(entries.sum(axis=1) - 1.0).max() > 1e-9:
            raise ValueError("rows must sum to 1")
        if self.noise_type not in (UNIFORM, ASYMMETRIC):
            raise ValueError(f"unknown noise type {self.noise_type!r}")
        if not 0.0 <= self.noise_level < 1.0:
            raise ValueError("noise_level must lie in [0, 1)")
        if abs(self.noise_level - (1.0 - np.trace(entries) / k)) > 1e-9:
            raise ValueError("noise_level must equal 1 - trace/K")
        if self.sparsity is not None and not 0.0 <= self.sparsity < 1.0:
            raise ValueError("sparsity must lie in [0, 1)")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "noise_level", float(self.noise_level))

    @property
    def k(self) -> int:
        return self.entries.shape[0]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "type": self.noise_type,
            "level": self.noise_level,
            "sparsity": self.sparsity,
            "rows": [list(row) for row in self.entries],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TransitionMatrix":
        entries = np.array(data["rows"], dtype=np.float64)
        if entries.shape != (data["k"], data["k"]):
            raise ValueError("rows do not match the declared class count")
        return cls(entries, float(data["level"]), data["type"], data.get("sparsity"))


def _check_level(k: int, level: float) -> float:
    level = float(level)
    if k < 2:
        raise ValueError("need at least 2 classes")
    if not math.isfinite(level) or not 0.0 <= level < (k - 1) / k:
        raise ValueError(f"noise level must lie in [0, {(k - 1) / k:.4g}) for K={k}")
    return level


def uniform_matrix(k: int, level: float) -> TransitionMatrix:
    """Class-independent noise: every class flips to any other with equal odds."""
    level = _check_level(k, level)
    entries = np.full((k, k), level / (k - 1))
    np.fill_diagonal(entries, 1.0 - level)
    return TransitionMatrix(entries, 1.0 - np.trace(entries) / k, UNIFORM)


def _rescale_to_target(eta: np.ndarray, level: float) -> np.ndarray:
    """Multiplicatively rescale clipped per-class levels until mean(eta) == level."""
    for _ in range(10):
        mean = eta.mean()
        if abs(mean - level) <= _RESCALE_TOL:
            return eta
        if mean == 0.0:
            raise ValueError("all per-class noise levels collapsed to zero; cannot rescale")
        eta = np.clip(eta * (level / mean), 0.0, _ETA_CAP)
    if abs(eta.mean() - level) > _RESCALE_TOL:
        raise ValueError("per-class noise levels did not converge to the target")
    return eta


def asymmetric_matrix(k: int, level: float, sparsity: float, sigma: float = 0.05,
                      seed: int = 0) -> TransitionMatrix:
    """Class-dependent noise over a sparsity-controlled subset of target classes.

    Per-class levels are drawn from Normal(level, sigma), clipped to
    [0, 0.95] and rescaled so their mean (hence the matrix trace) matches
    the target. Each row spreads its mass over m = max(1, round((1-sparsity)
    * (K-1))) randomly chosen target classes with random weights.
    """
    level = _check_level(k, level)
    if not 0.0 <= sparsity < 1.0:
        raise ValueError("sparsity must lie in [0, 1)")
    if not math.isfinite(sigma) or sigma < 0:
        raise ValueError("sigma must be finite and >= 0")

    rng = np.random.default_rng(seed)
    eta = np.clip(rng.normal(level, sigma, size=k), 0.0, _ETA_CAP)
    if level == 0.0:
        eta = np.zeros(k)
    else:
        eta = _rescale_to_target(eta, level)

    m = max(1, round((1.0 - sparsity) * (k - 1)))
    entries = np.zeros((k, k))
    for y in range(k):
        others = np.delete(np.arange(k), y)
        targets = rng.choice(others, size=m, replace=False)
        weights = rng.random(m)
        total = weights.sum()
        if total == 0.0:
            weights = np.full(m, 1.0 / m)
        else:
            weights = weights / total
        entries[y, targets] = eta[y] * weights
        entries[y, y] = 1.0 - eta[y]
    return TransitionMatrix(entries, 1.0 - np.trace(entries) / k, ASYMMETRIC,
                            sparsity=float(sparsity), seed=seed)


def corrupt(ds: Dataset, matrix: TransitionMatrix, seed: int) -> Dataset:
    """Resample observed labels of train-split samples from the transition matrix.

    Each train sample's observed label is drawn from the categorical
    distribution of its true label's row. Validation/test samples are left
    untouched. Returns a new dataset; the input is unchanged.
    """
    if matrix.k != ds.num_classes:
        raise ValueError(f"matrix has {matrix.k} classes, dataset has {ds.num_classes}")
    if (ds.split == UNASSIGNED).any():
        raise ValueError("dataset has no split assignment; call split() first")

    train_idx = ds.indices(TRAIN)
    rng = np.random.default_rng(seed)
    u = rng.random(train_idx.size)
    cdf = np.cumsum(matrix.entries[ds.true_labels[train_idx]], axis=1)
    drawn = np.minimum((u[:, None] >= cdf).sum(axis=1), ds.num_classes - 1)

    observed = np.array(ds.observed_labels)
    observed[train_idx] = drawn
    return Dataset(ds.features, ds.true_labels, observed, ds.split,
                   ds.num_classes, ds.class_names)


def realized_noise_level(ds: Dataset) -> float:
    """Fraction of train-split samples whose observed label differs from the true one."""
    train_idx = ds.indices(TRAIN)
    if train_idx.size == 0:
        return 0.0
    flipped = ds.observed_labels[train_idx] != ds.true_labels[train_idx]
    return float(flipped.mean())
