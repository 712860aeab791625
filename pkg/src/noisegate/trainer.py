"""Mini-batch gradient descent for a small dense softmax classifier.

The network is a single affine map (hidden_dim=0) or one ReLU hidden layer
followed by an affine map. Training can record post-epoch logits for the
whole train split plus final hidden activations, which the label-noise
detectors consume. Everything runs in float64 numpy and is bit-reproducible
given the config seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dataset import TRAIN, Dataset
from .seeding import derive_seed


class TrainingError(RuntimeError):
    """Training failed numerically (non-finite loss) or structurally."""


@dataclass
class TrainConfig:
    hidden_dim: int = 32
    epochs: int = 50
    learning_rate: float = 0.1
    batch_size: int = 32
    weight_init_scale: float = 1.0
    seed: int = 0
    record_logits: bool = False
    subset: np.ndarray | None = None  # global sample indices; intersected with the train split

    def __post_init__(self):
        if self.hidden_dim < 0:
            raise ValueError("hidden_dim must be >= 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not math.isfinite(self.learning_rate) or self.learning_rate < 0:
            raise ValueError("learning_rate must be finite and >= 0")


@dataclass
class Model:
    """Dense classifier: one or two affine layers with a ReLU in between."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def n_inputs(self) -> int:
        return self.weights[0].shape[0]

    @property
    def num_classes_out(self) -> int:
        return self.weights[-1].shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.weights[0].shape[1] if len(self.weights) == 2 else 0

    def forward(self, X: np.ndarray):
        """Return (hidden activations or None, logits)."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_inputs:
            raise ValueError(f"expected {self.n_inputs} input features, got shape {X.shape}")
        if len(self.weights) == 1:
            return None, X @ self.weights[0] + self.biases[0]
        hidden = np.maximum(X @ self.weights[0] + self.biases[0], 0.0)
        return hidden, hidden @ self.weights[1] + self.biases[1]

    def logits(self, X: np.ndarray) -> np.ndarray:
        return self.forward(X)[1]

    def to_dict(self) -> dict:
        return {
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Model":
        return cls(weights=[np.array(w, dtype=np.float64) for w in data["weights"]],
                   biases=[np.array(b, dtype=np.float64) for b in data["biases"]])


@dataclass
class TrainingTrace:
    """Per-epoch record of one training run, aligned with the full train split."""

    logits_per_epoch: np.ndarray | None  # (E, N_train, C) when recorded
    embeddings: np.ndarray               # (N_train, h) final hidden activations
    loss_per_epoch: np.ndarray           # (E,)


@dataclass
class CVProbabilities:
    """Out-of-fold predicted probabilities over the train split."""

    probs: np.ndarray           # (N_train, K), each row from its held-out fold's model
    fold_assignment: np.ndarray  # (N_train,) fold ids

    def __post_init__(self):
        if self.probs.shape[0] != self.fold_assignment.shape[0]:
            raise ValueError("probs and fold_assignment must cover the same samples")
        if np.abs(self.probs.sum(axis=1) - 1.0).max() > 1e-6:
            raise ValueError("probability rows must sum to 1")
        if (self.fold_assignment < 0).any():
            raise ValueError("every sample must be assigned to a fold")


def init_model(rng: np.random.Generator, n_features: int, hidden_dim: int,
               n_out: int, scale: float) -> Model:
    """Uniform(-s, s) weight init with s = scale/sqrt(fan_in); biases start at zero."""
    dims = [n_features, hidden_dim, n_out] if hidden_dim > 0 else [n_features, n_out]
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        s = scale / math.sqrt(fan_in)
        weights.append(rng.uniform(-s, s, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return Model(weights=weights, biases=biases)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def mean_cross_entropy(model: Model, X: np.ndarray, y: np.ndarray) -> float:
    _, logits = model.forward(X)
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    return float(np.mean(log_z - shifted[np.arange(len(y)), y]))


def loss_and_grads(model: Model, X: np.ndarray, y: np.ndarray):
    """Mean cross-entropy and its analytic gradients w.r.t. all parameters."""
    hidden, logits = model.forward(X)
    n = X.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    loss = float(np.mean(log_z - shifted[np.arange(n), y]))

    g = _softmax(logits)
    g[np.arange(n), y] -= 1.0
    g /= n
    if hidden is None:
        return loss, [X.T @ g], [g.sum(axis=0)]
    grad_w2 = hidden.T @ g
    grad_b2 = g.sum(axis=0)
    back = (g @ model.weights[1].T) * (hidden > 0)
    grad_w1 = X.T @ back
    grad_b1 = back.sum(axis=0)
    return loss, [grad_w1, grad_w2], [grad_b1, grad_b2]


def sgd_epoch(model: Model, X: np.ndarray, y: np.ndarray, learning_rate: float,
              batch_size: int, rng: np.random.Generator) -> None:
    """One pass over freshly shuffled mini-batches, updating the model in place."""
    perm = rng.permutation(X.shape[0])
    for start in range(0, perm.size, batch_size):
        batch = perm[start:start + batch_size]
        _, grads_w, grads_b = loss_and_grads(model, X[batch], y[batch])
        for w, gw in zip(model.weights, grads_w):
            w -= learning_rate * gw
        for b, gb in zip(model.biases, grads_b):
            b -= learning_rate * gb


def _fit_indices(ds: Dataset, cfg: TrainConfig) -> np.ndarray:
    train_idx = ds.indices(TRAIN)
    if train_idx.size == 0:
        raise ValueError("train split is empty")
    if cfg.subset is None:
        return train_idx
    fit_idx = np.intersect1d(train_idx, np.asarray(cfg.subset, dtype=np.int64))
    if fit_idx.size == 0:
        raise ValueError("training subset contains no train-split samples")
    return fit_idx


def train(ds: Dataset, cfg: TrainConfig, labels: str = "observed",
          num_classes_out: int | None = None):
    """Train a classifier on the train split; return (Model, TrainingTrace).

    ``labels`` selects observed or true labels. Post-epoch logits (when
    cfg.record_logits) and final embeddings cover the entire train split in
    ascending index order, even when cfg.subset restricts what is fit.
    """
    if labels not in ("observed", "true"):
        raise ValueError("labels must be 'observed' or 'true'")
    train_idx = ds.indices(TRAIN)
    fit_idx = _fit_indices(ds, cfg)
    y_source = ds.observed_labels if labels == "observed" else ds.true_labels
    n_out = ds.num_classes if num_classes_out is None else int(num_classes_out)
    if y_source[fit_idx].max() >= n_out:
        raise ValueError("labels exceed the configured output class count")

    X_fit = ds.features[fit_idx]
    y_fit = y_source[fit_idx]
    X_all = ds.features[train_idx]

    rng = np.random.default_rng(cfg.seed)
    model = init_model(rng, ds.n_features, cfg.hidden_dim, n_out, cfg.weight_init_scale)

    recorded = [] if cfg.record_logits else None
    losses = np.empty(cfg.epochs)
    for epoch in range(1, cfg.epochs + 1):
        sgd_epoch(model, X_fit, y_fit, cfg.learning_rate, cfg.batch_size, rng)
        loss = mean_cross_entropy(model, X_fit, y_fit)
        if not math.isfinite(loss):
            raise TrainingError(f"non-finite loss at epoch {epoch}")
        losses[epoch - 1] = loss
        if recorded is not None:
            recorded.append(model.logits(X_all))

    trace = TrainingTrace(
        logits_per_epoch=np.stack(recorded) if recorded is not None else None,
        embeddings=embed(model, X_all),
        loss_per_epoch=losses,
    )
    return model, trace


def predict_proba(model: Model, X: np.ndarray) -> np.ndarray:
    """Softmax probabilities, computed with max-subtraction for stability."""
    return _softmax(model.logits(X))


def evaluate(model: Model, ds: Dataset, split_tag: str) -> float:
    """Accuracy of argmax predictions against TRUE labels on one split."""
    idx = ds.indices(split_tag)
    if idx.size == 0:
        raise ValueError(f"split {split_tag!r} is empty")
    preds = model.logits(ds.features[idx]).argmax(axis=1)
    return float((preds == ds.true_labels[idx]).mean())


def embed(model: Model, X: np.ndarray) -> np.ndarray:
    """Penultimate-layer activations; the raw features when there is no hidden layer."""
    X = np.asarray(X, dtype=np.float64)
    if model.hidden_dim == 0:
        if X.ndim != 2 or X.shape[1] != model.n_inputs:
            raise ValueError(f"expected {model.n_inputs} input features, got shape {X.shape}")
        return X
    return model.forward(X)[0]


def cv_predict(ds: Dataset, cfg: TrainConfig, folds: int) -> CVProbabilities:
    """Out-of-fold probabilities from a stratified-by-observed-label k-fold.

    Each fold's model is trained on the complement and predicts the held-out
    samples, so every train sample is scored by a model that never saw it.
    """
    if folds < 2:
        raise ValueError("need at least 2 folds")
    train_idx = ds.indices(TRAIN)
    n = train_idx.size
    if n < folds:
        raise ValueError("train split smaller than the fold count")

    observed = ds.observed_labels[train_idx]
    rng = np.random.default_rng(derive_seed(cfg.seed, "cv-assign"))
    fold_of = np.full(n, -1, dtype=np.int64)
    for c in range(ds.num_classes):
        pos = np.flatnonzero(observed == c)
        if pos.size == 0:
            continue
        perm = rng.permutation(pos)
        # offset by class so tiny classes do not all land in fold 0
        for j, chunk in enumerate(np.array_split(perm, folds)):
            fold_of[chunk] = (j + c) % folds

    probs = np.zeros((n, ds.num_classes))
    for f in range(folds):
        held = np.flatnonzero(fold_of == f)
        if held.size == 0:
            continue
        fold_cfg = replace(cfg, seed=derive_seed(cfg.seed, "cv-fold", f),
                           subset=train_idx[fold_of != f], record_logits=False)
        try:
            model, _ = train(ds, fold_cfg, labels="observed")
        except Exception as exc:
            raise TrainingError(f"fold {f} training failed: {exc}") from exc
        probs[held] = predict_proba(model, ds.features[train_idx[held]])
    return CVProbabilities(probs=probs, fold_assignment=fold_of)
